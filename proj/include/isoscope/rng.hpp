#pragma once

#include <cstdint>

#include "isoscope/common.hpp"
#include "isoscope/subspace.hpp"

namespace isoscope {

/// Counter-based splittable random stream.
///
/// A stream is identified by a 64-bit key derived from the root seed and the
/// task path (the sequence of derive() ids). Output i is a strong 64-bit hash
/// of (key, i), so streams can be derived for parallel tasks without any
/// coordination and the full experiment output depends only on the root seed
/// and the task partition, never on the worker count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t root_seed);

  /// Child stream for a subtask. Same (root seed, path) => same outputs.
  [[nodiscard]] RngStream derive(std::uint64_t task_id) const;

  std::uint64_t next_u64();
  /// Uniform on [0,1), 53 random bits.
  double uniform01();
  /// Uniform on (0,1]; safe as a log() argument.
  double uniform_open();
  /// Standard normal via Box-Muller. Consumes exactly two uniforms.
  double gaussian();
  /// Uniform on {false,true}.
  bool coin();
  /// Stream identity (derived key); recorded in outputs for reproducibility.
  std::uint64_t key() const { return key_; }

 private:
  RngStream(std::uint64_t key, int);  // tagged internal ctor
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Haar-uniform unit vector on S^{n-1}.
Vec sample_sphere(int n, RngStream& rng);

/// Haar-distributed m-dimensional subspace of R^n (QR of a Gaussian matrix
/// with the sign-of-R-diagonal correction).
Subspace sample_grassmannian(int n, int m, RngStream& rng);

/// Haar-distributed orthogonal matrix (sign-corrected QR).
Mat sample_orthogonal(int n, RngStream& rng);

}  // namespace isoscope
