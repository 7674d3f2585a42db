#pragma once

#include "isoscope/common.hpp"

namespace isoscope {

/// An m-dimensional linear subspace of R^n stored as an n x m orthonormal
/// frame. Immutable after construction.
class Subspace {
 public:
  /// Validates frame^T frame = I_m within 1e-10 entrywise and 1 <= m <= n.
  explicit Subspace(Mat frame);

  /// span(e_1, ..., e_m) in R^n.
  static Subspace axes(int n, int m);

  const Mat& frame() const { return frame_; }
  int ambient_dim() const { return static_cast<int>(frame_.rows()); }
  int dim() const { return static_cast<int>(frame_.cols()); }

  /// Lift F-coordinates to ambient coordinates.
  Vec lift(const Vec& u) const;
  /// Project an ambient vector to F-coordinates.
  Vec project(const Vec& x) const;

 private:
  Mat frame_;
};

}  // namespace isoscope
