#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "isoscope/geometry.hpp"
#include "isoscope/rng.hpp"

namespace isoscope {

enum class MeasureKind {
  UniformOnBody,
  StandardGaussian,
  LaplaceProduct,  // two-sided exponential coordinates, unit variance
  Pushforward,
  Marginal,
};

struct MeasureDesc;
using MeasurePtr = std::shared_ptr<const MeasureDesc>;

struct MeasureDesc {
  MeasureKind kind;
  int n = 0;
  BodyPtr body;     // UniformOnBody
  Mat T;            // Pushforward
  Mat frame;        // Marginal
  MeasurePtr child;
  int burn_in = -1;   // chain overrides; -1 = default 100*n
  int thinning = -1;  // -1 = default n

  static MeasurePtr uniform_on(BodyPtr body, int burn_in = -1, int thinning = -1);
  static MeasurePtr gaussian(int n);
  static MeasurePtr laplace(int n);
  static MeasurePtr pushforward(Mat T, MeasurePtr child);
  static MeasurePtr marginal(MeasurePtr child, const Subspace& E);
};

/// Centered log-concave probability measure: a sampler plus optional density
/// and closed-form moment oracles. Immutable; safe to share across threads.
class LogConcaveMeasure {
 public:
  LogConcaveMeasure() = default;
  explicit LogConcaveMeasure(MeasurePtr desc);

  int dim() const;
  const MeasurePtr& descriptor() const;

  /// True when draws are exact (no Markov chain anywhere in the tree).
  bool exact() const;

  /// Supremum of the normalized density, when known in closed form.
  std::optional<double> sup_density() const;

  /// Closed-form (E |<X,y>|^q)^{1/q} when available (Gaussian: c_q ||y||).
  std::optional<double> moment_oracle(double q, const Vec& y) const;

  /// The uniform-on-body payload (empty body otherwise).
  const ConvexBody& body() const;

  friend class MeasureSampler;

  struct Impl;  // public for the compile step in measures.cpp

 private:
  std::shared_ptr<const Impl> impl_;
};

/// Sampling session. For exact measures it is stateless; for hit-and-run
/// measures it owns the chain (burn-in runs at construction, `thinning`
/// steps per draw). Each worker should hold its own session with a derived
/// stream; sessions are never shared.
class MeasureSampler {
 public:
  MeasureSampler(const LogConcaveMeasure& mu, RngStream rng);
  ~MeasureSampler();
  MeasureSampler(MeasureSampler&&) noexcept;
  Vec next();

 private:
  struct Node;
  std::shared_ptr<const LogConcaveMeasure::Impl> keep_alive_;
  std::unique_ptr<Node> root_;
  RngStream rng_;
};

// -- module operations --

/// One draw from mu. Exact measures sample directly; chain measures run a
/// fresh burn-in, so prefer MeasureSampler for batches.
Vec sample(const LogConcaveMeasure& mu, RngStream& rng);

/// Rows are independent draws. Uses a fixed batch partition with derived
/// streams, so the result is identical for any worker count.
Mat sample_matrix(const LogConcaveMeasure& mu, int n_samples, const RngStream& rng);

/// Chord of `body` through x in unit direction theta: returns (t_minus,
/// t_plus) with x + t theta on the boundary, by exponential bracketing and
/// bisection to absolute tolerance 1e-10.
std::pair<double, double> chord_endpoints(const ConvexBody& body, const Vec& x,
                                          const Vec& theta);

/// One hit-and-run step from x (must lie in the body).
Vec hit_and_run_step(const ConvexBody& body, const Vec& x, RngStream& rng);

LogConcaveMeasure marginal(const LogConcaveMeasure& mu, const Subspace& E);
LogConcaveMeasure pushforward(const LogConcaveMeasure& mu, const Mat& T);

/// The measure mu_K with density L_K^n 1_{K/L_K} for an isotropic volume-one
/// body K with known L_K: uniform on (1/L_K) K, an isotropic measure.
LogConcaveMeasure isotropic_body_measure(const BodyPtr& body);

}  // namespace isoscope
