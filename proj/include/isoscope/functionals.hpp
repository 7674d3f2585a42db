#pragma once

#include <string>

#include "isoscope/measures.hpp"

namespace isoscope {

/// A Monte Carlo estimate with its standard error and provenance.
struct Estimate {
  double value = 0;
  double stderr_ = 0;
  long n_samples = 0;
  std::uint64_t seed = 0;  // key of the stream that produced it
  std::string method;
  // diagnostics
  long dropped_zeros = 0;     // |<x,y>| = 0 terms dropped from log-domain means
  bool divergence_flag = false;  // psi_alpha root exceeded the growth threshold
  bool heavy_tail_flag = false;  // top 1% of vrad terms carried > 50% of the sum
};

/// h_{Z_q(mu)}(y) = (E |<X,y>|^q)^{1/q}, log-domain accumulation, delta-method
/// standard error.
Estimate centroid_support(const LogConcaveMeasure& mu, double q, const Vec& y,
                          long n_samples, const RngStream& rng);

/// I_q of a measure: (E ||X||_2^q)^{1/q}; negative q in (-n, 0) supported.
Estimate moment_radius(const LogConcaveMeasure& mu, double q, long n_samples,
                       const RngStream& rng);
/// I_q of a body, under the uniform measure on it.
Estimate moment_radius(const ConvexBody& body, double q, long n_samples,
                       const RngStream& rng);

/// Mean width w(K): spherical average of the support function.
Estimate mean_width(const ConvexBody& body, long n_dirs, const RngStream& rng);

/// w(Z_q(mu)) by two-level Monte Carlo: outer sphere directions, inner
/// centroid_support with a derived stream per direction.
Estimate centroid_mean_width(const LogConcaveMeasure& mu, double q, long n_dirs,
                             long n_samples, const RngStream& rng);

/// vrad(body ∩ F) = (E_{theta in S_F} gauge(theta)^{-m})^{1/m}; flags heavy
/// tails instead of trusting them.
Estimate vrad_section(const ConvexBody& body, const Subspace& F, long n_dirs,
                      const RngStream& rng);

/// Orlicz psi_alpha norm of <.,theta>: the root of
/// G(t) = E exp((|<X,theta>|/t)^alpha) = 2 on a fixed sample, bisection to
/// relative tolerance 1e-6; stderr over 20 bootstrap resamples. Flags
/// divergence when the root exceeds 0.6 * m2 * sqrt(log N).
Estimate psi_alpha_norm(const LogConcaveMeasure& mu, const Vec& theta, double alpha,
                        long n_samples, const RngStream& rng);

/// h_{Psi_2}(y): max over dyadic q in {2,4,...,2^ceil(log2 n)} of
/// centroid_support(mu,q,y)/sqrt(q), on one fixed sample.
Estimate psi2_support(const LogConcaveMeasure& mu, const Vec& y, long n_samples,
                      const RngStream& rng);

/// Root of G(t) = weighted mean of exp((|z_i|/t)^alpha) = 2 on a fixed
/// sample of |z| values (weights = nullptr means uniform). Exposed for the
/// experiment harness, which reuses one sample across many directions.
double psi_alpha_root_fixed(const Eigen::ArrayXd& abs_z, double alpha,
                            const Eigen::ArrayXd* weights);

}  // namespace isoscope
