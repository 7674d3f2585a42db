#pragma once

#include "isoscope/measures.hpp"
#include "isoscope/radii.hpp"

namespace isoscope {

/// Deterministic representation of the support function h_{Z_q(mu)} for use
/// inside optimizers: either the measure's closed-form moment oracle, or the
/// empirical support over one fixed sample (common random numbers), so the
/// objective seen by an optimizer is deterministic and consistent across
/// directions.
class CentroidSupportFn {
 public:
  /// Draws the sample unless mu carries a moment oracle.
  CentroidSupportFn(const LogConcaveMeasure& mu, double q, long n_samples,
                    const RngStream& rng);

  int dim() const { return dim_; }
  double q() const { return q_; }
  bool exact() const { return exact_; }
  long n_samples() const { return exact_ ? 0 : X_.rows(); }

  double operator()(const Vec& u) const;
  /// Gradient of h at u (u != 0).
  Vec gradient(const Vec& u) const;

  /// Marginal support function: h of Z_q(pi_F mu) at u in F-coordinates,
  /// which equals h_{Z_q(mu)}(frame u) by the projection identity.
  /// Returned object shares this sample projected onto F.
  CentroidSupportFn marginal(const Subspace& F) const;

 private:
  CentroidSupportFn() = default;
  int dim_ = 0;
  double q_ = 2;
  bool exact_ = false;
  double cq_ = 1.0;  // exact case: h(u) = cq * ||u||
  Mat X_;            // N x n fixed sample
};

/// gauge of Z_q at theta = max_{u in S^{n-1}} <theta,u>/h(u), solved by
/// warm-started projected ascent (the superlevel sets are convex cones, so
/// ascent from u = theta is reliable for these near-ellipsoidal bodies).
struct CentroidGauge {
  double value = 0;
  Vec maximizer;  // u*
};
CentroidGauge centroid_gauge(const CentroidSupportFn& h, const Vec& theta,
                             const Vec* warm_start = nullptr, int max_iters = 60);

/// R(Z_q(mu) ∩ F) = 1 / min_{theta in S_F} gauge_{Z_q}(theta): outer
/// subgradient descent over S_F with warm-started inner gauge solves.
RadiusResult centroid_section_radius(const LogConcaveMeasure& mu, double q,
                                     const Subspace& F, long n_samples,
                                     const MaximizerConfig& config,
                                     const RngStream& rng);

/// R(Z_q ∩ U(Z_q)): maximize min of the two radial functions over S^{n-1}.
RadiusResult centroid_rotation_radius(const LogConcaveMeasure& mu, double q,
                                      const Mat& U, long n_samples,
                                      const MaximizerConfig& config,
                                      const RngStream& rng);

/// R(P_F(Z_q(mu))) = max_{theta in S_F} h_{Z_q}(frame * theta).
RadiusResult centroid_projection_radius(const LogConcaveMeasure& mu, double q,
                                        const Subspace& F, long n_samples,
                                        const MaximizerConfig& config,
                                        const RngStream& rng);

/// R(Z_q(mu)) = max over the full sphere of h_{Z_q}.
RadiusResult centroid_radius(const LogConcaveMeasure& mu, double q, long n_samples,
                             const MaximizerConfig& config, const RngStream& rng);

/// vrad(P_E(Z_q(mu))) = vrad(Z_q(pi_E mu)): radial Monte Carlo over S_E with
/// warm-started gauge solves in dim(E) dimensions.
double vrad_centroid_projection(const CentroidSupportFn& h_marginal, long n_dirs,
                                const RngStream& rng);

}  // namespace isoscope
