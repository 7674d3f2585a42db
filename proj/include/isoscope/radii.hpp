#pragma once

#include "isoscope/geometry.hpp"
#include "isoscope/measures.hpp"

namespace isoscope {

struct MaximizerConfig {
  int n_starts = 64;
  int n_coarse = 4096;
  int refine_steps = 200;
  double step_tolerance = 1e-8;
};

/// Best-found maximum of an objective over a sphere. Values are certified
/// lower bounds: value equals the objective re-evaluated at argmax_direction.
struct RadiusResult {
  double value = 0;
  Vec argmax_direction;  // unit vector, F-coordinates where applicable
  long n_evals = 0;
  bool certified_lower_bound = true;
};

/// Objective on the unit sphere. `ascent` (optional) returns a direction of
/// increase at theta (any positive multiple of a supergradient); when absent
/// the maximizer falls back to finite differences in the tangent space.
struct SphereObjective {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> ascent;  // may be null
};

/// Multi-start maximization on S^{dim-1}: Haar coarse stage, then projected
/// (sub)gradient refinement with non-monotone c/sqrt(t) steps tracking the
/// best iterate, then a monotone line-search polish.
RadiusResult sphere_maximize(const SphereObjective& obj, int dim,
                             const MaximizerConfig& config, const RngStream& rng);

/// R(K ∩ F): maximize the radial function 1/gauge(frame * theta) over S_F.
RadiusResult section_radius(const ConvexBody& body, const Subspace& F,
                            const MaximizerConfig& config, const RngStream& rng);

/// R(P_F K): maximize support(frame * theta) over S_F.
RadiusResult projection_radius(const ConvexBody& body, const Subspace& F,
                               const MaximizerConfig& config, const RngStream& rng);

/// Upper bound on the Gelfand number c_t(K): min of section_radius over
/// n_subspaces Haar draws from G_{n,n-t}. t = 0 means the full space.
RadiusResult gelfand_upper(const ConvexBody& body, int t, int n_subspaces,
                           const MaximizerConfig& config, const RngStream& rng);

/// R(K ∩ U(K)): maximize min(radial(theta), radial(U^T theta)) over S^{n-1}.
RadiusResult rotation_intersection_radius(const ConvexBody& body, const Mat& U,
                                          const MaximizerConfig& config,
                                          const RngStream& rng);

/// R(Z_q°(mu) ∩ F) = 1 / min_{theta in S_F} h_{Z_q(mu)}(frame * theta), with
/// one fixed sample (common random numbers) reused across all directions.
RadiusResult polar_centroid_section_radius(const LogConcaveMeasure& mu, double q,
                                           const Subspace& F, long n_samples,
                                           const MaximizerConfig& config,
                                           const RngStream& rng);

}  // namespace isoscope
