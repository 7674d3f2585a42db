#pragma once

#include "isoscope/measures.hpp"

namespace isoscope {

struct MomentReport {
  Vec barycenter;
  Mat covariance;
  long n_samples = 0;
  double stderr_scale = 0;  // largest entrywise standard error (jackknife)
};

struct IsotropicResult {
  Mat transform;      // linear part
  Vec translation;    // recentering, applied before the linear part
  double L = 0;       // isotropic constant estimate
  double L_stderr = 0;
  BodyPtr normalized; // Affine(transform, body)
};

/// Sample mean and covariance with jackknife (delete-one-batch) standard
/// errors. Batched and merge-order deterministic.
MomentReport estimate_moments(const LogConcaveMeasure& mu, long n_samples,
                              const RngStream& rng);

/// Places a body in the Eq.-convention isotropic position: volume one and
/// Cov = L^2 I. Needs a gauge route, an exact volume and a sampler route.
IsotropicResult isotropic_transform(const ConvexBody& body, long n_samples,
                                    const RngStream& rng);

/// L_mu = (sup f)^{1/n} (det Cov_N)^{1/2n}; needs a known density supremum.
double isotropic_constant(const LogConcaveMeasure& mu, long n_samples,
                          const RngStream& rng);

/// Isotropic constant of the section K ∩ F: volume by rejection from the
/// circumscribed ball, moments by hit-and-run. dim(F) <= 12.
double section_isotropic_constant(const ConvexBody& body, const Subspace& F,
                                  long n_samples, const RngStream& rng);

/// Symmetric inverse square root with an eigenvalue floor of 1e-12 times the
/// largest eigenvalue; below the floor throws RankDeficientCovariance.
Mat inverse_sqrt(const Mat& S);

/// Rejection-based estimate of the section volume |K ∩ F| together with the
/// uniform-sample moment E ||x||^p over the section (helper for the
/// polar-integration experiments). Returns {volume, moment_p, n_accepted}.
struct SectionVolumeMoment {
  double volume = 0;
  double moment_p = 0;  // E_{uniform on K∩F} ||x||^p
  long n_accepted = 0;
  double section_radius = 0;
};
SectionVolumeMoment section_volume_moment(const ConvexBody& body, const Subspace& F,
                                          double p, long n_proposals,
                                          const RngStream& rng);

}  // namespace isoscope
