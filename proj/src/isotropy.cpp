#include "isoscope/isotropy.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "isoscope/parallel.hpp"
#include "isoscope/radii.hpp"

namespace isoscope {

namespace {

struct MomentPartial {
  long n = 0;
  Vec mean;
  Mat m2;  // comoment matrix

  void init(int d) {
    mean = Vec::Zero(d);
    m2 = Mat::Zero(d, d);
  }
  void add(const Vec& x) {
    ++n;
    const Vec d = x - mean;
    mean += d / n;
    m2 += d * (x - mean).transpose();
  }
  void merge(const MomentPartial& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const Vec d = o.mean - mean;
    const long t = n + o.n;
    m2 += o.m2 + (static_cast<double>(n) * o.n / t) * (d * d.transpose());
    mean = (static_cast<double>(n) * mean + static_cast<double>(o.n) * o.mean) / t;
    n = t;
  }
};

std::vector<MomentPartial> moment_batches(const LogConcaveMeasure& mu, long n_samples,
                                          const RngStream& rng) {
  const int nb = par::batch_count(n_samples);
  std::vector<MomentPartial> parts(nb);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(n_samples, nb, b, &lo, &hi);
    MeasureSampler s(mu, rng.derive(b));
    parts[b].init(mu.dim());
    for (std::int64_t i = lo; i < hi; ++i) parts[b].add(s.next());
  });
  return parts;
}

}  // namespace

MomentReport estimate_moments(const LogConcaveMeasure& mu, long n_samples,
                              const RngStream& rng) {
  if (n_samples < 100) throw Error("estimate_moments: need N >= 100");
  const int d = mu.dim();
  auto parts = moment_batches(mu, n_samples, rng);
  MomentPartial total;
  total.init(d);
  for (const auto& p : parts) total.merge(p);

  MomentReport rep;
  rep.barycenter = total.mean;
  rep.covariance = total.m2 / static_cast<double>(total.n);
  rep.n_samples = total.n;

  // batch-jackknife standard errors: spread of per-batch statistics
  const int B = static_cast<int>(parts.size());
  if (B >= 2) {
    Mat mean_var = Mat::Zero(d, d);  // diag-free reuse: entrywise cov spread
    Vec mu_var = Vec::Zero(d);
    for (const auto& p : parts) {
      const Vec dm = p.mean - rep.barycenter;
      mu_var += dm.cwiseProduct(dm);
      const Mat cb = p.m2 / std::max<long>(1, p.n);
      const Mat dc = cb - rep.covariance;
      mean_var += dc.cwiseProduct(dc);
    }
    const double se_mean = std::sqrt(mu_var.maxCoeff() / (B * (B - 1.0)));
    const double se_cov = std::sqrt(mean_var.maxCoeff() / (B * (B - 1.0)));
    rep.stderr_scale = std::max(se_mean, se_cov);
  }
  return rep;
}

Mat inverse_sqrt(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  const Vec ev = es.eigenvalues();
  const double floor = 1e-12 * ev.maxCoeff();
  if (ev.minCoeff() < floor)
    throw RankDeficientCovariance("covariance is rank deficient");
  const Vec inv_sqrt = ev.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

IsotropicResult isotropic_transform(const ConvexBody& body, long n_samples,
                                    const RngStream& rng) {
  const int n = body.dim();
  const double vol = body.analytic_volume();
  LogConcaveMeasure uni(MeasureDesc::uniform_on(body.descriptor()));
  auto parts = moment_batches(uni, n_samples, rng);
  MomentPartial total;
  total.init(n);
  for (const auto& p : parts) total.merge(p);
  const Vec mean = total.mean;
  const Mat cov = total.m2 / static_cast<double>(total.n);

  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  const Vec ev = es.eigenvalues();
  if (ev.minCoeff() < 1e-12 * ev.maxCoeff())
    throw RankDeficientCovariance("isotropic_transform: degenerate body covariance");
  const Mat W = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                es.eigenvectors().transpose();
  // scale so the normalized body has volume exactly one:
  // |s W K| = s^n |det W| vol = 1, and then L = s by construction
  const double logdet_cov = ev.array().log().sum();
  const double log_s = -(std::log(vol) - 0.5 * logdet_cov) / n;
  const double s = std::exp(log_s);

  IsotropicResult res;
  res.transform = s * W;
  res.translation = -(res.transform * mean);
  res.L = s;
  res.normalized = BodyDesc::affine(res.transform, body.descriptor());

  // stderr of L from the batch spread of per-batch log det covariance
  const int B = static_cast<int>(parts.size());
  if (B >= 2) {
    std::vector<double> vals;
    vals.reserve(B);
    for (const auto& p : parts) {
      if (p.n <= n) continue;
      Eigen::SelfAdjointEigenSolver<Mat> eb(p.m2 / static_cast<double>(p.n));
      const double lo = 1e-12 * eb.eigenvalues().maxCoeff();
      if (eb.eigenvalues().minCoeff() < lo) continue;
      vals.push_back(eb.eigenvalues().array().log().sum());
    }
    if (vals.size() >= 2) {
      double m = 0;
      for (double v : vals) m += v;
      m /= vals.size();
      double var = 0;
      for (double v : vals) var += (v - m) * (v - m);
      var /= (vals.size() - 1.0) * vals.size();
      res.L_stderr = res.L * std::sqrt(var) / (2.0 * n);
    }
  }
  return res;
}

double isotropic_constant(const LogConcaveMeasure& mu, long n_samples,
                          const RngStream& rng) {
  const auto sup = mu.sup_density();
  if (!sup)
    throw DensityUnavailable("isotropic_constant: density supremum unknown");
  const int n = mu.dim();
  const MomentReport rep = estimate_moments(mu, n_samples, rng);
  Eigen::SelfAdjointEigenSolver<Mat> es(rep.covariance);
  if (es.eigenvalues().minCoeff() <= 0)
    throw RankDeficientCovariance("isotropic_constant: degenerate covariance");
  const double logdet = es.eigenvalues().array().log().sum();
  return std::exp(std::log(*sup) / n + logdet / (2.0 * n));
}

SectionVolumeMoment section_volume_moment(const ConvexBody& body, const Subspace& F,
                                          double p, long n_proposals,
                                          const RngStream& rng) {
  const int m = F.dim();
  const ConvexBody sec = section_body(body, F);
  const MaximizerConfig cfg;
  const double R =
      1.05 * section_radius(body, F, cfg, rng.derive(0)).value;  // inflate: stays unbiased
  const int nb = par::batch_count(n_proposals);
  std::vector<long> acc(nb, 0);
  std::vector<double> mom(nb, 0.0);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(n_proposals, nb, b, &lo, &hi);
    RngStream s = rng.derive(1 + b);
    long a = 0;
    double msum = 0;
    for (std::int64_t i = lo; i < hi; ++i) {
      const double r = R * std::pow(s.uniform_open(), 1.0 / m);
      const Vec x = r * sample_sphere(m, s);
      if (sec.gauge(x) <= 1.0) {
        ++a;
        msum += std::pow(x.norm(), p);
      }
    }
    acc[b] = a;
    mom[b] = msum;
  });
  long a_total = 0;
  double m_total = 0;
  for (int b = 0; b < nb; ++b) {
    a_total += acc[b];
    m_total += mom[b];
  }
  SectionVolumeMoment out;
  out.n_accepted = a_total;
  out.section_radius = R;
  const double ball_vol = std::exp(unit_ball_log_volume(m) + m * std::log(R));
  out.volume = ball_vol * static_cast<double>(a_total) / n_proposals;
  out.moment_p = a_total > 0 ? m_total / a_total : 0.0;
  return out;
}

double section_isotropic_constant(const ConvexBody& body, const Subspace& F,
                                  long n_samples, const RngStream& rng) {
  const int m = F.dim();
  if (m > 12)
    throw DimensionTooLarge("section_isotropic_constant: dim(F) <= 12 required");
  if (!body.has_gauge())
    throw OracleUnavailable("section_isotropic_constant: gauge route required");

  // volume by rejection from the circumscribed ball
  const auto svm = section_volume_moment(body, F, 2.0, n_samples, rng.derive(0));
  if (svm.n_accepted < 50)
    throw Error("section_isotropic_constant: rejection acceptance too low");

  // covariance of the uniform probability measure on K ∩ F by hit-and-run
  const ConvexBody sec = section_body(body, F);
  LogConcaveMeasure uni(MeasureDesc::uniform_on(sec.descriptor()));
  const MomentReport rep = estimate_moments(uni, n_samples, rng.derive(1));
  Eigen::SelfAdjointEigenSolver<Mat> es(rep.covariance);
  if (es.eigenvalues().minCoeff() <= 0)
    throw RankDeficientCovariance("section_isotropic_constant: degenerate covariance");
  const double logdet = es.eigenvalues().array().log().sum();
  return std::exp(-std::log(svm.volume) / m + logdet / (2.0 * m));
}

}  // namespace isoscope
