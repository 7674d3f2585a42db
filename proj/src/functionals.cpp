#include "isoscope/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "isoscope/parallel.hpp"

namespace isoscope {

namespace {

// Scaled power-sum accumulator for log-domain means of w_i = exp(q * l_i):
// keeps A = q * max(l), S1 = sum exp(q(l - max)), S2 = sum exp(2q(l - max)).
struct PowerSum {
  double A = -std::numeric_limits<double>::infinity();
  double S1 = 0, S2 = 0;
  long n = 0;      // terms folded in (including zeros for q > 0)
  long zeros = 0;  // dropped -inf terms

  void add_log(double q, double l) {
    ++n;
    if (!std::isfinite(l)) {  // log(0)
      ++zeros;
      return;
    }
    const double a = q * l;
    if (a <= A) {
      const double e = std::exp(a - A);
      S1 += e;
      S2 += e * e;
    } else {
      const double e = std::exp(A - a);
      S1 = S1 * e + 1.0;
      S2 = S2 * e * e + 1.0;
      A = a;
    }
  }

  void merge(const PowerSum& o) {
    n += o.n;
    zeros += o.zeros;
    if (o.S1 == 0) return;
    if (o.A <= A) {
      const double e = std::exp(o.A - A);
      S1 += o.S1 * e;
      S2 += o.S2 * e * e;
    } else {
      const double e = std::exp(A - o.A);
      S1 = S1 * e + o.S1;
      S2 = S2 * e * e + o.S2;
      A = o.A;
    }
  }
};

// (mean w)^{1/q} and its delta-method stderr. For q > 0 zeros count toward
// the mean (they contribute 0 to the sum); for q < 0 they are excluded.
struct PowerMean {
  double value, stderr_;
  long zeros;
};

PowerMean finish_power_mean(const PowerSum& ps, double q) {
  const long denom = q > 0 ? ps.n : ps.n - ps.zeros;
  if (denom <= 0 || ps.S1 <= 0)
    throw AllZeroInnerProducts("power mean: no nonzero terms");
  const double log_m = ps.A + std::log(ps.S1) - std::log(static_cast<double>(denom));
  const double value = std::exp(log_m / q);
  // rel^2 = (m2/m^2 - 1)/N with m2/m^2 = S2 * N / S1^2 (bounded by N)
  const double ratio = ps.S2 * static_cast<double>(denom) / (ps.S1 * ps.S1);
  const double rel = std::sqrt(std::max(0.0, ratio - 1.0) / denom);
  return {value, value * rel / std::abs(q), ps.zeros};
}

double safe_log_abs(double z) {
  const double a = std::abs(z);
  return a > 0 ? std::log(a) : -std::numeric_limits<double>::infinity();
}

}  // namespace

Estimate centroid_support(const LogConcaveMeasure& mu, double q, const Vec& y,
                          long n_samples, const RngStream& rng) {
  if (q < 1.0) throw QOutOfRange("centroid_support: q >= 1 required");
  require_dim(y, mu.dim(), "centroid_support");
  const int nb = par::batch_count(n_samples);
  std::vector<PowerSum> parts(nb);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(n_samples, nb, b, &lo, &hi);
    MeasureSampler s(mu, rng.derive(b));
    PowerSum ps;
    for (std::int64_t i = lo; i < hi; ++i)
      ps.add_log(q, safe_log_abs(y.dot(s.next())));
    parts[b] = ps;
  });
  PowerSum total;
  for (const auto& p : parts) total.merge(p);
  const auto pm = finish_power_mean(total, q);
  Estimate e;
  e.value = pm.value;
  e.stderr_ = pm.stderr_;
  e.n_samples = n_samples;
  e.seed = rng.key();
  e.method = "centroid_support_mc";
  e.dropped_zeros = pm.zeros;
  return e;
}

namespace {

Estimate moment_radius_impl(const LogConcaveMeasure& mu, double q, long n_samples,
                            const RngStream& rng) {
  if (q == 0.0 || q <= -mu.dim())
    throw QOutOfRange("moment_radius: q in (-n, inf) \\ {0} required");
  const int nb = par::batch_count(n_samples);
  std::vector<PowerSum> parts(nb);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(n_samples, nb, b, &lo, &hi);
    MeasureSampler s(mu, rng.derive(b));
    PowerSum ps;
    for (std::int64_t i = lo; i < hi; ++i)
      ps.add_log(q, safe_log_abs(s.next().norm()));
    parts[b] = ps;
  });
  PowerSum total;
  for (const auto& p : parts) total.merge(p);
  const auto pm = finish_power_mean(total, q);
  Estimate e;
  e.value = pm.value;
  e.stderr_ = pm.stderr_;
  e.n_samples = n_samples;
  e.seed = rng.key();
  e.method = "moment_radius_mc";
  e.dropped_zeros = pm.zeros;
  return e;
}

}  // namespace

Estimate moment_radius(const LogConcaveMeasure& mu, double q, long n_samples,
                       const RngStream& rng) {
  return moment_radius_impl(mu, q, n_samples, rng);
}

Estimate moment_radius(const ConvexBody& body, double q, long n_samples,
                       const RngStream& rng) {
  LogConcaveMeasure uni(MeasureDesc::uniform_on(body.descriptor()));
  return moment_radius_impl(uni, q, n_samples, rng);
}

Estimate mean_width(const ConvexBody& body, long n_dirs, const RngStream& rng) {
  if (!body.has_support()) throw OracleUnavailable("mean_width: no support route");
  const int n = body.dim();
  const int nb = par::batch_count(n_dirs);
  std::vector<double> sums(nb, 0.0), sumsqs(nb, 0.0);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(n_dirs, nb, b, &lo, &hi);
    RngStream s = rng.derive(b);
    double sum = 0, sumsq = 0;
    for (std::int64_t i = lo; i < hi; ++i) {
      const double h = body.support(sample_sphere(n, s));
      sum += h;
      sumsq += h * h;
    }
    sums[b] = sum;
    sumsqs[b] = sumsq;
  });
  const double sum = std::accumulate(sums.begin(), sums.end(), 0.0);
  const double sumsq = std::accumulate(sumsqs.begin(), sumsqs.end(), 0.0);
  const double mean = sum / n_dirs;
  const double var = std::max(0.0, sumsq / n_dirs - mean * mean);
  Estimate e;
  e.value = mean;
  e.stderr_ = std::sqrt(var / n_dirs);
  e.n_samples = n_dirs;
  e.seed = rng.key();
  e.method = "mean_width_mc";
  return e;
}

Estimate centroid_mean_width(const LogConcaveMeasure& mu, double q, long n_dirs,
                             long n_samples, const RngStream& rng) {
  const int n = mu.dim();
  std::vector<double> h(n_dirs);
  const int nd = static_cast<int>(n_dirs);
  par::for_each_index(nd, [&](int j) {
    RngStream sj = rng.derive(j);
    const Vec theta = sample_sphere(n, sj);
    h[j] = centroid_support(mu, q, theta, n_samples, sj.derive(1)).value;
  });
  double sum = 0, sumsq = 0;
  for (double v : h) {
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n_dirs;
  const double var = std::max(0.0, sumsq / n_dirs - mean * mean);
  Estimate e;
  e.value = mean;
  e.stderr_ = std::sqrt(var / n_dirs);
  e.n_samples = n_dirs * n_samples;
  e.seed = rng.key();
  e.method = "centroid_mean_width_mc";
  return e;
}

Estimate vrad_section(const ConvexBody& body, const Subspace& F, long n_dirs,
                      const RngStream& rng) {
  const ConvexBody sec = section_body(body, F);
  const int m = F.dim();
  std::vector<double> logterm(n_dirs);  // -m log gauge per direction
  const int nb = par::batch_count(n_dirs);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(n_dirs, nb, b, &lo, &hi);
    RngStream s = rng.derive(b);
    for (std::int64_t i = lo; i < hi; ++i)
      logterm[i] = -m * safe_log_abs(sec.gauge(sample_sphere(m, s)));
  });
  PowerSum ps;
  for (double l : logterm) ps.add_log(1.0, l);
  const long denom = ps.n;
  const double log_m = ps.A + std::log(ps.S1) - std::log(static_cast<double>(denom));
  const double value = std::exp(log_m / m);
  const double ratio = ps.S2 * denom / (ps.S1 * ps.S1);
  const double rel = std::sqrt(std::max(0.0, ratio - 1.0) / denom);

  // heavy-tail warning: does the top 1% of terms carry over half the sum?
  std::vector<double> sorted(logterm);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const long top = std::max<long>(1, n_dirs / 100);
  PowerSum ps_top;
  for (long i = 0; i < top; ++i) ps_top.add_log(1.0, sorted[i]);
  const double share =
      std::exp(ps_top.A + std::log(ps_top.S1) - (ps.A + std::log(ps.S1)));

  Estimate e;
  e.value = value;
  e.stderr_ = value * rel / (m * std::sqrt(static_cast<double>(denom)));
  e.n_samples = n_dirs;
  e.seed = rng.key();
  e.method = "vrad_section_mc";
  e.heavy_tail_flag = share > 0.5;
  return e;
}

// ---------------------------------------------------------------------------
// psi_alpha

double psi_alpha_root_fixed(const Eigen::ArrayXd& abs_z, double alpha,
                            const Eigen::ArrayXd* weights) {
  const auto G = [&](double t) {
    Eigen::ArrayXd w = (abs_z / t);
    if (alpha == 2.0)
      w = w.square();
    else
      w = w.pow(alpha);
    w = w.min(700.0).exp();
    if (weights) w *= *weights;
    return w.mean();
  };
  const double zmax = abs_z.maxCoeff();
  if (zmax <= 0) throw NoRoot("psi_alpha: all inner products are zero");
  double t = zmax;
  double lo, hi;
  if (G(t) >= 2.0) {
    lo = t;
    hi = t;
    int guard = 0;
    while (G(hi) > 2.0) {
      hi *= 2.0;
      if (++guard > 200) break;
    }
  } else {
    hi = t;
    lo = t;
    int guard = 0;
    while (G(lo) < 2.0) {
      lo *= 0.5;
      if (++guard > 600) throw NoRoot("psi_alpha: no root found while shrinking");
    }
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-6 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (G(mid) > 2.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Estimate psi_alpha_norm(const LogConcaveMeasure& mu, const Vec& theta, double alpha,
                        long n_samples, const RngStream& rng) {
  if (alpha < 1.0 || alpha > 2.0)
    throw QOutOfRange("psi_alpha_norm: alpha in [1,2] required");
  require_dim(theta, mu.dim(), "psi_alpha_norm");
  // fixed sample: the root search sees a deterministic, monotone G
  Eigen::ArrayXd z(n_samples);
  const int nb = par::batch_count(n_samples);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(n_samples, nb, b, &lo, &hi);
    MeasureSampler s(mu, rng.derive(b));
    for (std::int64_t i = lo; i < hi; ++i) z[i] = std::abs(theta.dot(s.next()));
  });
  const double root = psi_alpha_root_fixed(z, alpha, nullptr);

  // bootstrap stderr on 20 resamples of the fixed sample
  const int kBoot = 20;
  std::vector<double> boot(kBoot);
  par::for_each_index(kBoot, [&](int b) {
    RngStream s = rng.derive(1000 + b);
    Eigen::ArrayXd w = Eigen::ArrayXd::Zero(n_samples);
    for (long i = 0; i < n_samples; ++i)
      w[static_cast<long>(s.uniform01() * n_samples)] += 1.0;
    boot[b] = psi_alpha_root_fixed(z, alpha, &w);
  });
  double bm = 0, bv = 0;
  for (double v : boot) bm += v;
  bm /= kBoot;
  for (double v : boot) bv += (v - bm) * (v - bm);

  const double m2 = std::sqrt(z.square().mean());
  Estimate e;
  e.value = root;
  e.stderr_ = std::sqrt(bv / (kBoot - 1));
  e.n_samples = n_samples;
  e.seed = rng.key();
  e.method = "psi_alpha_bisect";
  // Measures with genuinely sub-Gaussian tails keep the root near m2 for any
  // N; for psi_1-but-not-psi_2 tails the sample root grows like m2*sqrt(log N).
  e.divergence_flag = root > 0.6 * m2 * std::sqrt(std::log(static_cast<double>(n_samples)));
  return e;
}

Estimate psi2_support(const LogConcaveMeasure& mu, const Vec& y, long n_samples,
                      const RngStream& rng) {
  require_dim(y, mu.dim(), "psi2_support");
  const int n = mu.dim();
  // one fixed sample reused across the dyadic grid
  std::vector<double> logz(n_samples);
  const int nb = par::batch_count(n_samples);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(n_samples, nb, b, &lo, &hi);
    MeasureSampler s(mu, rng.derive(b));
    for (std::int64_t i = lo; i < hi; ++i) logz[i] = safe_log_abs(y.dot(s.next()));
  });
  int qmax = 2;
  while (qmax < n) qmax *= 2;
  Estimate best;
  best.value = -1;
  long zeros = 0;
  for (int q = 2; q <= qmax; q *= 2) {
    PowerSum ps;
    for (double l : logz) ps.add_log(q, l);
    const auto pm = finish_power_mean(ps, q);
    zeros = pm.zeros;
    const double v = pm.value / std::sqrt(static_cast<double>(q));
    if (v > best.value) {
      best.value = v;
      best.stderr_ = pm.stderr_ / std::sqrt(static_cast<double>(q));
    }
  }
  best.n_samples = n_samples;
  best.seed = rng.key();
  best.method = "psi2_dyadic_max";
  best.dropped_zeros = zeros;
  return best;
}

}  // namespace isoscope
