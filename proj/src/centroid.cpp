#include "isoscope/centroid.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "isoscope/parallel.hpp"

namespace isoscope {

CentroidSupportFn::CentroidSupportFn(const LogConcaveMeasure& mu, double q,
                                     long n_samples, const RngStream& rng)
    : dim_(mu.dim()), q_(q) {
  if (q < 1.0) throw QOutOfRange("CentroidSupportFn: q >= 1 required");
  Vec e1 = Vec::Zero(dim_);
  e1[0] = 1.0;
  if (auto m = mu.moment_oracle(q, e1)) {
    exact_ = true;
    cq_ = *m;
    return;
  }
  X_ = sample_matrix(mu, static_cast<int>(n_samples), rng);
}

double CentroidSupportFn::operator()(const Vec& u) const {
  require_dim(u, dim_, "CentroidSupportFn");
  if (exact_) return cq_ * u.norm();
  const Eigen::ArrayXd a = (X_ * u).array().abs();
  const double M = a.maxCoeff();
  if (!(M > 0)) return 0.0;
  const double mean = (a / M).pow(q_).mean();
  return M * std::pow(mean, 1.0 / q_);
}

Vec CentroidSupportFn::gradient(const Vec& u) const {
  require_dim(u, dim_, "CentroidSupportFn::gradient");
  if (exact_) {
    const double nu = u.norm();
    return nu > 0 ? Vec(cq_ * u / nu) : Vec(Vec::Zero(dim_));
  }
  const Eigen::ArrayXd z = (X_ * u).array();
  const Eigen::ArrayXd a = z.abs();
  const double M = a.maxCoeff();
  if (!(M > 0)) throw AllZeroInnerProducts("CentroidSupportFn: degenerate direction");
  const Eigen::ArrayXd r = a / M;
  const double m_tilde = r.pow(q_).mean();
  const Eigen::ArrayXd coef = r.pow(q_ - 1.0) * z.sign() / static_cast<double>(X_.rows());
  return std::pow(m_tilde, 1.0 / q_ - 1.0) * (X_.transpose() * coef.matrix());
}

CentroidSupportFn CentroidSupportFn::marginal(const Subspace& F) const {
  if (F.ambient_dim() != dim_)
    throw DimensionMismatch("CentroidSupportFn::marginal: frame mismatch");
  CentroidSupportFn out;
  out.dim_ = F.dim();
  out.q_ = q_;
  out.exact_ = exact_;
  out.cq_ = cq_;  // isotropic marginals keep the same closed form
  if (!exact_) out.X_ = X_ * F.frame();
  return out;
}

// ---------------------------------------------------------------------------
// gauge of Z_q by projected ascent on phi(u) = <theta,u>/h(u)

CentroidGauge centroid_gauge(const CentroidSupportFn& h, const Vec& theta,
                             const Vec* warm_start, int max_iters) {
  if (h.exact()) {
    CentroidGauge g;
    g.value = theta.squaredNorm() / h(theta);  // = ||theta|| / c_q
    g.maximizer = theta / theta.norm();
    return g;
  }
  Vec u = warm_start ? *warm_start : Vec(theta / theta.norm());
  if (u.norm() < 1e-300) u = theta / theta.norm();
  u /= u.norm();
  double hu = h(u);
  if (!(hu > 0)) throw AllZeroInnerProducts("centroid_gauge: h vanished");
  double phi = theta.dot(u) / hu;
  double step = 0.3;
  for (int it = 0; it < max_iters; ++it) {
    const Vec gh = h.gradient(u);
    Vec g = (theta * hu - theta.dot(u) * gh) / (hu * hu);
    g -= g.dot(u) * u;
    const double ng = g.norm();
    if (ng < 1e-12) break;
    bool ok = false;
    while (step > 1e-10) {
      Vec un = u + (step / ng) * g;
      un /= un.norm();
      const double hn = h(un);
      const double phin = theta.dot(un) / hn;
      if (phin > phi) {
        u = un;
        hu = hn;
        phi = phin;
        step = std::min(step * 1.8, 1.0);
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) break;
  }
  CentroidGauge g;
  g.value = phi;
  g.maximizer = u;
  return g;
}

namespace {

struct GaugeMinResult {
  double gauge;
  Vec theta;  // F-coordinates
};

// min over theta in S_F of gauge_{Z_q}(frame * theta) by subgradient descent
// with warm-started inner gauge solves.
GaugeMinResult minimize_gauge_over_subspace(const CentroidSupportFn& h,
                                            const Mat& frame,
                                            const MaximizerConfig& config,
                                            const RngStream& rng) {
  const int m = static_cast<int>(frame.cols());
  const int nc = std::max(8, std::min(config.n_coarse, 512));
  std::vector<double> vals(nc);
  std::vector<Vec> thetas(nc), warms(nc);
  const int nb = par::batch_count(nc);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(nc, nb, b, &lo, &hi);
    RngStream s = rng.derive(b);
    const Vec* warm = nullptr;
    for (std::int64_t i = lo; i < hi; ++i) {
      thetas[i] = sample_sphere(m, s);
      const auto g = centroid_gauge(h, frame * thetas[i], warm, 8);
      vals[i] = g.value;
      warms[i] = g.maximizer;
      warm = &warms[i];
    }
  });

  std::vector<int> order(nc);
  for (int i = 0; i < nc; ++i) order[i] = i;
  const int ns = std::min(std::max(1, config.n_starts), nc);
  std::partial_sort(order.begin(), order.begin() + ns, order.end(),
                    [&](int a, int b) {
                      if (vals[a] != vals[b]) return vals[a] < vals[b];
                      return a < b;
                    });

  std::vector<GaugeMinResult> refined(ns);
  par::for_each_index(ns, [&](int sidx) {
    Vec th = thetas[order[sidx]];
    auto g = centroid_gauge(h, frame * th, &warms[order[sidx]], 40);
    double best = g.value;
    Vec best_th = th;
    for (int t = 0; t < config.refine_steps; ++t) {
      // subgradient of theta -> gauge(frame theta) is frame^T u* / h(u*)
      Vec d = frame.transpose() * g.maximizer / h(g.maximizer);
      d -= d.dot(th) * th;
      const double nd = d.norm();
      if (nd < 1e-13) break;
      const double eta = 0.25 / std::sqrt(t + 1.0);
      th = th - (eta / nd) * d;
      th /= th.norm();
      g = centroid_gauge(h, frame * th, &g.maximizer, 6);
      if (g.value < best) {
        best = g.value;
        best_th = th;
      }
    }
    // thorough re-solve at the winner (cold + warm, keep the larger value:
    // the inner problem is a max, so larger = more converged)
    auto gw = centroid_gauge(h, frame * best_th, &g.maximizer, 80);
    auto gc = centroid_gauge(h, frame * best_th, nullptr, 80);
    refined[sidx] = {std::max(gw.value, gc.value), best_th};
  });

  int best = 0;
  for (int s = 1; s < ns; ++s)
    if (refined[s].gauge < refined[best].gauge) best = s;
  return refined[best];
}

}  // namespace

RadiusResult centroid_section_radius(const LogConcaveMeasure& mu, double q,
                                     const Subspace& F, long n_samples,
                                     const MaximizerConfig& config,
                                     const RngStream& rng) {
  CentroidSupportFn h(mu, q, n_samples, rng.derive(0));
  if (h.exact()) {
    // Z_q is a closed-form ball: every section has radius c_q
    RadiusResult r;
    Vec e1 = Vec::Zero(F.dim());
    e1[0] = 1.0;
    Vec u = F.frame() * e1;
    r.value = h(u) / u.norm();
    r.argmax_direction = e1;
    r.n_evals = 1;
    return r;
  }
  const auto best = minimize_gauge_over_subspace(h, F.frame(), config, rng.derive(1));
  RadiusResult r;
  r.value = 1.0 / best.gauge;
  r.argmax_direction = best.theta;
  r.n_evals = 0;
  return r;
}

RadiusResult centroid_rotation_radius(const LogConcaveMeasure& mu, double q,
                                      const Mat& U, long n_samples,
                                      const MaximizerConfig& config,
                                      const RngStream& rng) {
  CentroidSupportFn h(mu, q, n_samples, rng.derive(0));
  const int n = mu.dim();
  if (U.rows() != n || U.cols() != n)
    throw DimensionMismatch("centroid_rotation_radius: U must be n x n");
  if (h.exact()) {
    RadiusResult r;
    Vec e1 = Vec::Zero(n);
    e1[0] = 1.0;
    r.value = h(e1);
    r.argmax_direction = e1;
    r.n_evals = 1;
    return r;
  }
  // minimize gmax(theta) = max(gauge(theta), gauge(U^T theta))
  const RngStream rs = rng.derive(1);
  const int nc = std::max(8, std::min(config.n_coarse, 256));
  std::vector<double> vals(nc);
  std::vector<Vec> thetas(nc);
  const int nb = par::batch_count(nc);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(nc, nb, b, &lo, &hi);
    RngStream s = rs.derive(b);
    for (std::int64_t i = lo; i < hi; ++i) {
      thetas[i] = sample_sphere(n, s);
      const auto g1 = centroid_gauge(h, thetas[i], nullptr, 8);
      const auto g2 = centroid_gauge(h, U.transpose() * thetas[i], nullptr, 8);
      vals[i] = std::max(g1.value, g2.value);
    }
  });
  std::vector<int> order(nc);
  for (int i = 0; i < nc; ++i) order[i] = i;
  const int ns = std::min(std::max(1, config.n_starts), nc);
  std::partial_sort(order.begin(), order.begin() + ns, order.end(),
                    [&](int a, int b) {
                      if (vals[a] != vals[b]) return vals[a] < vals[b];
                      return a < b;
                    });
  std::vector<GaugeMinResult> refined(ns);
  par::for_each_index(ns, [&](int sidx) {
    Vec th = thetas[order[sidx]];
    auto g1 = centroid_gauge(h, th, nullptr, 40);
    auto g2 = centroid_gauge(h, U.transpose() * th, nullptr, 40);
    double best = std::max(g1.value, g2.value);
    Vec best_th = th;
    for (int t = 0; t < config.refine_steps; ++t) {
      Vec d;
      if (g1.value >= g2.value)
        d = g1.maximizer / h(g1.maximizer);
      else
        d = U * (g2.maximizer / h(g2.maximizer));
      d -= d.dot(th) * th;
      const double nd = d.norm();
      if (nd < 1e-13) break;
      const double eta = 0.25 / std::sqrt(t + 1.0);
      th = th - (eta / nd) * d;
      th /= th.norm();
      g1 = centroid_gauge(h, th, &g1.maximizer, 6);
      g2 = centroid_gauge(h, U.transpose() * th, &g2.maximizer, 6);
      const double v = std::max(g1.value, g2.value);
      if (v < best) {
        best = v;
        best_th = th;
      }
    }
    auto f1 = centroid_gauge(h, best_th, nullptr, 80);
    auto f2 = centroid_gauge(h, U.transpose() * best_th, nullptr, 80);
    refined[sidx] = {std::max(f1.value, f2.value), best_th};
  });
  int best = 0;
  for (int s = 1; s < ns; ++s)
    if (refined[s].gauge < refined[best].gauge) best = s;
  RadiusResult r;
  r.value = 1.0 / refined[best].gauge;
  r.argmax_direction = refined[best].theta;
  r.n_evals = 0;
  return r;
}

RadiusResult centroid_projection_radius(const LogConcaveMeasure& mu, double q,
                                        const Subspace& F, long n_samples,
                                        const MaximizerConfig& config,
                                        const RngStream& rng) {
  const auto h = std::make_shared<CentroidSupportFn>(mu, q, n_samples, rng.derive(0));
  const Mat frame = F.frame();
  SphereObjective obj;
  obj.value = [h, frame](const Vec& th) { return (*h)(frame * th); };
  obj.ascent = [h, frame](const Vec& th) -> Vec {
    return frame.transpose() * h->gradient(frame * th);
  };
  return sphere_maximize(obj, F.dim(), config, rng.derive(1));
}

RadiusResult centroid_radius(const LogConcaveMeasure& mu, double q, long n_samples,
                             const MaximizerConfig& config, const RngStream& rng) {
  const auto h = std::make_shared<CentroidSupportFn>(mu, q, n_samples, rng.derive(0));
  SphereObjective obj;
  obj.value = [h](const Vec& th) { return (*h)(th); };
  obj.ascent = [h](const Vec& th) -> Vec { return h->gradient(th); };
  return sphere_maximize(obj, mu.dim(), config, rng.derive(1));
}

double vrad_centroid_projection(const CentroidSupportFn& h_marginal, long n_dirs,
                                const RngStream& rng) {
  const int t = h_marginal.dim();
  std::vector<double> logrho(n_dirs);
  const int nb = par::batch_count(n_dirs);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(n_dirs, nb, b, &lo, &hi);
    RngStream s = rng.derive(b);
    Vec warm;
    for (std::int64_t i = lo; i < hi; ++i) {
      const Vec th = sample_sphere(t, s);
      const auto g = centroid_gauge(h_marginal, th, warm.size() ? &warm : nullptr, 30);
      warm = g.maximizer;
      logrho[i] = -std::log(g.value);
    }
  });
  // vrad = (mean rho^t)^{1/t}, log-domain
  double A = -std::numeric_limits<double>::infinity();
  for (double l : logrho) A = std::max(A, t * l);
  double S = 0;
  for (double l : logrho) S += std::exp(t * l - A);
  return std::exp((A + std::log(S / n_dirs)) / t);
}

}  // namespace isoscope
