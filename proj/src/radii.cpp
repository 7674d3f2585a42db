#include "isoscope/radii.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#include "isoscope/centroid.hpp"
#include "isoscope/parallel.hpp"

namespace isoscope {

namespace {

Vec tangent_project(const Vec& g, const Vec& x) { return g - g.dot(x) * x; }

Vec retract(const Vec& x) { return x / x.norm(); }

struct Refined {
  double value;
  Vec x;
  long evals = 0;
};

// Finite-difference gradient in the tangent space (central differences with
// renormalization retraction), for objectives without an ascent oracle.
Vec fd_gradient(const SphereObjective& obj, const Vec& x, long* evals) {
  const double h = 1e-5;
  const int d = static_cast<int>(x.size());
  Vec g(d);
  for (int j = 0; j < d; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (obj.value(retract(xp)) - obj.value(retract(xm))) / (2 * h);
  }
  *evals += 2 * d;
  return g;
}

Refined refine(const SphereObjective& obj, Vec x, double fx,
               const MaximizerConfig& cfg) {
  long evals = 0;
  Vec best_x = x;
  double best_f = fx;

  // Phase A: non-monotone projected (sub)gradient ascent with c/sqrt(t)
  // steps, tracking the best iterate. Handles polytopal kinks where a line
  // search would collapse.
  for (int t = 0; t < cfg.refine_steps; ++t) {
    Vec d = obj.ascent ? obj.ascent(x) : fd_gradient(obj, x, &evals);
    d = tangent_project(d, x);
    const double nd = d.norm();
    if (!(nd > 1e-14)) break;
    const double eta = 0.3 / std::sqrt(t + 1.0);
    x = retract(x + (eta / nd) * d);
    const double f = obj.value(x);
    ++evals;
    if (!std::isfinite(f)) throw ObjectiveNonFinite("sphere_maximize: non-finite objective");
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
  }

  // Phase B: monotone line-search polish from the best point (smooth case
  // converges to step_tolerance; kinked case stalls harmlessly).
  x = best_x;
  double fxx = best_f;
  double step = 0.05;
  for (int t = 0; t < cfg.refine_steps && step >= cfg.step_tolerance; ++t) {
    Vec d = obj.ascent ? obj.ascent(x) : fd_gradient(obj, x, &evals);
    d = tangent_project(d, x);
    const double nd = d.norm();
    if (!(nd > 1e-14)) break;
    bool improved = false;
    while (step >= cfg.step_tolerance) {
      const Vec xn = retract(x + (step / nd) * d);
      const double fn = obj.value(xn);
      ++evals;
      if (fn > fxx) {
        x = xn;
        fxx = fn;
        step = std::min(step * 2.0, 0.5);
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  if (fxx > best_f) {
    best_f = fxx;
    best_x = x;
  }
  return {best_f, best_x, evals};
}

}  // namespace

RadiusResult sphere_maximize(const SphereObjective& obj, int dim,
                             const MaximizerConfig& config, const RngStream& rng) {
  const int nc = std::max(1, config.n_coarse);
  std::vector<double> vals(nc);
  std::vector<Vec> dirs(nc);
  std::atomic<long> evals{0};
  const int nb = par::batch_count(nc);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(nc, nb, b, &lo, &hi);
    RngStream s = rng.derive(b);
    long local = 0;
    for (std::int64_t i = lo; i < hi; ++i) {
      dirs[i] = sample_sphere(dim, s);
      vals[i] = obj.value(dirs[i]);
      ++local;
      if (!std::isfinite(vals[i]))
        throw ObjectiveNonFinite("sphere_maximize: non-finite objective");
    }
    evals += local;
  });

  std::vector<int> order(nc);
  for (int i = 0; i < nc; ++i) order[i] = i;
  const int ns = std::min(std::max(1, config.n_starts), nc);
  std::partial_sort(order.begin(), order.begin() + ns, order.end(),
                    [&](int a, int b) {
                      if (vals[a] != vals[b]) return vals[a] > vals[b];
                      return a < b;  // deterministic tie-break: first found
                    });

  std::vector<Refined> refined(ns);
  par::for_each_index(ns, [&](int s) {
    refined[s] = refine(obj, dirs[order[s]], vals[order[s]], config);
  });

  int best = 0;
  for (int s = 1; s < ns; ++s)
    if (refined[s].value > refined[best].value) best = s;

  RadiusResult r;
  r.argmax_direction = refined[best].x;
  r.value = obj.value(r.argmax_direction);  // re-evaluated, exact at argmax
  for (const auto& rr : refined) evals += rr.evals;
  r.n_evals = evals.load() + 1;
  return r;
}

RadiusResult section_radius(const ConvexBody& body, const Subspace& F,
                            const MaximizerConfig& config, const RngStream& rng) {
  const ConvexBody sec = section_body(body, F);
  SphereObjective obj;
  obj.value = [sec](const Vec& th) { return 1.0 / sec.gauge(th); };
  obj.ascent = [sec](const Vec& th) -> Vec { return -sec.gauge_subgradient(th); };
  return sphere_maximize(obj, F.dim(), config, rng);
}

RadiusResult projection_radius(const ConvexBody& body, const Subspace& F,
                               const MaximizerConfig& config, const RngStream& rng) {
  const ConvexBody proj = projection_body(body, F);
  SphereObjective obj;
  obj.value = [proj](const Vec& th) { return proj.support(th); };
  obj.ascent = [proj](const Vec& th) -> Vec { return proj.support_point(th); };
  return sphere_maximize(obj, F.dim(), config, rng);
}

RadiusResult gelfand_upper(const ConvexBody& body, int t, int n_subspaces,
                           const MaximizerConfig& config, const RngStream& rng) {
  const int n = body.dim();
  if (t < 0 || t > n - 1) throw QOutOfRange("gelfand_upper: 0 <= t <= n-1 required");
  if (t == 0) {
    SphereObjective obj;
    obj.value = [body](const Vec& th) { return 1.0 / body.gauge(th); };
    obj.ascent = [body](const Vec& th) -> Vec { return -body.gauge_subgradient(th); };
    return sphere_maximize(obj, n, config, rng);
  }
  std::vector<RadiusResult> results(n_subspaces);
  par::for_each_index(n_subspaces, [&](int j) {
    RngStream s = rng.derive(j);
    const Subspace F = sample_grassmannian(n, n - t, s);
    results[j] = section_radius(body, F, config, s.derive(1));
  });
  int best = 0;
  for (int j = 1; j < n_subspaces; ++j)
    if (results[j].value < results[best].value) best = j;
  return results[best];
}

RadiusResult rotation_intersection_radius(const ConvexBody& body, const Mat& U,
                                          const MaximizerConfig& config,
                                          const RngStream& rng) {
  const int n = body.dim();
  if (U.rows() != n || U.cols() != n)
    throw DimensionMismatch("rotation_intersection_radius: U must be n x n");
  SphereObjective obj;
  obj.value = [body, U](const Vec& th) {
    return std::min(1.0 / body.gauge(th), 1.0 / body.gauge(U.transpose() * th));
  };
  obj.ascent = [body, U](const Vec& th) -> Vec {
    const double g1 = body.gauge(th);
    const double g2 = body.gauge(U.transpose() * th);
    if (g1 >= g2) return -body.gauge_subgradient(th);
    return -(U * body.gauge_subgradient(U.transpose() * th));
  };
  return sphere_maximize(obj, n, config, rng);
}

RadiusResult polar_centroid_section_radius(const LogConcaveMeasure& mu, double q,
                                           const Subspace& F, long n_samples,
                                           const MaximizerConfig& config,
                                           const RngStream& rng) {
  // common random numbers: one fixed sample across every direction
  const auto h = std::make_shared<CentroidSupportFn>(mu, q, n_samples, rng.derive(0));
  const Mat frame = F.frame();
  SphereObjective obj;
  obj.value = [h, frame](const Vec& th) { return 1.0 / (*h)(frame * th); };
  obj.ascent = [h, frame](const Vec& th) -> Vec {
    return -(frame.transpose() * h->gradient(frame * th));
  };
  return sphere_maximize(obj, F.dim(), config, rng.derive(1));
}

}  // namespace isoscope
