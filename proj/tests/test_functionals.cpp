#include <doctest.h>

#include <cmath>

#include "isoscope/functionals.hpp"
#include "isoscope/isotropy.hpp"
#include "test_util.hpp"

using namespace isoscope;

TEST_CASE("Z_2 of any isotropic measure is the euclidean ball") {
  RngStream rng(201);
  std::vector<LogConcaveMeasure> mus = {
      LogConcaveMeasure(MeasureDesc::gaussian(10)),
      isotropic_body_measure(BodyDesc::cube(10)),
      LogConcaveMeasure(MeasureDesc::laplace(10))};
  for (const auto& mu : mus) {
    for (int t = 0; t < 5; ++t) {
      const Vec y = sample_sphere(10, rng);
      const Estimate e = centroid_support(mu, 2.0, y, 40000, rng.derive(t));
      CHECK(std::abs(e.value - 1.0) < 3 * e.stderr_ + 1e-3);
    }
  }
}

TEST_CASE("gaussian centroid support matches c_q") {
  LogConcaveMeasure g(MeasureDesc::gaussian(6));
  RngStream rng(202);
  const Vec y = sample_sphere(6, rng);
  for (double q : {1.0, 2.0, 4.0}) {
    const Estimate e = centroid_support(g, q, y, 100000, rng.derive((int)q));
    CHECK(e.value == doctest::Approx(testutil::gaussian_cq(q)).epsilon(0.02));
  }
}

TEST_CASE("laplace axis moments: (1/sqrt2) Gamma(q+1)^{1/q}") {
  LogConcaveMeasure lap(MeasureDesc::laplace(4));
  Vec e1 = Vec::Zero(4);
  e1[0] = 1;
  const Estimate e = centroid_support(lap, 4.0, e1, 200000, RngStream(203));
  const double want = std::pow(24.0, 0.25) / std::sqrt(2.0);  // ~1.5651
  CHECK(e.value == doctest::Approx(want).epsilon(0.03));
}

TEST_CASE("holder monotonicity and the Z_q growth cap") {
  RngStream rng(204);
  LogConcaveMeasure mu = isotropic_body_measure(BodyDesc::cube(8));
  const Vec y = sample_sphere(8, rng);
  double prev = 0;
  std::vector<double> qs = {1, 2, 4, 8};
  std::vector<double> vals;
  for (double q : qs) {
    const Estimate e = centroid_support(mu, q, y, 50000, rng.derive((int)q));
    CHECK(e.value >= prev - 3 * e.stderr_);
    vals.push_back(e.value);
    prev = e.value;
  }
  for (std::size_t i = 0; i < qs.size(); ++i)
    for (std::size_t j = i + 1; j < qs.size(); ++j)
      CHECK(vals[j] / vals[i] <= 4.0 * qs[j] / qs[i]);
}

TEST_CASE("projection identity: support of marginal equals lifted support") {
  const int n = 12, m = 4;
  RngStream rng(205);
  LogConcaveMeasure mu = isotropic_body_measure(BodyDesc::cube(n));
  for (int pair = 0; pair < 3; ++pair) {
    const Subspace F = sample_grassmannian(n, m, rng);
    LogConcaveMeasure mu_m = marginal(mu, F);
    const Vec u = sample_sphere(m, rng);
    for (double q : {1.0, 2.0, 4.0}) {
      const Estimate a =
          centroid_support(mu, q, F.lift(u), 80000, rng.derive(10 * pair + (int)q));
      const Estimate b =
          centroid_support(mu_m, q, u, 80000, rng.derive(100 + 10 * pair + (int)q));
      const double sigma = std::hypot(a.stderr_, b.stderr_);
      CHECK(std::abs(a.value - b.value) <= 3 * sigma + 1e-4);
    }
  }
}

TEST_CASE("I_q closed forms and monotonicity") {
  // volume-one ball: I_q = r_n (n/(n+q))^{1/q}
  const int n = 8;
  const double r8 = std::exp(-unit_ball_log_volume(n) / n);
  ConvexBody V8(BodyDesc::volume_one_ball(n));
  const Estimate e2 = moment_radius(V8, 2.0, 100000, RngStream(206));
  CHECK(e2.value == doctest::Approx(r8 * std::sqrt(8.0 / 10.0)).epsilon(0.01));

  // isotropic cube at n=12: I_2 = sqrt(n) L = 1
  ConvexBody Q12(BodyDesc::cube(12));
  const Estimate ei = moment_radius(Q12, 2.0, 100000, RngStream(207));
  CHECK(ei.value == doctest::Approx(1.0).epsilon(0.01));

  // I_{-2} <= I_2 <= I_4 on reference bodies
  for (const auto& d :
       {BodyDesc::cube(6), BodyDesc::volume_one_ball(6), BodyDesc::simplex(6)}) {
    ConvexBody K(d);
    const Estimate a = moment_radius(K, -2.0, 60000, RngStream(208));
    const Estimate b = moment_radius(K, 2.0, 60000, RngStream(209));
    const Estimate c = moment_radius(K, 4.0, 60000, RngStream(210));
    CHECK(a.value <= b.value + 3 * std::hypot(a.stderr_, b.stderr_));
    CHECK(b.value <= c.value + 3 * std::hypot(b.stderr_, c.stderr_));
  }

  // Borell: I_q <= c q I_2 with c = 4 comfortable
  ConvexBody Q6(BodyDesc::cube(6));
  const double i2 = moment_radius(Q6, 2.0, 60000, RngStream(211)).value;
  for (double q : {2.0, 4.0, 8.0, 16.0}) {
    const double iq = moment_radius(Q6, q, 60000, RngStream(212)).value;
    CHECK(iq / (q * i2) <= 4.0);
  }

  CHECK_THROWS_AS((void)moment_radius(Q6, 0.0, 1000, RngStream(213)), QOutOfRange);
  CHECK_THROWS_AS((void)moment_radius(Q6, -6.0, 1000, RngStream(214)), QOutOfRange);
}

TEST_CASE("mean width: ball exact, cube matches the beta integral") {
  ConvexBody B(BodyDesc::ball(8, 1.0));
  const Estimate eb = mean_width(B, 10000, RngStream(215));
  CHECK(eb.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eb.stderr_ < 1e-12);

  // w(Q_n) = (n/2) E|theta_1|, E|theta_1| = Gamma(n/2)/(sqrt(pi) Gamma((n+1)/2))
  const int n = 16;
  const double e_abs =
      std::exp(std::lgamma(n / 2.0) - 0.5 * std::log(M_PI) - std::lgamma((n + 1) / 2.0));
  const double want = 0.5 * n * e_abs;  // ~1.6209
  ConvexBody Q(BodyDesc::cube(n));
  const Estimate eq = mean_width(Q, 200000, RngStream(216));
  CHECK(eq.value == doctest::Approx(want).epsilon(0.02));

  // polar cube width: two independent estimates agree within 3 sigma
  ConvexBody Qp(BodyDesc::polar(BodyDesc::cube(8)));
  const Estimate p1 = mean_width(Qp, 100000, RngStream(217));
  const Estimate p2 = mean_width(Qp, 100000, RngStream(218));
  CHECK(std::abs(p1.value - p2.value) <= 3 * std::hypot(p1.stderr_, p2.stderr_));
}

TEST_CASE("centroid mean width of the gaussian is c_q") {
  LogConcaveMeasure g(MeasureDesc::gaussian(8));
  for (double q : {1.0, 4.0}) {
    const Estimate e = centroid_mean_width(g, q, 64, 20000, RngStream(219));
    CHECK(e.value == doctest::Approx(testutil::gaussian_cq(q)).epsilon(0.02));
  }
}

TEST_CASE("vrad of sections") {
  RngStream rng(220);
  ConvexBody B(BodyDesc::ball(6, 1.4));
  const Subspace F = sample_grassmannian(6, 3, rng);
  const Estimate eb = vrad_section(B, F, 4000, RngStream(221));
  CHECK(eb.value == doctest::Approx(1.4).epsilon(1e-9));

  // unit square: vrad = 1/sqrt(pi)
  ConvexBody Q4(BodyDesc::cube(4));
  const Estimate eq = vrad_section(Q4, Subspace::axes(4, 2), 60000, RngStream(222));
  CHECK(eq.value == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(0.03));

  // 1-dim section: vrad = half-chord
  Mat f(2, 1);
  f << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  ConvexBody Q2(BodyDesc::cube(2));
  const Estimate e1 = vrad_section(Q2, Subspace(f), 100, RngStream(223));
  CHECK(e1.value == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("psi_alpha: gaussian and uniform closed forms, laplace divergence") {
  const int n = 8;
  Vec e1 = Vec::Zero(n);
  e1[0] = 1;

  LogConcaveMeasure g(MeasureDesc::gaussian(n));
  const Estimate eg = psi_alpha_norm(g, e1, 2.0, 100000, RngStream(224));
  CHECK(eg.value == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(0.03));
  CHECK_FALSE(eg.divergence_flag);

  // uniform cube, alpha=2: quadrature oracle for
  // integral_{-1/2}^{1/2} exp(s^2/t^2) ds = 2
  auto G = [](double t) {
    const int K = 20000;
    double acc = 0;
    for (int i = 0; i < K; ++i) {
      const double s = (i + 0.5) / (2.0 * K);  // midpoint rule on [0, 1/2]
      acc += std::exp(s * s / (t * t));
    }
    return 2.0 * acc / (2.0 * K);
  };
  double lo = 0.1, hi = 2.0;
  while (G(lo) < 2) lo *= 0.5;
  while (G(hi) > 2) hi *= 2;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (G(mid) > 2 ? lo : hi) = mid;
  }
  const double oracle_root = 0.5 * (lo + hi);
  CHECK(oracle_root == doctest::Approx(0.386354).epsilon(1e-4));  // frozen oracle value

  LogConcaveMeasure u(MeasureDesc::uniform_on(BodyDesc::cube(n)));
  const Estimate eu = psi_alpha_norm(u, e1, 2.0, 100000, RngStream(225));
  CHECK(eu.value == doctest::Approx(oracle_root).epsilon(0.03));
  CHECK_FALSE(eu.divergence_flag);

  // laplace, alpha=1 is finite: E exp(|z|/t) = 2 at t = 2b = sqrt(2)
  LogConcaveMeasure lap(MeasureDesc::laplace(n));
  const Estimate el1 = psi_alpha_norm(lap, e1, 1.0, 100000, RngStream(226));
  CHECK(el1.value == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  CHECK_FALSE(el1.divergence_flag);

  // laplace, alpha=2 has no finite psi_2 norm: flag fires
  const Estimate el2 = psi_alpha_norm(lap, e1, 2.0, 100000, RngStream(227));
  CHECK(el2.divergence_flag);
}

TEST_CASE("psi2 support: gaussian dyadic max and domination") {
  const int n = 8;
  RngStream rng(228);
  LogConcaveMeasure g(MeasureDesc::gaussian(n));
  const Vec y = sample_sphere(n, rng);
  const Estimate e = psi2_support(g, y, 100000, RngStream(229));
  CHECK(e.value > 0.65);
  CHECK(e.value < 0.75);

  // max dominates the q=2 term: psi2 >= cs(2)/sqrt(2) within noise
  LogConcaveMeasure mu = isotropic_body_measure(BodyDesc::cube(n));
  const Estimate p = psi2_support(mu, y, 60000, RngStream(230));
  const Estimate c2 = centroid_support(mu, 2.0, y, 60000, RngStream(231));
  CHECK(p.value >= c2.value / std::sqrt(2.0) - 3 * std::hypot(p.stderr_, c2.stderr_));

  // the two psi_2 definitions agree up to absolute constants
  for (int t = 0; t < 5; ++t) {
    const Vec th = sample_sphere(n, rng);
    const double a = psi_alpha_norm(mu, th, 2.0, 30000, rng.derive(t)).value;
    const double b = psi2_support(mu, th, 30000, rng.derive(100 + t)).value;
    CHECK(a / b >= 0.25);
    CHECK(a / b <= 4.0);
  }
}
