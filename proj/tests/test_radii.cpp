#include <doctest.h>

#include <cmath>

#include "isoscope/centroid.hpp"
#include "isoscope/radii.hpp"
#include "test_util.hpp"

using namespace isoscope;

namespace {
MaximizerConfig light() {
  MaximizerConfig c;
  c.n_coarse = 1024;
  c.n_starts = 16;
  c.refine_steps = 150;
  return c;
}
}  // namespace

TEST_CASE("sphere_maximize on simple objectives") {
  // constant objective
  SphereObjective c;
  c.value = [](const Vec&) { return 3.25; };
  const RadiusResult rc = sphere_maximize(c, 5, light(), RngStream(301));
  CHECK(rc.value == doctest::Approx(3.25));

  // |theta_1| on S^2, known maximizer +-e1; FD fallback path (no ascent oracle)
  SphereObjective a;
  a.value = [](const Vec& th) { return std::abs(th[0]); };
  const RadiusResult ra = sphere_maximize(a, 3, light(), RngStream(302));
  CHECK(ra.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(ra.argmax_direction[0]) == doctest::Approx(1.0).epsilon(1e-6));

  // cube radial on the full sphere: sqrt(3)/2 at the diagonal
  ConvexBody Q3(BodyDesc::cube(3));
  SphereObjective r;
  r.value = [&](const Vec& th) { return 1.0 / Q3.gauge(th); };
  r.ascent = [&](const Vec& th) -> Vec { return -Q3.gauge_subgradient(th); };
  const RadiusResult rr = sphere_maximize(r, 3, light(), RngStream(303));
  CHECK(rr.value == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(0.01));
}

TEST_CASE("section radii: axis cubes, balls, diagonal square") {
  ConvexBody Q8(BodyDesc::cube(8));
  for (int m : {2, 3, 5}) {
    const RadiusResult r =
        section_radius(Q8, Subspace::axes(8, m), light(), RngStream(304 + m));
    CHECK(r.value == doctest::Approx(0.5 * std::sqrt(double(m))).epsilon(0.01));
  }

  RngStream rng(310);
  ConvexBody B(BodyDesc::ball(7, 1.3));
  const Subspace F = sample_grassmannian(7, 4, rng);
  const RadiusResult rb = section_radius(B, F, light(), RngStream(311));
  CHECK(rb.value == doctest::Approx(1.3).epsilon(1e-6));

  ConvexBody Q2(BodyDesc::cube(2));
  Mat f(2, 1);
  f << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const RadiusResult rd = section_radius(Q2, Subspace(f), light(), RngStream(312));
  CHECK(rd.value == doctest::Approx(1 / std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("projection radii and the section/projection ordering") {
  ConvexBody B(BodyDesc::ball(6, 2.0));
  RngStream rng(313);
  const Subspace F = sample_grassmannian(6, 3, rng);
  CHECK(projection_radius(B, F, light(), RngStream(314)).value ==
        doctest::Approx(2.0).epsilon(1e-6));

  ConvexBody Q8(BodyDesc::cube(8));
  const RadiusResult rp =
      projection_radius(Q8, Subspace::axes(8, 4), light(), RngStream(315));
  CHECK(rp.value == doctest::Approx(1.0).epsilon(0.01));  // sqrt(4)/2

  // projection dominates section for the same subspace
  for (int t = 0; t < 5; ++t) {
    ConvexBody K(BodyDesc::lp_ball(6, 1.5, 1.0));
    const Subspace S = sample_grassmannian(6, 3, rng);
    const double sec = section_radius(K, S, light(), rng.derive(t)).value;
    const double proj = projection_radius(K, S, light(), rng.derive(100 + t)).value;
    CHECK(sec <= proj + 1e-9);
  }
}

TEST_CASE("lower-bound semantics: re-evaluation and analytic caps") {
  ConvexBody Q6(BodyDesc::cube(6));
  RngStream rng(316);
  const Subspace F = sample_grassmannian(6, 3, rng);
  const ConvexBody sec = section_body(Q6, F);
  const RadiusResult r = section_radius(Q6, F, light(), RngStream(317));
  CHECK(r.value == doctest::Approx(1.0 / sec.gauge(r.argmax_direction)).epsilon(1e-12));
  CHECK(r.value <= 0.5 * std::sqrt(6.0) + 1e-6);
  CHECK(r.certified_lower_bound);
}

TEST_CASE("nested subspaces give nested radii") {
  RngStream rng(318);
  ConvexBody Q(BodyDesc::cube(8));
  const Subspace F = sample_grassmannian(8, 4, rng);
  const Subspace E(F.frame().leftCols(3));
  const double re = section_radius(Q, E, light(), RngStream(319)).value;
  const double rf = section_radius(Q, F, light(), RngStream(320)).value;
  CHECK(re <= rf + 1e-9);
}

TEST_CASE("rotation equivariance of section radii") {
  RngStream rng(321);
  ConvexBody Q(BodyDesc::cube(6));
  const Mat U = sample_orthogonal(6, rng);
  const Subspace F = sample_grassmannian(6, 3, rng);
  const Subspace UF(U * F.frame());
  ConvexBody RQ(BodyDesc::rotation(U, BodyDesc::cube(6)));
  const double a = section_radius(RQ, UF, light(), RngStream(322)).value;
  const double b = section_radius(Q, F, light(), RngStream(323)).value;
  CHECK(a == doctest::Approx(b).epsilon(0.01));
}

TEST_CASE("gelfand upper bounds") {
  ConvexBody B(BodyDesc::ball(6, 1.1));
  CHECK(gelfand_upper(B, 2, 3, light(), RngStream(324)).value ==
        doctest::Approx(1.1).epsilon(1e-6));

  ConvexBody Q8(BodyDesc::cube(8));
  CHECK(gelfand_upper(Q8, 0, 1, light(), RngStream(325)).value ==
        doctest::Approx(std::sqrt(8.0) / 2.0).epsilon(0.01));

  // c_t nonincreasing in t (statistically, generous slack for opt noise)
  MaximizerConfig c = light();
  c.n_coarse = 512;
  c.n_starts = 8;
  const double c2 = gelfand_upper(Q8, 2, 4, c, RngStream(326)).value;
  const double c4 = gelfand_upper(Q8, 4, 4, c, RngStream(327)).value;
  const double c6 = gelfand_upper(Q8, 6, 4, c, RngStream(328)).value;
  CHECK(c4 <= c2 * 1.02);
  CHECK(c6 <= c4 * 1.02);
}

TEST_CASE("rotation intersections") {
  ConvexBody Q2(BodyDesc::cube(2));
  // U = identity reduces to R(K)
  CHECK(rotation_intersection_radius(Q2, Mat::Identity(2, 2), light(), RngStream(329))
            .value == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(0.01));

  // 45-degree rotation: circumradius of the regular octagon of inradius 1/2
  const double c = std::cos(M_PI / 4), s = std::sin(M_PI / 4);
  Mat U(2, 2);
  U << c, -s, s, c;
  const RadiusResult r = rotation_intersection_radius(Q2, U, light(), RngStream(330));
  CHECK(r.value == doctest::Approx(0.5 / std::cos(M_PI / 8)).epsilon(0.01));

  ConvexBody B(BodyDesc::ball(4, 1.2));
  RngStream rng(331);
  const Mat U4 = sample_orthogonal(4, rng);
  CHECK(rotation_intersection_radius(B, U4, light(), RngStream(332)).value ==
        doctest::Approx(1.2).epsilon(1e-6));
}

TEST_CASE("polar centroid sections: gaussian closed form, monotone in q") {
  const int n = 12;
  RngStream rng(333);
  LogConcaveMeasure g(MeasureDesc::gaussian(n));
  const Subspace F = sample_grassmannian(n, 6, rng);
  MaximizerConfig c = light();
  c.n_coarse = 256;
  c.n_starts = 4;

  // exact oracle: R(Z_q° ∩ F) = 1/c_q
  const double r4 = polar_centroid_section_radius(g, 4.0, F, 20000, c, RngStream(334)).value;
  CHECK(r4 == doctest::Approx(std::pow(3.0, -0.25)).epsilon(0.01));

  // isotropic empirical measure, q = 2: radius 1 within MC noise
  LogConcaveMeasure mu = isotropic_body_measure(BodyDesc::cube(n));
  const double r2 = polar_centroid_section_radius(mu, 2.0, F, 20000, c, RngStream(335)).value;
  CHECK(r2 == doctest::Approx(1.0).epsilon(0.05));

  // nonincreasing in q
  const double r8 = polar_centroid_section_radius(mu, 8.0, F, 20000, c, RngStream(336)).value;
  CHECK(r8 <= r2 * 1.03);
}

TEST_CASE("centroid section and rotation radii: gaussian exact path") {
  const int n = 16;
  RngStream rng(337);
  LogConcaveMeasure g(MeasureDesc::gaussian(n));
  const Subspace F = sample_grassmannian(n, 8, rng);
  MaximizerConfig c = light();
  c.n_coarse = 128;
  c.n_starts = 4;
  c.refine_steps = 80;
  for (double q : {2.0, 8.0}) {
    const double r = centroid_section_radius(g, q, F, 4096, c, RngStream(338)).value;
    CHECK(r == doctest::Approx(testutil::gaussian_cq(q)).epsilon(1e-9));
    const Mat U = sample_orthogonal(n, rng);
    const double rr = centroid_rotation_radius(g, q, U, 4096, c, RngStream(339)).value;
    CHECK(rr == doctest::Approx(testutil::gaussian_cq(q)).epsilon(1e-9));
  }
}

TEST_CASE("centroid section radius: empirical isotropic measure at q=2") {
  // Z_2 of an isotropic measure is the unit ball; the empirical version
  // is the sample-covariance ellipsoid, so sections have radius ~ 1
  const int n = 12;
  RngStream rng(340);
  LogConcaveMeasure mu = isotropic_body_measure(BodyDesc::cube(n));
  const Subspace F = sample_grassmannian(n, 6, rng);
  MaximizerConfig c;
  c.n_coarse = 128;
  c.n_starts = 4;
  c.refine_steps = 120;
  const double r = centroid_section_radius(mu, 2.0, F, 16384, c, RngStream(341)).value;
  CHECK(r == doctest::Approx(1.0).epsilon(0.08));

  // the gauge solver itself: membership consistency of the argmax point.
  CentroidSupportFn h(mu, 4.0, 8192, RngStream(342));
  const Vec th = sample_sphere(n, rng);
  const auto gg = centroid_gauge(h, th, nullptr, 80);
  // rho * theta lies on the boundary of the empirical Z_q: probe directions
  const Vec p = th / gg.value;
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const Vec u = sample_sphere(n, rng);
    worst = std::max(worst, p.dot(u) / h(u));
  }
  CHECK(worst <= 1.0 + 1e-9);       // never outside
  CHECK(gg.value >= worst * 0.95);  // and the solve is near-tight
}

TEST_CASE("centroid projection radius matches marginal radius") {
  const int n = 12;
  RngStream rng(343);
  LogConcaveMeasure g(MeasureDesc::gaussian(n));
  const Subspace F = sample_grassmannian(n, 5, rng);
  MaximizerConfig c = light();
  c.n_coarse = 128;
  c.n_starts = 4;
  const double r = centroid_projection_radius(g, 6.0, F, 4096, c, RngStream(344)).value;
  CHECK(r == doctest::Approx(testutil::gaussian_cq(6.0)).epsilon(1e-9));
}

TEST_CASE("vrad of projected centroid bodies: gaussian exact") {
  const int n = 16, t = 3;
  RngStream rng(345);
  LogConcaveMeasure g(MeasureDesc::gaussian(n));
  const Subspace E = sample_grassmannian(n, t, rng);
  CentroidSupportFn h(g, 4.0, 4096, RngStream(346));
  const double v = vrad_centroid_projection(h.marginal(E), 512, RngStream(347));
  CHECK(v == doctest::Approx(testutil::gaussian_cq(4.0)).epsilon(1e-9));
}
