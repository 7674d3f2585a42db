#include <doctest.h>

#include <cmath>

#include "isoscope/geometry.hpp"
#include "isoscope/json_io.hpp"
#include "test_util.hpp"

using namespace isoscope;

namespace {
Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}
}  // namespace

TEST_CASE("cube support and gauge closed forms") {
  ConvexBody Q(BodyDesc::cube(3));
  CHECK(Q.support(v3(1, 1, 1)) == doctest::Approx(1.5));
  CHECK(Q.gauge(v3(0.1, -0.3, 0.2)) == doctest::Approx(0.6));
  CHECK(Q.analytic_volume() == doctest::Approx(1.0));

  ConvexBody Q4(BodyDesc::cube(4));
  CHECK(Q4.membership(Vec::Zero(4)));
  Vec x = Vec::Zero(4);
  x[0] = 0.51;
  CHECK_FALSE(Q4.membership(x));
}

TEST_CASE("ball oracles and the volume-one radius") {
  ConvexBody B(BodyDesc::ball(5, 2.0));
  RngStream rng(1);
  const Vec y = sample_sphere(5, rng);
  CHECK(B.support(y) == doctest::Approx(2.0));
  CHECK(B.analytic_volume() == doctest::Approx(unit_ball_volume(5) * 32.0));

  // boundary membership at r_n = omega_n^{-1/n}
  ConvexBody V8(BodyDesc::volume_one_ball(8));
  CHECK(V8.analytic_volume() == doctest::Approx(1.0));
  const double r8 = std::exp(-unit_ball_log_volume(8) / 8);
  Vec x = Vec::Zero(8);
  x[0] = r8;
  CHECK(V8.membership(x));
  CHECK(V8.gauge(x) == doctest::Approx(1.0));
}

TEST_CASE("polar duality is exact by construction") {
  ConvexBody Qp(BodyDesc::polar(BodyDesc::cube(3)));
  CHECK(Qp.support(v3(0.2, -0.4, 0.1)) == doctest::Approx(0.8));  // = 2 max|y_i|
  // gauge of the polar equals the support of the cube
  CHECK(Qp.gauge(v3(1, 1, 1)) == doctest::Approx(1.5));
  // polar volume: |Q||Q°| = 4^n/n!
  CHECK(Qp.analytic_volume() == doctest::Approx(std::pow(4.0, 3) / 6.0));

  // double polar collapses to the original descriptor
  auto pp = BodyDesc::polar(BodyDesc::polar(BodyDesc::cube(3)));
  CHECK(pp->kind == BodyKind::Cube);
}

TEST_CASE("ellipsoid gauge from the shape matrix") {
  Mat S(2, 2);
  S << 4, 0, 0, 1;  // x^2/4 + y^2 <= 1
  ConvexBody E(BodyDesc::ellipsoid(S));
  Vec x(2);
  x << 2, 0;
  CHECK(E.gauge(x) == doctest::Approx(1.0));
  CHECK(E.analytic_volume() == doctest::Approx(2 * M_PI));
}

TEST_CASE("intersection exposes gauge only") {
  auto desc = BodyDesc::intersection(BodyDesc::ball(2, 1), BodyDesc::ball(2, 2));
  ConvexBody I(desc);
  Vec x(2);
  x << 1, 0;
  CHECK(I.gauge(x) == doctest::Approx(1.0));  // max(1, 0.5)
  CHECK_THROWS_AS((void)I.support(x), OracleUnavailable);
  CHECK_THROWS_AS((void)I.analytic_volume(), VolumeUnavailable);
}

TEST_CASE("affine images: determinant scaling and singular rejection") {
  ConvexBody A(BodyDesc::affine(2 * Mat::Identity(3, 3), BodyDesc::cube(3)));
  CHECK(A.analytic_volume() == doctest::Approx(8.0));
  CHECK(A.gauge(v3(1, 0, 0)) == doctest::Approx(1.0));
  CHECK(A.support(v3(1, 0, 0)) == doctest::Approx(1.0));

  Mat S = Mat::Identity(3, 3);
  S(2, 2) = 0;
  CHECK_THROWS_AS(ConvexBody(BodyDesc::affine(S, BodyDesc::cube(3))), SingularTransform);
}

TEST_CASE("axis sections and projections of the cube") {
  ConvexBody Q4(BodyDesc::cube(4));
  const Subspace F = Subspace::axes(4, 2);
  ConvexBody sec = section_body(Q4, F);
  Vec u(2);
  u << 0.3, -0.1;
  CHECK(sec.gauge(u) == doctest::Approx(0.6));
  CHECK_THROWS_AS((void)sec.support(u), OracleUnavailable);

  ConvexBody proj = projection_body(Q4, F);
  CHECK(proj.support(u) == doctest::Approx(0.5 * 0.4));
  CHECK_THROWS_AS((void)proj.gauge(u), OracleUnavailable);
}

TEST_CASE("diagonal section and projection of the square") {
  ConvexBody Q2(BodyDesc::cube(2));
  Mat f(2, 1);
  f << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const Subspace D(f);
  ConvexBody sec = section_body(Q2, D);
  Vec u(1);
  u << 1.0;
  CHECK(sec.gauge(u) == doctest::Approx(std::sqrt(2.0)));  // radius 1/sqrt(2)
  ConvexBody proj = projection_body(Q2, D);
  CHECK(proj.support(u) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("sections of balls are balls of the same radius") {
  RngStream rng(3);
  ConvexBody B(BodyDesc::ball(7, 1.7));
  const Subspace F = sample_grassmannian(7, 3, rng);
  ConvexBody sec = section_body(B, F);
  for (int i = 0; i < 10; ++i) {
    const Vec u = sample_sphere(3, rng);
    CHECK(sec.gauge(u) == doctest::Approx(1.0 / 1.7));
  }
}

TEST_CASE("simplex: volume one, gauge/support consistency at vertices") {
  for (int n : {1, 2, 5, 9}) {
    ConvexBody S(BodyDesc::simplex(n));
    CHECK(S.analytic_volume() == doctest::Approx(1.0));
    CHECK_FALSE(S.symmetric());
    RngStream rng(n);
    // support point lies on the boundary: gauge(pt) = 1
    for (int i = 0; i < 8; ++i) {
      const Vec y = sample_sphere(n, rng);
      const Vec p = S.support_point(y);
      CHECK(S.gauge(p) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(S.support(y) == doctest::Approx(p.dot(y)));
    }
  }
}

TEST_CASE("homogeneity of gauge and support on random bodies") {
  RngStream rng(17);
  std::vector<BodyPtr> bodies = {
      BodyDesc::cube(5), BodyDesc::ball(5, 1.3), BodyDesc::cross_polytope(5, 2.0),
      BodyDesc::lp_ball(5, 3.0, 1.1), BodyDesc::simplex(5)};
  for (const auto& d : bodies) {
    ConvexBody K(d);
    for (int t = 0; t < 20; ++t) {
      const Vec x = sample_sphere(5, rng);
      const double lam = 10.0 * rng.uniform01();
      CHECK(K.gauge(lam * x) == doctest::Approx(lam * K.gauge(x)).epsilon(1e-9));
      CHECK(K.support(lam * x) == doctest::Approx(lam * K.support(x)).epsilon(1e-9));
      // subadditivity of the support function
      const Vec y = sample_sphere(5, rng);
      CHECK(K.support(x + y) <= K.support(x) + K.support(y) + 1e-9);
    }
  }
}

TEST_CASE("Cauchy-Schwarz consistency: inner points vs support") {
  RngStream rng(23);
  ConvexBody K(BodyDesc::ellipsoid(Mat::Identity(4, 4) * 2.5));
  for (int t = 0; t < 50; ++t) {
    const Vec x = K.sample(rng);
    const Vec y = sample_sphere(4, rng);
    CHECK(x.dot(y) <= K.support(y) + 1e-9);
  }
}

TEST_CASE("section radial never exceeds projection support") {
  RngStream rng(31);
  for (int t = 0; t < 10; ++t) {
    ConvexBody K(BodyDesc::lp_ball(6, 2.5, 1.0));
    const Subspace F = sample_grassmannian(6, 3, rng);
    ConvexBody sec = section_body(K, F);
    ConvexBody proj = projection_body(K, F);
    for (int i = 0; i < 10; ++i) {
      const Vec u = sample_sphere(3, rng);
      CHECK(1.0 / sec.gauge(u) <= proj.support(u) + 1e-9);
    }
  }
}

TEST_CASE("Santalo sanity for the cube/cross-polytope pair") {
  for (int n = 2; n <= 10; ++n) {
    ConvexBody Q(BodyDesc::cube(n));
    ConvexBody Qp(BodyDesc::polar(BodyDesc::cube(n)));
    const double prod = Q.analytic_volume() * Qp.analytic_volume();
    const double wn = unit_ball_volume(n);
    CHECK(prod <= wn * wn * (1 + 1e-12));               // Blaschke-Santalo
    CHECK(std::pow(prod, 1.0 / n) >= 1.0 / (2.0 * n));  // reverse Santalo
  }
}

TEST_CASE("hpolytope validation and gauge") {
  Mat A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  Vec b(4);
  b << 1, 1, 2, 2;
  ConvexBody P(BodyDesc::hpolytope(A, b));
  Vec x(2);
  x << 0.5, 1.0;
  CHECK(P.gauge(x) == doctest::Approx(0.5));
  Vec bad(4);
  bad << 1, -1, 1, 1;
  CHECK_THROWS(BodyDesc::hpolytope(A, bad));
}

TEST_CASE("body JSON round trip") {
  const char* txt = R"({"type":"polar","child":{"type":"affine","T":2.0,
      "child":{"type":"cross","n":4,"scale":1.5}}})";
  const BodyPtr d = body_from_json(json::parse(txt));
  const BodyPtr d2 = body_from_json(body_to_json(d));
  ConvexBody a(d), b(d2);
  RngStream rng(9);
  for (int i = 0; i < 10; ++i) {
    const Vec x = sample_sphere(4, rng);
    CHECK(a.gauge(x) == doctest::Approx(b.gauge(x)));
    CHECK(a.support(x) == doctest::Approx(b.support(x)));
  }
  CHECK_THROWS_AS(body_from_json(json::parse("{\"type\":\"blob\"}")), ConfigError);
  CHECK_THROWS_AS(body_from_json(json::parse("{\"n\":3}")), ConfigError);
}

TEST_CASE("dimension mismatches are rejected") {
  ConvexBody Q(BodyDesc::cube(3));
  Vec x(4);
  x.setZero();
  CHECK_THROWS_AS((void)Q.gauge(x), DimensionMismatch);
  CHECK_THROWS_AS((void)Q.support(x), DimensionMismatch);
}
