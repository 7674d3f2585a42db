#include <doctest.h>

#include <cmath>

#include "isoscope/isotropy.hpp"
#include "isoscope/rng.hpp"
#include "test_util.hpp"

using namespace isoscope;

TEST_CASE("ball covariance is r^2/(n+2) per coordinate") {
  LogConcaveMeasure u(MeasureDesc::uniform_on(BodyDesc::ball(6, 1.5)));
  const MomentReport rep = estimate_moments(u, 100000, RngStream(101));
  const double want = 1.5 * 1.5 / 8.0;
  for (int i = 0; i < 6; ++i)
    CHECK(rep.covariance(i, i) == doctest::Approx(want).epsilon(0.03));
}

TEST_CASE("cube is already isotropic: transform ~ identity, L ~ 1/sqrt(12)") {
  ConvexBody Q(BodyDesc::cube(8));
  const IsotropicResult res = isotropic_transform(Q, 100000, RngStream(102));
  CHECK(res.L == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(0.02));
  const double s = res.transform.trace() / 8.0;
  CHECK((res.transform / s - Mat::Identity(8, 8)).cwiseAbs().maxCoeff() < 0.02);
  CHECK(res.translation.cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("affine invariance of the isotropic constant") {
  Mat T = Mat::Identity(6, 6);
  T(0, 0) = 3.0;
  T(1, 2) = 0.5;
  ConvexBody K(BodyDesc::affine(T, BodyDesc::cube(6)));
  const IsotropicResult res = isotropic_transform(K, 100000, RngStream(103));
  CHECK(res.L == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(0.02));

  // random well-conditioned transforms
  RngStream rng(104);
  for (int t = 0; t < 4; ++t) {
    const Mat U = sample_orthogonal(5, rng);
    const Mat V = sample_orthogonal(5, rng);
    Vec d(5);
    for (int i = 0; i < 5; ++i) d[i] = 0.5 + 4.5 * rng.uniform01();
    ConvexBody A(BodyDesc::affine(U * d.asDiagonal() * V, BodyDesc::cube(5)));
    const IsotropicResult r = isotropic_transform(A, 60000, rng.derive(t));
    CHECK(r.L == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(0.03));
  }
}

TEST_CASE("volume-one ball isotropic constant matches r_n^2/(n+2)") {
  const int n = 10;
  const double rn = std::exp(-unit_ball_log_volume(n) / n);
  const double want = rn / std::sqrt(n + 2.0);  // = sqrt(r_n^2/(n+2))
  ConvexBody B(BodyDesc::volume_one_ball(n));
  const IsotropicResult res = isotropic_transform(B, 100000, RngStream(105));
  CHECK(res.L == doctest::Approx(want).epsilon(0.02));
}

TEST_CASE("idempotence: renormalizing an isotropic result barely moves L") {
  ConvexBody K(BodyDesc::affine(2.5 * Mat::Identity(5, 5), BodyDesc::cube(5)));
  const IsotropicResult r1 = isotropic_transform(K, 80000, RngStream(106));
  ConvexBody K2(r1.normalized);
  const IsotropicResult r2 = isotropic_transform(K2, 80000, RngStream(107));
  CHECK(std::abs(r2.L - r1.L) / r1.L < 0.01);
}

TEST_CASE("isotropic constants of measures: gaussian, cube, mu_K bridge") {
  LogConcaveMeasure g(MeasureDesc::gaussian(7));
  CHECK(isotropic_constant(g, 100000, RngStream(108)) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(0.02));

  LogConcaveMeasure u(MeasureDesc::uniform_on(BodyDesc::cube(7)));
  CHECK(isotropic_constant(u, 100000, RngStream(109)) ==
        doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(0.02));

  // L_{mu_K} = L_K for the cube
  LogConcaveMeasure mu_q = isotropic_body_measure(BodyDesc::cube(7));
  CHECK(isotropic_constant(mu_q, 100000, RngStream(110)) ==
        doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(0.02));

  // marginals have no closed-form density supremum
  LogConcaveMeasure gm = marginal(g, Subspace::axes(7, 2));
  CHECK_THROWS_AS((void)isotropic_constant(gm, 1000, RngStream(111)),
                  DensityUnavailable);
}

TEST_CASE("section isotropic constants") {
  // axis section of the cube is a smaller cube
  ConvexBody Q8(BodyDesc::cube(8));
  const double L = section_isotropic_constant(Q8, Subspace::axes(8, 4), 60000,
                                              RngStream(112));
  CHECK(L == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(0.05));

  // section of a ball is a ball: L = (r^2/(m+2))^{1/2} after volume norm.
  // For the volume-one 8-ball and m = 3 the normalized section is the
  // 3-ball of radius r8 scaled to volume one.
  const int n = 8, m = 3;
  ConvexBody V8(BodyDesc::volume_one_ball(n));
  RngStream rng(113);
  const Subspace F = sample_grassmannian(n, m, rng);
  const double r8 = std::exp(-unit_ball_log_volume(n) / n);
  const double vol3 = unit_ball_volume(m) * std::pow(r8, m);
  const double r_norm = r8 * std::pow(vol3, -1.0 / m);  // radius after volume 1
  const double want = r_norm / std::sqrt(m + 2.0);
  const double Ls = section_isotropic_constant(V8, F, 60000, RngStream(114));
  CHECK(Ls == doctest::Approx(want).epsilon(0.05));

  // random sections of the cube keep a bounded isotropic constant
  for (int t = 0; t < 5; ++t) {
    const Subspace Fr = sample_grassmannian(8, 4, rng);
    const double Lr = section_isotropic_constant(Q8, Fr, 40000, rng.derive(t));
    CHECK(Lr > 0.25);
    CHECK(Lr < 0.45);
  }

  ConvexBody Q14(BodyDesc::cube(14));
  CHECK_THROWS_AS((void)section_isotropic_constant(Q14, Subspace::axes(14, 13), 1000,
                                                   RngStream(115)),
                  DimensionTooLarge);
}

TEST_CASE("KLS-style radius bounds hold with analytic values") {
  for (int n = 2; n <= 64; n *= 2) {
    // cube: R = sqrt(n)/2, r = 1/2, L = 1/sqrt(12)
    const double Lq = 1.0 / std::sqrt(12.0);
    CHECK(0.5 * std::sqrt(static_cast<double>(n)) <= (n + 1) * Lq);
    CHECK(0.5 / Lq >= 0.5);                                    // r >= c L
    CHECK(0.5 * std::sqrt(static_cast<double>(n)) / (n * Lq) <= 4.0);  // R <= c n L

    // volume-one ball: R = r = r_n, L = r_n/sqrt(n+2)
    const double rn = std::exp(-unit_ball_log_volume(n) / n);
    const double Lb = rn / std::sqrt(n + 2.0);
    CHECK(rn <= (n + 1) * Lb);
    CHECK(rn / Lb >= 0.5);
    CHECK(rn / (n * Lb) <= 4.0);
  }
}

TEST_CASE("inverse_sqrt rejects rank-deficient input") {
  Mat S = Mat::Identity(4, 4);
  S(3, 3) = 0.0;
  CHECK_THROWS_AS((void)inverse_sqrt(S), RankDeficientCovariance);
  // whitening works on a PD matrix
  Mat P(2, 2);
  P << 4, 1, 1, 2;
  const Mat W = inverse_sqrt(P);
  CHECK((W * P * W - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
}
