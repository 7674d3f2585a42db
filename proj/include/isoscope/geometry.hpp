#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "isoscope/common.hpp"
#include "isoscope/rng.hpp"
#include "isoscope/subspace.hpp"

namespace isoscope {

enum class BodyKind {
  Cube,           // [-1/2, 1/2]^n, volume 1
  Ball,           // radius r
  VolumeOneBall,  // radius omega_n^{-1/n}
  CrossPolytope,  // {||x||_1 <= scale}
  Simplex,        // regular, barycenter 0, volume 1
  LpBall,         // {||x||_p <= scale}
  HPolytope,      // {Ax <= b}, b > 0
  Ellipsoid,      // {x^T S^{-1} x <= 1}, S = squared-semiaxis shape matrix
  Affine,         // T(child), T invertible
  Polar,
  Section,        // child ∩ F, in F-coordinates
  Projection,     // P_F(child), in F-coordinates
  Intersection,
  Rotation,       // U(child), U orthogonal
};

struct BodyDesc;
using BodyPtr = std::shared_ptr<const BodyDesc>;

/// Construction recipe for a convex body. The matrix field M holds the
/// ellipsoid shape, the affine map, the rotation, or the section/projection
/// frame, depending on kind.
struct BodyDesc {
  BodyKind kind;
  int n = 0;  // dimension of this body (frame columns for sections)
  double radius = 1.0;
  double scale = 1.0;
  double p = 2.0;
  Mat A;
  Vec b;
  Mat M;
  BodyPtr child, child2;

  static BodyPtr cube(int n);
  static BodyPtr ball(int n, double r);
  static BodyPtr volume_one_ball(int n);
  static BodyPtr cross_polytope(int n, double scale);
  /// Cross-polytope scaled to volume one (isotropic by symmetry).
  static BodyPtr cross_polytope_volume_one(int n);
  static BodyPtr simplex(int n);
  static BodyPtr lp_ball(int n, double p, double scale);
  static BodyPtr hpolytope(Mat A, Vec b);
  static BodyPtr ellipsoid(Mat shape);
  static BodyPtr affine(Mat T, BodyPtr child);
  static BodyPtr polar(BodyPtr child);
  static BodyPtr section(BodyPtr child, const Subspace& F);
  static BodyPtr projection(BodyPtr child, const Subspace& F);
  static BodyPtr intersection(BodyPtr a, BodyPtr b);
  static BodyPtr rotation(Mat U, BodyPtr child);
};

/// A convex body as an immutable oracle bundle. All oracles are pure
/// functions; bodies are safe to share across threads.
class ConvexBody {
 public:
  ConvexBody() = default;
  explicit ConvexBody(BodyPtr desc);

  int dim() const;
  bool symmetric() const;
  const BodyPtr& descriptor() const;

  bool has_gauge() const;
  bool has_support() const;
  bool has_sampler() const;

  /// Minkowski functional ||x||_K. Throws OracleUnavailable if no gauge
  /// route exists.
  double gauge(const Vec& x) const;
  /// Support function h_K(y).
  double support(const Vec& y) const;
  /// gauge(x) <= 1 + 1e-12.
  bool membership(const Vec& x) const;
  /// Radial function 1/gauge(theta) for unit theta.
  double radial(const Vec& theta) const;

  /// A subgradient of the gauge at x (x != 0). Exact for every descriptor.
  Vec gauge_subgradient(const Vec& x) const;
  /// A point of K achieving the support in direction y.
  Vec support_point(const Vec& y) const;

  std::optional<double> volume() const;
  /// Exact volume; throws VolumeUnavailable for oracle-only bodies.
  double analytic_volume() const;

  /// Exact uniform draw where a closed-form sampler exists
  /// (cube, balls, ellipsoids and affine/rotation images of those).
  Vec sample(RngStream& rng) const;

  /// Finite upper-ish bound on R(K) used for chord bracketing guards.
  double radius_hint() const;

  struct Impl;  // oracle bundle; public for the compile step in geometry.cpp

 private:
  std::shared_ptr<const Impl> impl_;
};

// -- module operations (spec surface) --

double support(const ConvexBody& body, const Vec& y);
double gauge(const ConvexBody& body, const Vec& x);
bool membership(const ConvexBody& body, const Vec& x);
double analytic_volume(const ConvexBody& body);
ConvexBody section_body(const ConvexBody& body, const Subspace& F);
ConvexBody projection_body(const ConvexBody& body, const Subspace& F);

/// Closed-form isotropic constant L_K for the volume-one reference bodies
/// (cube, volume-one ball, volume-one cross-polytope, simplex).
std::optional<double> known_isotropic_constant(const BodyPtr& desc);

}  // namespace isoscope
