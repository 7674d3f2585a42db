#include "isoscope/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <cmath>

namespace isoscope {

namespace {

double lfact(int n) { return std::lgamma(n + 1.0); }

// Scale factor making the regular simplex (edge sqrt(2)) have volume one:
// s^n * sqrt(n+1)/n! = 1.
double simplex_scale(int n) {
  return std::exp((lfact(n) - 0.5 * std::log(n + 1.0)) / n);
}

// Columns are the n+1 vertices of the regular simplex with barycenter 0,
// |v_i|^2 = n/(n+1), <v_i,v_j> = -1/(n+1).
Mat simplex_vertices(int n) {
  Mat ones(n + 1, 1);
  ones.setOnes();
  Eigen::HouseholderQR<Mat> qr(ones);
  Mat Q = qr.householderQ();
  return Q.rightCols(n).transpose();  // n x (n+1)
}

}  // namespace

// ---------------------------------------------------------------------------
// descriptor factories

BodyPtr BodyDesc::cube(int n) {
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::Cube;
  d->n = n;
  return d;
}

BodyPtr BodyDesc::ball(int n, double r) {
  if (!(r > 0)) throw Error("ball: radius must be positive");
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::Ball;
  d->n = n;
  d->radius = r;
  return d;
}

BodyPtr BodyDesc::volume_one_ball(int n) {
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::VolumeOneBall;
  d->n = n;
  d->radius = std::exp(-unit_ball_log_volume(n) / n);
  return d;
}

BodyPtr BodyDesc::cross_polytope(int n, double scale) {
  if (!(scale > 0)) throw Error("cross_polytope: scale must be positive");
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::CrossPolytope;
  d->n = n;
  d->scale = scale;
  return d;
}

BodyPtr BodyDesc::cross_polytope_volume_one(int n) {
  // (2s)^n / n! = 1  =>  s = (n!)^{1/n} / 2
  const double s = 0.5 * std::exp(lfact(n) / n);
  return cross_polytope(n, s);
}

BodyPtr BodyDesc::simplex(int n) {
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::Simplex;
  d->n = n;
  return d;
}

BodyPtr BodyDesc::lp_ball(int n, double p, double scale) {
  if (!(p >= 1.0)) throw Error("lp_ball: p >= 1 required");
  if (!(scale > 0)) throw Error("lp_ball: scale must be positive");
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::LpBall;
  d->n = n;
  d->p = p;
  d->scale = scale;
  return d;
}

BodyPtr BodyDesc::hpolytope(Mat A, Vec b) {
  if (A.rows() != b.size()) throw DimensionMismatch("hpolytope: rows(A) != len(b)");
  if (b.minCoeff() <= 0) throw Error("hpolytope: b must be entrywise positive");
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::HPolytope;
  d->n = static_cast<int>(A.cols());
  d->A = std::move(A);
  d->b = std::move(b);
  return d;
}

BodyPtr BodyDesc::ellipsoid(Mat shape) {
  if (shape.rows() != shape.cols()) throw DimensionMismatch("ellipsoid: shape not square");
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::Ellipsoid;
  d->n = static_cast<int>(shape.rows());
  d->M = std::move(shape);
  return d;
}

BodyPtr BodyDesc::affine(Mat T, BodyPtr child) {
  if (!child) throw Error("affine: null child");
  if (T.rows() != T.cols() || T.rows() != child->n)
    throw DimensionMismatch("affine: T must be n x n for the child dimension");
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::Affine;
  d->n = child->n;
  d->M = std::move(T);
  d->child = std::move(child);
  return d;
}

BodyPtr BodyDesc::polar(BodyPtr child) {
  if (!child) throw Error("polar: null child");
  if (child->kind == BodyKind::Polar) return child->child;  // K°° = K
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::Polar;
  d->n = child->n;
  d->child = std::move(child);
  return d;
}

BodyPtr BodyDesc::section(BodyPtr child, const Subspace& F) {
  if (!child) throw Error("section: null child");
  if (F.ambient_dim() != child->n)
    throw DimensionMismatch("section: frame ambient dim != body dim");
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::Section;
  d->n = F.dim();
  d->M = F.frame();
  d->child = std::move(child);
  return d;
}

BodyPtr BodyDesc::projection(BodyPtr child, const Subspace& F) {
  if (!child) throw Error("projection: null child");
  if (F.ambient_dim() != child->n)
    throw DimensionMismatch("projection: frame ambient dim != body dim");
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::Projection;
  d->n = F.dim();
  d->M = F.frame();
  d->child = std::move(child);
  return d;
}

BodyPtr BodyDesc::intersection(BodyPtr a, BodyPtr b) {
  if (!a || !b) throw Error("intersection: null child");
  if (a->n != b->n) throw DimensionMismatch("intersection: dimension mismatch");
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::Intersection;
  d->n = a->n;
  d->child = std::move(a);
  d->child2 = std::move(b);
  return d;
}

BodyPtr BodyDesc::rotation(Mat U, BodyPtr child) {
  if (!child) throw Error("rotation: null child");
  if (U.rows() != U.cols() || U.rows() != child->n)
    throw DimensionMismatch("rotation: U must be n x n for the child dimension");
  const double dev =
      (U.transpose() * U - Mat::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-8) throw Error("rotation: U not orthogonal");
  auto d = std::make_shared<BodyDesc>();
  d->kind = BodyKind::Rotation;
  d->n = child->n;
  d->M = std::move(U);
  d->child = std::move(child);
  return d;
}

// ---------------------------------------------------------------------------
// oracle compilation

struct ConvexBody::Impl {
  BodyPtr desc;
  int dim = 0;
  bool symmetric = true;
  double hint = 1.0;
  std::optional<double> volume;
  std::function<double(const Vec&)> gauge;
  std::function<double(const Vec&)> support;
  std::function<Vec(const Vec&)> sg;  // gauge subgradient
  std::function<Vec(const Vec&)> pt;  // support point (argmax)
  std::function<Vec(RngStream&)> sampler;
};

namespace {

using Impl = ConvexBody::Impl;
using ImplPtr = std::shared_ptr<const Impl>;

ImplPtr compile(const BodyPtr& desc);

ImplPtr compile_ball_like(const BodyPtr& desc, double r) {
  auto im = std::make_shared<Impl>();
  im->desc = desc;
  im->dim = desc->n;
  const int n = desc->n;
  im->hint = r;
  im->volume = std::exp(unit_ball_log_volume(n) + n * std::log(r));
  im->gauge = [r](const Vec& x) { return x.norm() / r; };
  im->support = [r](const Vec& y) { return r * y.norm(); };
  im->sg = [r](const Vec& x) -> Vec {
    const double nx = x.norm();
    return nx > 0 ? Vec(x / (r * nx)) : Vec(Vec::Zero(x.size()));
  };
  im->pt = [r](const Vec& y) -> Vec {
    const double ny = y.norm();
    return ny > 0 ? Vec(r * y / ny) : Vec(Vec::Zero(y.size()));
  };
  im->sampler = [n, r](RngStream& rng) -> Vec {
    const double u = rng.uniform_open();
    return (r * std::pow(u, 1.0 / n)) * sample_sphere(n, rng);
  };
  return im;
}

ImplPtr compile(const BodyPtr& desc) {
  auto im = std::make_shared<Impl>();
  im->desc = desc;
  im->dim = desc->n;
  const int n = desc->n;
  if (n < 1) throw DimensionMismatch("body dimension must be >= 1");

  switch (desc->kind) {
    case BodyKind::Cube: {
      im->hint = 0.5 * std::sqrt(static_cast<double>(n));
      im->volume = 1.0;
      im->gauge = [](const Vec& x) { return 2.0 * x.cwiseAbs().maxCoeff(); };
      im->support = [](const Vec& y) { return 0.5 * y.cwiseAbs().sum(); };
      im->sg = [n](const Vec& x) -> Vec {
        int i;
        x.cwiseAbs().maxCoeff(&i);
        Vec d = Vec::Zero(n);
        d[i] = x[i] >= 0 ? 2.0 : -2.0;
        return d;
      };
      im->pt = [](const Vec& y) -> Vec {
        return y.unaryExpr([](double t) { return t >= 0 ? 0.5 : -0.5; });
      };
      im->sampler = [n](RngStream& rng) -> Vec {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = rng.uniform01() - 0.5;
        return x;
      };
      break;
    }

    case BodyKind::Ball:
    case BodyKind::VolumeOneBall:
      return compile_ball_like(desc, desc->radius);

    case BodyKind::CrossPolytope: {
      const double s = desc->scale;
      im->hint = s;
      im->volume = std::exp(n * std::log(2.0 * s) - lfact(n));
      im->gauge = [s](const Vec& x) { return x.cwiseAbs().sum() / s; };
      im->support = [s](const Vec& y) { return s * y.cwiseAbs().maxCoeff(); };
      im->sg = [s](const Vec& x) -> Vec {
        return x.unaryExpr([s](double t) { return (t >= 0 ? 1.0 : -1.0) / s; });
      };
      im->pt = [s, n](const Vec& y) -> Vec {
        int i;
        y.cwiseAbs().maxCoeff(&i);
        Vec v = Vec::Zero(n);
        v[i] = y[i] >= 0 ? s : -s;
        return v;
      };
      break;
    }

    case BodyKind::Simplex: {
      const double s = simplex_scale(n);
      const Mat V = simplex_vertices(n);  // n x (n+1)
      im->symmetric = false;
      im->hint = s * std::sqrt(n / (n + 1.0));
      im->volume = 1.0;
      im->gauge = [V, s, n](const Vec& x) {
        return (n + 1.0) / s * (-V.transpose() * x).maxCoeff();
      };
      im->sg = [V, s, n](const Vec& x) -> Vec {
        int i;
        (-V.transpose() * x).maxCoeff(&i);
        return Vec(-(n + 1.0) / s * V.col(i));
      };
      im->support = [V, s](const Vec& y) { return s * (V.transpose() * y).maxCoeff(); };
      im->pt = [V, s](const Vec& y) -> Vec {
        int i;
        (V.transpose() * y).maxCoeff(&i);
        return Vec(s * V.col(i));
      };
      break;
    }

    case BodyKind::LpBall: {
      const double s = desc->scale, p = desc->p;
      im->hint = s;
      im->volume = std::exp(n * (std::log(2.0) + std::lgamma(1.0 + 1.0 / p)) -
                            std::lgamma(1.0 + n / p) + n * std::log(s));
      if (p == 1.0) {
        return compile(BodyDesc::cross_polytope(n, s));
      }
      const double pd = p / (p - 1.0);
      im->gauge = [s, p](const Vec& x) {
        return std::pow(x.cwiseAbs().array().pow(p).sum(), 1.0 / p) / s;
      };
      im->sg = [s, p](const Vec& x) -> Vec {
        const double nrm = std::pow(x.cwiseAbs().array().pow(p).sum(), 1.0 / p);
        if (nrm <= 0) return Vec::Zero(x.size());
        return Vec(x.unaryExpr([&](double t) {
          return std::pow(std::abs(t) / nrm, p - 1.0) * (t >= 0 ? 1.0 : -1.0) / s;
        }));
      };
      im->support = [s, pd](const Vec& y) {
        return s * std::pow(y.cwiseAbs().array().pow(pd).sum(), 1.0 / pd);
      };
      im->pt = [s, pd](const Vec& y) -> Vec {
        const double nrm = std::pow(y.cwiseAbs().array().pow(pd).sum(), 1.0 / pd);
        if (nrm <= 0) return Vec::Zero(y.size());
        return Vec(y.unaryExpr([&](double t) {
          return s * std::pow(std::abs(t) / nrm, pd - 1.0) * (t >= 0 ? 1.0 : -1.0);
        }));
      };
      break;
    }

    case BodyKind::HPolytope: {
      const Mat A = desc->A;
      const Vec binv = desc->b.cwiseInverse();
      im->symmetric = false;
      im->hint = 1.0;
      im->gauge = [A, binv](const Vec& x) {
        return std::max(0.0, (A * x).cwiseProduct(binv).maxCoeff());
      };
      im->sg = [A, binv](const Vec& x) -> Vec {
        int i;
        (A * x).cwiseProduct(binv).maxCoeff(&i);
        return Vec(A.row(i).transpose() * binv[i]);
      };
      break;
    }

    case BodyKind::Ellipsoid: {
      const Mat& S = desc->M;
      if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw Error("ellipsoid: shape matrix not symmetric");
      Eigen::SelfAdjointEigenSolver<Mat> es(S);
      if (es.eigenvalues().minCoeff() <= 0)
        throw SingularTransform("ellipsoid: shape matrix not positive definite");
      const Mat Sinv = es.operatorInverseSqrt() * es.operatorInverseSqrt();
      const Mat sqrtS = es.operatorSqrt();
      im->hint = std::sqrt(es.eigenvalues().maxCoeff());
      im->volume = std::exp(unit_ball_log_volume(n) +
                            0.5 * es.eigenvalues().array().log().sum());
      im->gauge = [Sinv](const Vec& x) {
        return std::sqrt(std::max(0.0, x.dot(Sinv * x)));
      };
      im->sg = [Sinv](const Vec& x) -> Vec {
        const double g = std::sqrt(std::max(0.0, x.dot(Sinv * x)));
        return g > 0 ? Vec(Sinv * x / g) : Vec(Vec::Zero(x.size()));
      };
      im->support = [S = desc->M](const Vec& y) {
        return std::sqrt(std::max(0.0, y.dot(S * y)));
      };
      im->pt = [S = desc->M](const Vec& y) -> Vec {
        const double h = std::sqrt(std::max(0.0, y.dot(S * y)));
        return h > 0 ? Vec(S * y / h) : Vec(Vec::Zero(y.size()));
      };
      im->sampler = [sqrtS, n](RngStream& rng) -> Vec {
        const double u = rng.uniform_open();
        return sqrtS * (std::pow(u, 1.0 / n) * sample_sphere(n, rng));
      };
      break;
    }

    case BodyKind::Affine: {
      auto c = compile(desc->child);
      Eigen::FullPivLU<Mat> lu(desc->M);
      if (!lu.isInvertible())
        throw SingularTransform("affine: transform is singular");
      const Mat T = desc->M;
      const Mat Tinv = lu.inverse();
      const double absdet = std::abs(lu.determinant());
      im->symmetric = c->symmetric;
      im->hint = c->hint * T.norm();
      if (c->volume) im->volume = absdet * *c->volume;
      if (c->gauge) {
        im->gauge = [c, Tinv](const Vec& x) { return c->gauge(Tinv * x); };
        im->sg = [c, Tinv](const Vec& x) -> Vec {
          return Tinv.transpose() * c->sg(Tinv * x);
        };
      }
      if (c->support) {
        im->support = [c, T](const Vec& y) { return c->support(T.transpose() * y); };
        im->pt = [c, T](const Vec& y) -> Vec { return T * c->pt(T.transpose() * y); };
      }
      if (c->sampler)
        im->sampler = [c, T](RngStream& rng) -> Vec { return T * c->sampler(rng); };
      break;
    }

    case BodyKind::Rotation: {
      auto c = compile(desc->child);
      const Mat U = desc->M;
      im->symmetric = c->symmetric;
      im->hint = c->hint;
      im->volume = c->volume;
      if (c->gauge) {
        im->gauge = [c, U](const Vec& x) { return c->gauge(U.transpose() * x); };
        im->sg = [c, U](const Vec& x) -> Vec { return U * c->sg(U.transpose() * x); };
      }
      if (c->support) {
        im->support = [c, U](const Vec& y) { return c->support(U.transpose() * y); };
        im->pt = [c, U](const Vec& y) -> Vec { return U * c->pt(U.transpose() * y); };
      }
      if (c->sampler)
        im->sampler = [c, U](RngStream& rng) -> Vec { return U * c->sampler(rng); };
      break;
    }

    case BodyKind::Polar: {
      auto c = compile(desc->child);
      im->symmetric = c->symmetric;
      im->hint = 1e6;  // R(K°) = 1/r(K), unknown here; only guards bracketing
      // h_{K°} = gauge_K and gauge_{K°} = h_K; the subgradient of a support
      // function is its argmax point and vice versa.
      if (c->support) {
        im->gauge = c->support;
        im->sg = c->pt;
      }
      if (c->gauge) {
        im->support = c->gauge;
        im->pt = c->sg;
      }
      const auto& cd = desc->child;
      switch (cd->kind) {
        case BodyKind::Ball:
        case BodyKind::VolumeOneBall:
          im->volume = std::exp(unit_ball_log_volume(n) - n * std::log(cd->radius));
          im->hint = 1.0 / cd->radius;
          break;
        case BodyKind::Cube:
          im->volume = std::exp(n * std::log(4.0) - lfact(n));
          im->hint = 2.0;
          break;
        case BodyKind::CrossPolytope:
          im->volume = std::exp(n * std::log(2.0 / cd->scale));
          im->hint = 1.0 / cd->scale * std::sqrt(static_cast<double>(n));
          break;
        case BodyKind::Ellipsoid: {
          Eigen::SelfAdjointEigenSolver<Mat> es(cd->M);
          im->volume = std::exp(unit_ball_log_volume(n) -
                                0.5 * es.eigenvalues().array().log().sum());
          im->hint = 1.0 / std::sqrt(es.eigenvalues().minCoeff());
          break;
        }
        case BodyKind::LpBall: {
          const double pd = cd->p == 1.0 ? std::numeric_limits<double>::infinity()
                                         : cd->p / (cd->p - 1.0);
          if (std::isfinite(pd))
            im->volume = std::exp(n * (std::log(2.0) + std::lgamma(1.0 + 1.0 / pd)) -
                                  std::lgamma(1.0 + n / pd) - n * std::log(cd->scale));
          else
            im->volume = std::exp(-n * std::log(cd->scale));  // cube of side 2/s
          im->hint = std::pow(static_cast<double>(n), 1.0) / cd->scale;
          break;
        }
        default:
          break;
      }
      break;
    }

    case BodyKind::Section: {
      auto c = compile(desc->child);
      if (!c->gauge)
        throw OracleUnavailable("section: child body has no gauge route");
      const Mat F = desc->M;
      im->symmetric = c->symmetric;
      im->hint = c->hint;
      im->gauge = [c, F](const Vec& u) { return c->gauge(F * u); };
      im->sg = [c, F](const Vec& u) -> Vec { return F.transpose() * c->sg(F * u); };
      break;
    }

    case BodyKind::Projection: {
      auto c = compile(desc->child);
      if (!c->support)
        throw OracleUnavailable("projection: child body has no support route");
      const Mat F = desc->M;
      im->symmetric = c->symmetric;
      im->hint = c->hint;
      im->support = [c, F](const Vec& u) { return c->support(F * u); };
      im->pt = [c, F](const Vec& u) -> Vec { return F.transpose() * c->pt(F * u); };
      break;
    }

    case BodyKind::Intersection: {
      auto a = compile(desc->child);
      auto b = compile(desc->child2);
      if (!a->gauge || !b->gauge)
        throw OracleUnavailable("intersection: both children need a gauge route");
      im->symmetric = a->symmetric && b->symmetric;
      im->hint = std::min(a->hint, b->hint);
      im->gauge = [a, b](const Vec& x) { return std::max(a->gauge(x), b->gauge(x)); };
      im->sg = [a, b](const Vec& x) -> Vec {
        return a->gauge(x) >= b->gauge(x) ? a->sg(x) : b->sg(x);
      };
      break;
    }
  }
  return im;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvexBody

ConvexBody::ConvexBody(BodyPtr desc) : impl_(compile(desc)) {}

int ConvexBody::dim() const { return impl_->dim; }
bool ConvexBody::symmetric() const { return impl_->symmetric; }
const BodyPtr& ConvexBody::descriptor() const { return impl_->desc; }
bool ConvexBody::has_gauge() const { return static_cast<bool>(impl_->gauge); }
bool ConvexBody::has_support() const { return static_cast<bool>(impl_->support); }
bool ConvexBody::has_sampler() const { return static_cast<bool>(impl_->sampler); }
std::optional<double> ConvexBody::volume() const { return impl_->volume; }
double ConvexBody::radius_hint() const { return impl_->hint; }

double ConvexBody::gauge(const Vec& x) const {
  require_dim(x, impl_->dim, "gauge");
  if (!impl_->gauge) throw OracleUnavailable("body has no gauge route");
  return impl_->gauge(x);
}

double ConvexBody::support(const Vec& y) const {
  require_dim(y, impl_->dim, "support");
  if (!impl_->support) throw OracleUnavailable("body has no support route");
  return impl_->support(y);
}

bool ConvexBody::membership(const Vec& x) const { return gauge(x) <= 1.0 + 1e-12; }

double ConvexBody::radial(const Vec& theta) const { return 1.0 / gauge(theta); }

Vec ConvexBody::gauge_subgradient(const Vec& x) const {
  require_dim(x, impl_->dim, "gauge_subgradient");
  if (!impl_->sg) throw OracleUnavailable("body has no gauge route");
  return impl_->sg(x);
}

Vec ConvexBody::support_point(const Vec& y) const {
  require_dim(y, impl_->dim, "support_point");
  if (!impl_->pt) throw OracleUnavailable("body has no support route");
  return impl_->pt(y);
}

double ConvexBody::analytic_volume() const {
  if (!impl_->volume)
    throw VolumeUnavailable("no closed-form volume for this body");
  return *impl_->volume;
}

Vec ConvexBody::sample(RngStream& rng) const {
  if (!impl_->sampler) throw OracleUnavailable("body has no exact sampler");
  return impl_->sampler(rng);
}

// ---------------------------------------------------------------------------
// free-function module surface

double support(const ConvexBody& body, const Vec& y) { return body.support(y); }
double gauge(const ConvexBody& body, const Vec& x) { return body.gauge(x); }
bool membership(const ConvexBody& body, const Vec& x) { return body.membership(x); }
double analytic_volume(const ConvexBody& body) { return body.analytic_volume(); }

ConvexBody section_body(const ConvexBody& body, const Subspace& F) {
  return ConvexBody(BodyDesc::section(body.descriptor(), F));
}

ConvexBody projection_body(const ConvexBody& body, const Subspace& F) {
  return ConvexBody(BodyDesc::projection(body.descriptor(), F));
}

std::optional<double> known_isotropic_constant(const BodyPtr& desc) {
  if (!desc) return std::nullopt;
  const int n = desc->n;
  switch (desc->kind) {
    case BodyKind::Cube:
      return 1.0 / std::sqrt(12.0);
    case BodyKind::VolumeOneBall:
      return desc->radius / std::sqrt(n + 2.0);
    case BodyKind::Ball: {
      const double vol = std::exp(unit_ball_log_volume(n) + n * std::log(desc->radius));
      if (std::abs(vol - 1.0) > 1e-9) return std::nullopt;
      return desc->radius / std::sqrt(n + 2.0);
    }
    case BodyKind::CrossPolytope: {
      const double vol = std::exp(n * std::log(2.0 * desc->scale) - lfact(n));
      if (std::abs(vol - 1.0) > 1e-9) return std::nullopt;
      return desc->scale * std::sqrt(2.0 / ((n + 1.0) * (n + 2.0)));
    }
    case BodyKind::Simplex:
      return simplex_scale(n) / std::sqrt((n + 1.0) * (n + 2.0));
    case BodyKind::Rotation:
      return known_isotropic_constant(desc->child);
    default:
      return std::nullopt;
  }
}

}  // namespace isoscope
