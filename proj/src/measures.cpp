#include "isoscope/measures.hpp"

#include <cmath>

#include "isoscope/parallel.hpp"

namespace isoscope {

namespace {
constexpr double kLaplaceScale = 0.70710678118654752440;  // b = 1/sqrt(2), unit variance
}

// ---------------------------------------------------------------------------
// descriptors

MeasurePtr MeasureDesc::uniform_on(BodyPtr body, int burn_in, int thinning) {
  if (!body) throw Error("uniform_on: null body");
  auto d = std::make_shared<MeasureDesc>();
  d->kind = MeasureKind::UniformOnBody;
  d->n = body->n;
  d->body = std::move(body);
  d->burn_in = burn_in;
  d->thinning = thinning;
  return d;
}

MeasurePtr MeasureDesc::gaussian(int n) {
  auto d = std::make_shared<MeasureDesc>();
  d->kind = MeasureKind::StandardGaussian;
  d->n = n;
  return d;
}

MeasurePtr MeasureDesc::laplace(int n) {
  auto d = std::make_shared<MeasureDesc>();
  d->kind = MeasureKind::LaplaceProduct;
  d->n = n;
  return d;
}

MeasurePtr MeasureDesc::pushforward(Mat T, MeasurePtr child) {
  if (!child) throw Error("pushforward: null child");
  if (T.rows() != T.cols() || T.rows() != child->n)
    throw DimensionMismatch("pushforward: T must match the child dimension");
  Eigen::FullPivLU<Mat> lu(T);
  if (!lu.isInvertible()) throw SingularTransform("pushforward: T is singular");
  auto d = std::make_shared<MeasureDesc>();
  d->kind = MeasureKind::Pushforward;
  d->n = child->n;
  d->T = std::move(T);
  d->child = std::move(child);
  return d;
}

MeasurePtr MeasureDesc::marginal(MeasurePtr child, const Subspace& E) {
  if (!child) throw Error("marginal: null child");
  if (E.ambient_dim() != child->n)
    throw DimensionMismatch("marginal: subspace ambient dim != measure dim");
  auto d = std::make_shared<MeasureDesc>();
  d->kind = MeasureKind::Marginal;
  d->n = E.dim();
  d->frame = E.frame();
  d->child = std::move(child);
  return d;
}

// ---------------------------------------------------------------------------
// measure impl

struct LogConcaveMeasure::Impl {
  MeasurePtr desc;
  int dim = 0;
  bool exact = true;
  ConvexBody body;  // uniform only
  std::shared_ptr<const Impl> child;
  std::optional<double> sup_density;
  // moment oracle flag (Gaussian only)
  bool gaussian_moments = false;
};

namespace {

using MImpl = LogConcaveMeasure::Impl;

std::shared_ptr<const MImpl> compile_measure(const MeasurePtr& desc) {
  auto im = std::make_shared<MImpl>();
  im->desc = desc;
  im->dim = desc->n;
  if (desc->n < 1) throw DimensionMismatch("measure dimension must be >= 1");
  switch (desc->kind) {
    case MeasureKind::UniformOnBody: {
      im->body = ConvexBody(desc->body);
      im->exact = im->body.has_sampler();
      if (!im->exact && !im->body.has_gauge())
        throw OracleUnavailable("uniform measure needs a sampler or gauge route");
      if (auto v = im->body.volume()) im->sup_density = 1.0 / *v;
      break;
    }
    case MeasureKind::StandardGaussian:
      im->sup_density = std::exp(-0.5 * desc->n * std::log(2.0 * M_PI));
      im->gaussian_moments = true;
      break;
    case MeasureKind::LaplaceProduct:
      im->sup_density = std::exp(-desc->n * std::log(2.0 * kLaplaceScale));
      break;
    case MeasureKind::Pushforward: {
      auto c = compile_measure(desc->child);
      im->child = c;
      im->exact = c->exact;
      if (c->sup_density) {
        const double absdet = std::abs(Eigen::FullPivLU<Mat>(desc->T).determinant());
        im->sup_density = *c->sup_density / absdet;
      }
      break;
    }
    case MeasureKind::Marginal: {
      auto c = compile_measure(desc->child);
      im->child = c;
      im->exact = c->exact;
      // density of a marginal exists but its supremum has no closed form here
      break;
    }
  }
  return im;
}

double gaussian_cq(double q) {
  return std::exp(0.5 * std::log(2.0) +
                  (std::lgamma(0.5 * (q + 1.0)) - std::lgamma(0.5)) / q);
}

}  // namespace

LogConcaveMeasure::LogConcaveMeasure(MeasurePtr desc) : impl_(compile_measure(desc)) {}

int LogConcaveMeasure::dim() const { return impl_->dim; }
const MeasurePtr& LogConcaveMeasure::descriptor() const { return impl_->desc; }
bool LogConcaveMeasure::exact() const { return impl_->exact; }
std::optional<double> LogConcaveMeasure::sup_density() const { return impl_->sup_density; }
const ConvexBody& LogConcaveMeasure::body() const { return impl_->body; }

std::optional<double> LogConcaveMeasure::moment_oracle(double q, const Vec& y) const {
  if (impl_->gaussian_moments) return gaussian_cq(q) * y.norm();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// chords and hit-and-run

std::pair<double, double> chord_endpoints(const ConvexBody& body, const Vec& x,
                                          const Vec& theta) {
  if (!body.membership(x)) throw Error("chord_endpoints: x not in body");
  const double cap = 1e6 * std::max(body.radius_hint(), 1.0);
  auto hit = [&](double sgn) {
    // g(t) = gauge(x + t*sgn*theta) is convex in t with g(0) <= 1
    double lo = 0.0, hi = 1.0;
    while (body.gauge(x + (sgn * hi) * theta) <= 1.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > cap)
        throw UnboundedChord("chord bracketing exceeded radius cap (oracle bug?)");
    }
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      if (body.gauge(x + (sgn * mid) * theta) <= 1.0)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  return {-hit(-1.0), hit(+1.0)};
}

Vec hit_and_run_step(const ConvexBody& body, const Vec& x, RngStream& rng) {
  const Vec theta = sample_sphere(body.dim(), rng);
  const auto [tmin, tmax] = chord_endpoints(body, x, theta);
  const double t = tmin + rng.uniform01() * (tmax - tmin);
  return x + t * theta;
}

// ---------------------------------------------------------------------------
// sampler sessions

struct MeasureSampler::Node {
  const MImpl* im;
  std::unique_ptr<Node> child;
  // chain state (uniform-on-body without exact sampler)
  Vec state;
  int thinning = 0;
  bool chain = false;

  explicit Node(const MImpl* impl, RngStream& rng) : im(impl) {
    if (im->child) child = std::make_unique<Node>(im->child.get(), rng);
    if (im->desc->kind == MeasureKind::UniformOnBody && !im->body.has_sampler()) {
      chain = true;
      const int n = im->dim;
      state = Vec::Zero(n);
      if (!im->body.membership(state))
        throw NoInteriorPoint("hit-and-run cannot start: origin not in body");
      const int burn = im->desc->burn_in >= 0 ? im->desc->burn_in : 100 * n;
      thinning = im->desc->thinning >= 0 ? im->desc->thinning : n;
      for (int i = 0; i < burn; ++i) state = hit_and_run_step(im->body, state, rng);
    }
  }

  Vec draw(RngStream& rng) {
    switch (im->desc->kind) {
      case MeasureKind::UniformOnBody:
        if (chain) {
          for (int i = 0; i < std::max(1, thinning); ++i)
            state = hit_and_run_step(im->body, state, rng);
          return state;
        }
        return im->body.sample(rng);
      case MeasureKind::StandardGaussian: {
        Vec x(im->dim);
        for (int i = 0; i < im->dim; ++i) x[i] = rng.gaussian();
        return x;
      }
      case MeasureKind::LaplaceProduct: {
        Vec x(im->dim);
        for (int i = 0; i < im->dim; ++i) {
          const double u = rng.uniform_open();
          const double mag = -kLaplaceScale * std::log(u);
          x[i] = rng.coin() ? mag : -mag;
        }
        return x;
      }
      case MeasureKind::Pushforward:
        return im->desc->T * child->draw(rng);
      case MeasureKind::Marginal:
        return im->desc->frame.transpose() * child->draw(rng);
    }
    throw Error("unreachable");
  }
};

MeasureSampler::MeasureSampler(const LogConcaveMeasure& mu, RngStream rng)
    : keep_alive_(mu.impl_), rng_(rng) {
  root_ = std::make_unique<Node>(keep_alive_.get(), rng_);
}

MeasureSampler::~MeasureSampler() = default;
MeasureSampler::MeasureSampler(MeasureSampler&&) noexcept = default;

Vec MeasureSampler::next() { return root_->draw(rng_); }

Vec sample(const LogConcaveMeasure& mu, RngStream& rng) {
  // nonce-derived child so successive calls yield independent draws
  MeasureSampler s(mu, rng.derive(rng.next_u64()));
  return s.next();
}

Mat sample_matrix(const LogConcaveMeasure& mu, int n_samples, const RngStream& rng) {
  Mat X(n_samples, mu.dim());
  const int nb = par::batch_count(n_samples);
  par::for_each_index(nb, [&](int b) {
    std::int64_t lo, hi;
    par::batch_range(n_samples, nb, b, &lo, &hi);
    MeasureSampler s(mu, rng.derive(b));
    for (std::int64_t i = lo; i < hi; ++i) X.row(i) = s.next().transpose();
  });
  return X;
}

LogConcaveMeasure marginal(const LogConcaveMeasure& mu, const Subspace& E) {
  return LogConcaveMeasure(MeasureDesc::marginal(mu.descriptor(), E));
}

LogConcaveMeasure pushforward(const LogConcaveMeasure& mu, const Mat& T) {
  return LogConcaveMeasure(MeasureDesc::pushforward(T, mu.descriptor()));
}

LogConcaveMeasure isotropic_body_measure(const BodyPtr& body) {
  const auto L = known_isotropic_constant(body);
  if (!L)
    throw Error("isotropic_body_measure: body has no closed-form isotropic constant");
  const int n = body->n;
  const Mat T = Mat::Identity(n, n) / *L;
  return LogConcaveMeasure(MeasureDesc::uniform_on(BodyDesc::affine(T, body)));
}

}  // namespace isoscope
