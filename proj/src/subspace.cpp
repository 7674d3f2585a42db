#include "isoscope/subspace.hpp"

namespace isoscope {

Subspace::Subspace(Mat frame) : frame_(std::move(frame)) {
  const int n = static_cast<int>(frame_.rows());
  const int m = static_cast<int>(frame_.cols());
  if (m < 1 || m > n)
    throw DimensionMismatch("Subspace: need 1 <= dim <= ambient_dim");
  const Mat gram = frame_.transpose() * frame_;
  const double err = (gram - Mat::Identity(m, m)).cwiseAbs().maxCoeff();
  if (err > 1e-10)
    throw Error("Subspace: frame not orthonormal (deviation " +
                std::to_string(err) + ")");
}

Subspace Subspace::axes(int n, int m) {
  return Subspace(Mat::Identity(n, n).leftCols(m));
}

Vec Subspace::lift(const Vec& u) const {
  require_dim(u, dim(), "Subspace::lift");
  return frame_ * u;
}

Vec Subspace::project(const Vec& x) const {
  require_dim(x, ambient_dim(), "Subspace::project");
  return frame_.transpose() * x;
}

}  // namespace isoscope
