#include "isoscope/rng.hpp"

#include <Eigen/QR>
#include <cmath>

namespace isoscope {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (Steele/Lea/Flood; Vigna's constants).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t root_seed) : key_(mix64(root_seed + kGolden)) {}

RngStream::RngStream(std::uint64_t key, int) : key_(key) {}

RngStream RngStream::derive(std::uint64_t task_id) const {
  // Fold the task id into the key with two mixing rounds so sibling streams
  // and parent continuations decorrelate.
  std::uint64_t k = mix64(key_ ^ mix64(task_id * kGolden + 0x6A09E667F3BCC909ULL));
  return RngStream(k, 0);
}

std::uint64_t RngStream::next_u64() {
  return mix64(key_ + kGolden * (++counter_));
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::gaussian() {
  const double u1 = uniform_open();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

bool RngStream::coin() { return (next_u64() & 1ULL) != 0; }

Vec sample_sphere(int n, RngStream& rng) {
  if (n < 1) throw DimensionMismatch("sample_sphere: n >= 1 required");
  Vec v(n);
  for (;;) {
    for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
    const double nrm = v.norm();
    if (nrm > 1e-150) return v / nrm;
  }
}

namespace {

// Sign-corrected QR: multiply column j of Q by sign(R_jj). Plain QR of a
// Gaussian matrix is not Haar-distributed; this correction makes it exact.
Mat haar_qr(int n, int m, RngStream& rng) {
  for (;;) {
    Mat G(n, m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i) G(i, j) = rng.gaussian();
    Eigen::HouseholderQR<Mat> qr(G);
    Mat Q = qr.householderQ() * Mat::Identity(n, m);
    const Mat& QR = qr.matrixQR();
    bool degenerate = false;
    for (int j = 0; j < m; ++j) {
      const double rjj = QR(j, j);
      if (std::abs(rjj) < 1e-12) { degenerate = true; break; }
      if (rjj < 0) Q.col(j) = -Q.col(j);
    }
    if (!degenerate) return Q;
    // numerically rank-deficient draw: resample
  }
}

}  // namespace

Subspace sample_grassmannian(int n, int m, RngStream& rng) {
  if (m < 1 || m > n)
    throw DimensionMismatch("sample_grassmannian: need 1 <= m <= n");
  return Subspace(haar_qr(n, m, rng));
}

Mat sample_orthogonal(int n, RngStream& rng) {
  if (n < 1) throw DimensionMismatch("sample_orthogonal: n >= 1 required");
  return haar_qr(n, n, rng);
}

}  // namespace isoscope
