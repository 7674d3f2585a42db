#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "isoscope/common.hpp"

namespace testutil {

// One-sample Kolmogorov-Smirnov statistic against a CDF given as a callable.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::abs(f - (i + 1) / n));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

// 1% critical value for the KS statistic at large N.
inline double ks_crit_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

inline double sample_corr(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// E|g|^q for standard normal, i.e. c_q^q; c_q = sqrt(2)(Gamma((q+1)/2)/Gamma(1/2))^{1/q}
inline double gaussian_cq(double q) {
  return std::exp(0.5 * std::log(2.0) +
                  (std::lgamma(0.5 * (q + 1.0)) - std::lgamma(0.5)) / q);
}

}  // namespace testutil
