#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace isoscope {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleUnavailable : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct SingularTransform : Error { using Error::Error; };
struct VolumeUnavailable : Error { using Error::Error; };
struct DensityUnavailable : Error { using Error::Error; };
struct RankDeficientCovariance : Error { using Error::Error; };
struct DimensionTooLarge : Error { using Error::Error; };
struct UnboundedChord : Error { using Error::Error; };
struct NoInteriorPoint : Error { using Error::Error; };
struct QOutOfRange : Error { using Error::Error; };
struct NoRoot : Error { using Error::Error; };
struct AllZeroInnerProducts : Error { using Error::Error; };
struct ObjectiveNonFinite : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Volume of the n-dimensional Euclidean unit ball, via lgamma.
double unit_ball_log_volume(int n);
double unit_ball_volume(int n);

inline void require_dim(const Vec& v, int n, const char* what) {
  if (v.size() != n)
    throw DimensionMismatch(std::string(what) + ": expected length " +
                            std::to_string(n) + ", got " +
                            std::to_string(v.size()));
}

}  // namespace isoscope
