#include "isoscope/common.hpp"

#include <cmath>

namespace isoscope {

double unit_ball_log_volume(int n) {
  return 0.5 * n * std::log(M_PI) - std::lgamma(0.5 * n + 1.0);
}

double unit_ball_volume(int n) { return std::exp(unit_ball_log_volume(n)); }

}  // namespace isoscope
