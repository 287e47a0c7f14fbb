#pragma once

#include <cmath>
#include <limits>

namespace gwldp {

/// Streaming log(sum exp(x_i)); -inf terms are ignored.
class LogSumExp {
 public:
  void add(double x) noexcept {
    if (x == -std::numeric_limits<double>::infinity() || std::isnan(x)) return;
    if (x > max_) {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    } else {
      sum_ += std::exp(x - max_);
    }
  }
  double value() const noexcept {
    return sum_ == 0.0 ? -std::numeric_limits<double>::infinity() : max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

/// x log(x / y) with 0 log 0 = 0; +inf when x > 0 and y == 0.
inline double xlogx_over_y(double x, double y) noexcept {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return std::numeric_limits<double>::infinity();
  return x * std::log(x / y);
}

}  // namespace gwldp
