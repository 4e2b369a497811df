#pragma once

#include <cmath>
#include <span>

namespace semdist {

// Neumaier-compensated summation accumulator.
class StableSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double stable_sum(std::span<const double> xs) noexcept {
  StableSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

}  // namespace semdist
