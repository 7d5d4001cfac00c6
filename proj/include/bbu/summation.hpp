#pragma once

#include <cmath>
#include <span>

namespace bbu {

/// Neumaier-compensated accumulator. The disparity identities are asserted
/// down to 1e-12, which naive summation does not reliably deliver on
/// unbalanced samples.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

inline double compensated_mean(std::span<const double> xs) {
    return compensated_sum(xs) / static_cast<double>(xs.size());
}

}  // namespace bbu
