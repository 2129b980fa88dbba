#pragma once

#if defined(__FAST_MATH__)
#error "compensated summation is meaningless under -ffast-math"
#endif

#include <cmath>
#include <span>

namespace opinion_lab {

/// Neumaier's variant of Kahan summation.
///
/// Terms are folded in the order they are added, so two accumulators fed the
/// same sequence produce bit-identical results. The running error term is
/// carried separately and only folded back in by value().
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(double initial) : sum_(initial) {}

    CompensatedSum& operator+=(double term) {
        const double t = sum_ + term;
        if (std::abs(sum_) >= std::abs(term)) {
            carry_ += (sum_ - t) + term;
        } else {
            carry_ += (term - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    [[nodiscard]] double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> terms) {
    CompensatedSum acc;
    for (double t : terms) acc += t;
    return acc.value();
}

}  // namespace opinion_lab
