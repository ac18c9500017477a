#pragma once

#include <cmath>
#include <cstdint>

#include "voterlab/errors.hpp"

namespace voterlab {

inline constexpr double z_95 = 1.959963984540054;
inline constexpr double z_99 = 2.5758293035489004;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return lo <= v && v <= hi; }
    double width() const { return hi - lo; }
};

// Wilson score interval for a binomial proportion; well-behaved when the
// frequency sits at or near 0 or 1, which fixation estimates routinely do.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) throw invalid_parameter("Wilson interval needs at least one trial");
    if (successes > trials) throw invalid_parameter("successes exceed trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half =
        z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Streaming mean/variance accumulator (Welford).
class RunningStats {
public:
    void add(double v) {
        ++count_;
        const double delta = v - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (v - mean_);
    }

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }

    double variance() const {
        return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
    }

    double stderr_mean() const {
        return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    }

    Interval normal_interval(double z) const {
        const double half = z * stderr_mean();
        return {mean_ - half, mean_ + half};
    }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

} // namespace voterlab
