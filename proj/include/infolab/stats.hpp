#pragma once

// Sample means with 2-sigma error bars, err = 2 s / sqrt(n), where s is the
// sample (n - 1) standard deviation. A single observation has err 0.

#include <cmath>
#include <cstddef>
#include <span>

namespace infolab::stats {

struct Summary {
    double mean = 0.0;
    double err = 0.0;
    std::size_t n = 0;

    /// Standard error of the mean, err / 2.
    double standard_error() const noexcept { return 0.5 * err; }
};

/// Welford accumulator; feeding the same values in the same order always
/// produces the same bits.
class Accumulator {
public:
    void add(double x) noexcept {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double sample_variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

    Summary summary() const noexcept {
        const double err = n_ > 1 ? 2.0 * std::sqrt(sample_variance()) / std::sqrt(static_cast<double>(n_)) : 0.0;
        return {mean_, err, n_};
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline Summary summarize(std::span<const double> values) {
    Accumulator acc;
    for (double v : values) acc.add(v);
    return acc.summary();
}

}  // namespace infolab::stats
