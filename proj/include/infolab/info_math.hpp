#pragma once

// Finite-alphabet information measures. Every exported quantity is in bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "infolab/errors.hpp"

namespace infolab {

/// A probability vector over a finite set of outcomes.
///
/// Construction validates: at least one entry, every entry finite and
/// non-negative, entries summing to 1 within `kSumTolerance`.
class CategoricalDistribution {
public:
    static constexpr double kSumTolerance = 1e-12;

    explicit CategoricalDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
        validate();
    }

    static CategoricalDistribution uniform(std::size_t n) {
        if (n == 0) throw InvalidDistribution("uniform distribution needs at least one outcome");
        return CategoricalDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    static CategoricalDistribution point_mass(std::size_t n, std::size_t index) {
        if (index >= n) throw InvalidDistribution("point mass index outside the outcome set");
        std::vector<double> p(n, 0.0);
        p[index] = 1.0;
        return CategoricalDistribution(std::move(p));
    }

    /// Normalizes non-negative weights; throws if they are all zero.
    static CategoricalDistribution from_weights(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) {
            if (!std::isfinite(w) || w < 0.0)
                throw InvalidDistribution("weights must be finite and non-negative");
            total += w;
        }
        if (!(total > 0.0)) throw InvalidDistribution("weights sum to zero");
        std::vector<double> p(weights.begin(), weights.end());
        for (double& x : p) x /= total;
        return CategoricalDistribution(std::move(p));
    }

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> probs() const noexcept { return probs_; }

    friend bool operator==(const CategoricalDistribution&, const CategoricalDistribution&) = default;

private:
    void validate() const {
        if (probs_.empty()) throw InvalidDistribution("distribution has no outcomes");
        double total = 0.0;
        for (double p : probs_) {
            if (!std::isfinite(p) || p < 0.0)
                throw InvalidDistribution("probabilities must be finite and non-negative");
            total += p;
        }
        if (std::abs(total - 1.0) > kSumTolerance)
            throw InvalidDistribution("probabilities sum to " + std::to_string(total));
    }

    std::vector<double> probs_;
};

/// Shannon entropy -sum p log2 p, with 0 log 0 = 0.
inline double entropy_bits(const CategoricalDistribution& p) {
    double h = 0.0;
    for (double x : p.probs())
        if (x > 0.0) h -= x * std::log2(x);
    return std::max(h, 0.0);
}

/// KL(p || q) in bits. Mass of p on a zero of q is reported as
/// SupportViolation instead of returning infinity.
inline double kl_bits(const CategoricalDistribution& p, const CategoricalDistribution& q) {
    if (p.size() != q.size()) throw LengthMismatch("kl_bits: distributions differ in length");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0)
            throw SupportViolation("kl_bits: p has mass on outcome " + std::to_string(i) +
                                   " where q is zero");
        d += p[i] * std::log2(p[i] / q[i]);
    }
    // Rounding can leave a tiny negative residue when p == q.
    return std::max(d, 0.0);
}

/// exp(logw - logsumexp(logw)). Entries equal to -inf get probability zero;
/// at least one entry must be finite.
inline CategoricalDistribution normalize_log_weights(std::span<const double> logw) {
    if (logw.empty()) throw InvalidDistribution("normalize_log_weights: empty input");
    double top = -std::numeric_limits<double>::infinity();
    for (double v : logw) {
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
            throw InvalidDistribution("normalize_log_weights: log-weights must be finite or -inf");
        top = std::max(top, v);
    }
    if (!std::isfinite(top))
        throw InvalidDistribution("normalize_log_weights: every weight is zero");
    std::vector<double> p(logw.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
        p[i] = std::exp(logw[i] - top);
        total += p[i];
    }
    for (double& x : p) x /= total;
    return CategoricalDistribution(std::move(p));
}

/// (1 - lambda) * point_mass(0) + lambda * uniform(n).
inline CategoricalDistribution entropy_prior_mixture(std::size_t n, double lambda) {
    if (n == 0) throw InvalidDistribution("mixture prior needs at least one outcome");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidTarget("mixture weight outside [0, 1]");
    const double u = lambda / static_cast<double>(n);
    std::vector<double> p(n, u);
    p[0] = (1.0 - lambda) + u;
    return CategoricalDistribution(std::move(p));
}

/// Prior over `n` outcomes whose entropy is `target_bits` within `tol`.
///
/// Searches the point-mass/uniform mixture family by bisection on the mixing
/// weight; entropy is strictly increasing in that weight and spans
/// [0, log2 n], so any admissible target is reachable.
inline CategoricalDistribution make_entropy_prior(std::size_t n, double target_bits, double tol = 1e-9) {
    if (n == 0) throw InvalidTarget("entropy prior needs at least one outcome");
    const double max_bits = std::log2(static_cast<double>(n));
    if (!(tol > 0.0)) throw InvalidTarget("tolerance must be positive");
    if (!(target_bits >= 0.0) || target_bits > max_bits + 1e-12)
        throw InvalidTarget("target entropy " + std::to_string(target_bits) + " outside [0, " +
                            std::to_string(max_bits) + "]");
    if (target_bits <= 0.0) return CategoricalDistribution::point_mass(n, 0);
    if (target_bits >= max_bits) return CategoricalDistribution::uniform(n);

    double lo = 0.0;
    double hi = 1.0;
    double mid = 0.5;
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        const double h = entropy_bits(entropy_prior_mixture(n, mid));
        if (std::abs(h - target_bits) <= tol) break;
        (h < target_bits ? lo : hi) = mid;
    }
    return entropy_prior_mixture(n, mid);
}

/// The k-th smallest value with k = ceil(level * n) clamped to [1, n].
///
/// level * n is rounded down by 1e-9 before the ceiling so that products
/// such as 0.7 * 10 that land a few ulps above an integer keep their
/// intended rank.
inline double quantile(std::span<const double> values, double level) {
    if (values.empty()) throw InvalidDistribution("quantile of an empty sample");
    const auto n = static_cast<std::ptrdiff_t>(values.size());
    auto k = static_cast<std::ptrdiff_t>(std::ceil(level * static_cast<double>(n) - 1e-9));
    k = std::clamp<std::ptrdiff_t>(k, 1, n);
    std::vector<double> sorted(values.begin(), values.end());
    std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
    return sorted[static_cast<std::size_t>(k - 1)];
}

}  // namespace infolab
