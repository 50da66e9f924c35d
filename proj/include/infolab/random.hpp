#pragma once

// Seeded randomness with bit-identical output across platforms.
//
// std::mt19937_64 is fully specified by the standard; the distribution
// helpers below are written out by hand because the std:: distributions are
// implementation-defined.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <string_view>

#include "infolab/info_math.hpp"

namespace infolab {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// 64-bit FNV-1a, used to turn stream labels into seed-path components.
inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Child seed for a path below a master seed:
///   h0 = splitmix64(master), h_{i+1} = splitmix64(h_i ^ splitmix64(path_i)).
/// Distinct paths give statistically independent streams, and a stream
/// depends only on its own path.
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t v : path) h = splitmix64(h ^ splitmix64(v));
    return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Standard normal by the Marsaglia polar method; one pair is drawn per call
/// and the second value discarded so every call consumes whole pairs.
inline double standard_normal(Rng& rng) {
    for (;;) {
        const double u = 2.0 * uniform01(rng) - 1.0;
        const double v = 2.0 * uniform01(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

/// Inverse-CDF lookup of `u` in [0, 1). Never returns a zero-mass outcome.
inline std::size_t categorical_index(const CategoricalDistribution& p, double u) {
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        last = i;
        acc += p[i];
        if (u < acc) return i;
    }
    return last;  // u landed in the rounding slack above the final partial sum
}

inline std::size_t sample_categorical(const CategoricalDistribution& p, Rng& rng) {
    return categorical_index(p, uniform01(rng));
}

}  // namespace infolab
