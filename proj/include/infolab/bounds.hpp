#pragma once

// Numeric evaluators for Fano-type regret lower bounds, information-budget
// bounds and entropy bounds, plus grid oracles for covering and packing
// numbers of small boxes.
//
// Logarithms are base 2 throughout: information budgets R and entropies H
// are in bits, and log K means log2 K.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infolab/errors.hpp"

namespace infolab::bounds {

// ---------------------------------------------------------------------------
// Fano reduction and mutual-information bounds

/// Right-hand side of the Fano regret reduction,
///   (T eps / 2) [1 - (I + 1) / log2 K],
/// returned unclamped (it is negative once I + 1 exceeds log2 K).
inline double fano_rhs(double horizon, double epsilon, double hypotheses, double info_bits) {
    if (!(hypotheses >= 2.0)) throw DomainError("fano_rhs: need at least two hypotheses");
    if (!(epsilon > 0.0)) throw DomainError("fano_rhs: epsilon must be positive");
    if (!(info_bits >= 0.0)) throw DomainError("fano_rhs: information bound must be non-negative");
    return 0.5 * horizon * epsilon * (1.0 - (info_bits + 1.0) / std::log2(hypotheses));
}

/// I(V; H_T) <= 2 A eps^2 T for parametric decision spaces.
inline double mi_parametric(double a_bar, double epsilon, double horizon) {
    return 2.0 * a_bar * epsilon * epsilon * horizon;
}

struct MiMinimum {
    double bits = 0.0;
    double delta = 0.0;  // minimizing grid point
};

/// min over `delta_grid` of log_covering(sqrt(delta)) + T delta.
inline MiMinimum mi_nonparametric(double horizon, const std::function<double(double)>& log_covering,
                                  std::span<const double> delta_grid) {
    if (delta_grid.empty()) throw EmptyGrid("mi_nonparametric: empty delta grid");
    MiMinimum best{std::numeric_limits<double>::infinity(), delta_grid.front()};
    for (double delta : delta_grid) {
        const double v = log_covering(std::sqrt(delta)) + horizon * delta;
        if (v < best.bits) best = {v, delta};
    }
    return best;
}

/// Default search: 4000 log-spaced points on [1e-12, 1], then one refinement
/// with 4000 linear points between the neighbours of the best point.
inline MiMinimum mi_nonparametric(double horizon, const std::function<double(double)>& log_covering) {
    constexpr std::size_t kPoints = 4000;
    constexpr double kLogLo = -12.0;
    std::vector<double> grid(kPoints);
    for (std::size_t i = 0; i < kPoints; ++i)
        grid[i] = std::pow(10.0, kLogLo * (1.0 - static_cast<double>(i) / (kPoints - 1)));
    const auto coarse = mi_nonparametric(horizon, log_covering, grid);

    const auto it = std::lower_bound(grid.begin(), grid.end(), coarse.delta);
    const std::size_t at = static_cast<std::size_t>(it - grid.begin());
    const double lo = grid[at == 0 ? 0 : at - 1];
    const double hi = grid[std::min(at + 1, kPoints - 1)];
    std::vector<double> fine(kPoints);
    for (std::size_t i = 0; i < kPoints; ++i)
        fine[i] = lo + (hi - lo) * static_cast<double>(i) / (kPoints - 1);
    const auto refined = mi_nonparametric(horizon, log_covering, fine);
    return refined.bits < coarse.bits ? refined : coarse;
}

// ---------------------------------------------------------------------------
// Closed-form bounds

enum class Kind {
    FiniteMabLB,
    LinearLB,
    LipschitzLB,
    BitsMabLB,
    BitsLinearLB,
    TsBitsUB,
    TsBitsLinearUB,
    EntropyMabLB,
    RussoEntropyUB,
    RlFiniteLB,
};

inline constexpr std::array<std::pair<Kind, std::string_view>, 10> kKindNames{{
    {Kind::FiniteMabLB, "FiniteMabLB"},
    {Kind::LinearLB, "LinearLB"},
    {Kind::LipschitzLB, "LipschitzLB"},
    {Kind::BitsMabLB, "BitsMabLB"},
    {Kind::BitsLinearLB, "BitsLinearLB"},
    {Kind::TsBitsUB, "TsBitsUB"},
    {Kind::TsBitsLinearUB, "TsBitsLinearUB"},
    {Kind::EntropyMabLB, "EntropyMabLB"},
    {Kind::RussoEntropyUB, "RussoEntropyUB"},
    {Kind::RlFiniteLB, "RlFiniteLB"},
}};

inline std::string_view to_string(Kind k) {
    for (const auto& [kind, name] : kKindNames)
        if (kind == k) return name;
    return "?";
}

inline Kind parse_kind(std::string_view name) {
    for (const auto& [kind, n] : kKindNames)
        if (n == name) return kind;
    throw DomainError("unknown bound kind '" + std::string(name) + "'");
}

/// Parameters of a bound evaluation. Only the fields a kind needs must be
/// set; a_bar and kappa carry defaults.
struct Query {
    std::optional<double> T;        // horizon, rounds
    std::optional<double> K;        // arms / decisions
    std::optional<double> d;        // dimension
    std::optional<double> R;        // information budget, bits
    std::optional<double> H;        // prior entropy H(pi*), bits
    double a_bar = 1.0;             // KL-vs-metric regularity constant
    std::optional<double> c;        // minimal-information constant of entropy bounds
    std::optional<double> c1;       // Lipschitz metric-dimension constants
    std::optional<double> c2;
    std::optional<double> S;        // states (tabular RL plug-in)
    std::optional<double> episode_length;  // episode horizon (tabular RL plug-in)
    double kappa = 1.0 / std::numbers::sqrt2;  // constant of the entropy upper bound
};

struct Result {
    Kind kind = Kind::FiniteMabLB;
    double raw = 0.0;
    double clamped = 0.0;  // max(raw, 0)
    std::optional<double> chosen_epsilon;
    std::string notes;
};

namespace detail {

inline double need(const std::optional<double>& v, const char* name, Kind kind) {
    if (!v) throw MissingParameter(std::string(to_string(kind)) + " needs parameter " + name);
    return *v;
}

inline void check(bool ok, Kind kind, const std::string& what) {
    if (!ok) throw DomainError(std::string(to_string(kind)) + ": " + what);
}

inline Result make(Kind kind, double raw, std::optional<double> eps, std::string notes = {}) {
    return Result{kind, raw, std::max(raw, 0.0), eps, std::move(notes)};
}

/// Linear regret T/2 (1 - 1/K) of an agent that accumulates no information.
inline Result zero_information(Kind kind, double t, double k) {
    return make(kind, 0.5 * t * (1.0 - 1.0 / k), 1.0, "R = 0: linear regret");
}

inline void check_budget(Kind kind, double r, double k) {
    check(r >= 0.0, kind, "R must be non-negative");
    check(r <= std::log2(k) * (1.0 + 1e-12), kind, "R must not exceed log2 K");
}

}  // namespace detail

/// (1/2) sqrt(T (K - 1) / (6 A)) (2/3 - 1/(K - 1)), at eps = sqrt((K - 1) / (6 T A)).
inline double finite_mab_lb(double t, double k, double a_bar) {
    return 0.5 * std::sqrt(t * (k - 1.0) / (6.0 * a_bar)) * (2.0 / 3.0 - 1.0 / (k - 1.0));
}

/// (1/2) sqrt(T d / (6 A)) (2/3 - 1/d).
inline double linear_lb(double t, double d, double a_bar) {
    return 0.5 * std::sqrt(t * d / (6.0 * a_bar)) * (2.0 / 3.0 - 1.0 / d);
}

/// (1/2) sqrt(T K log2 K / (6 R A)) (2/3 - 1/(K - 1)).
inline double bits_mab_lb(double t, double k, double r, double a_bar) {
    return 0.5 * std::sqrt(t * k * std::log2(k) / (6.0 * r * a_bar)) * (2.0 / 3.0 - 1.0 / (k - 1.0));
}

/// (1/2) sqrt(T d log2 K / (6 R A)) (2/3 - 1/d).
inline double bits_linear_lb(double t, double d, double k, double r, double a_bar) {
    return 0.5 * std::sqrt(t * d * std::log2(k) / (6.0 * r * a_bar)) * (2.0 / 3.0 - 1.0 / d);
}

/// log2 K sqrt(K T / (2 R)).
inline double ts_bits_ub(double t, double k, double r) { return std::log2(k) * std::sqrt(k * t / (2.0 * r)); }

/// log2 K sqrt(d T / (2 R)).
inline double ts_bits_linear_ub(double t, double d, double k, double r) {
    return std::log2(k) * std::sqrt(d * t / (2.0 * r));
}

struct LipschitzChoice {
    double delta = 0.0;
    double epsilon = 0.0;
    double value = 0.0;
};

/// Lipschitz-bandit lower bound eps T / 4 with
///   delta = T^{2/(d+2)} c2^{-2/(d+2)} 2^{-d/(d+2)},
///   eps^d = (1/2) c1 / (1 + 2 (2 c2)^{-d/(d+2)} T^{d/(d+2)}).
inline LipschitzChoice lipschitz_lb(double t, double d, double c1, double c2) {
    const double p = d / (d + 2.0);
    LipschitzChoice out;
    out.delta = std::pow(t, 2.0 / (d + 2.0)) * std::pow(c2, -2.0 / (d + 2.0)) * std::pow(2.0, -p);
    const double eps_d = 0.5 * c1 / (1.0 + 2.0 * std::pow(2.0 * c2, -p) * std::pow(t, p));
    out.epsilon = std::pow(eps_d, 1.0 / d);
    out.value = out.epsilon * t / 4.0;
    return out;
}

/// Evaluates one closed-form bound. Negative raw values (small K or d) are
/// kept in `raw` and floored at zero in `clamped`.
inline Result eval_closed_form(Kind kind, const Query& q) {
    using detail::check;
    using detail::need;
    check(q.a_bar > 0.0, kind, "A_bar must be positive");
    const double t = need(q.T, "T", kind);
    check(t >= 0.0, kind, "T must be non-negative");

    switch (kind) {
    case Kind::FiniteMabLB: {
        const double k = need(q.K, "K", kind);
        check(k >= 2.0, kind, "K must be at least 2");
        const std::optional<double> eps =
            t > 0.0 ? std::optional(std::sqrt((k - 1.0) / (6.0 * t * q.a_bar))) : std::nullopt;
        return detail::make(kind, finite_mab_lb(t, k, q.a_bar), eps);
    }
    case Kind::LinearLB: {
        const double d = need(q.d, "d", kind);
        check(d >= 1.0, kind, "d must be at least 1");
        const std::optional<double> eps =
            t > 0.0 ? std::optional(std::sqrt(d / (6.0 * t * q.a_bar))) : std::nullopt;
        return detail::make(kind, linear_lb(t, d, q.a_bar), eps);
    }
    case Kind::LipschitzLB: {
        const double d = need(q.d, "d", kind);
        const double c1 = need(q.c1, "c1", kind);
        const double c2 = need(q.c2, "c2", kind);
        check(d >= 1.0, kind, "d must be at least 1");
        check(c1 > 0.0 && c2 > 0.0, kind, "c1 and c2 must be positive");
        const auto choice = lipschitz_lb(t, d, c1, c2);
        return detail::make(kind, choice.value, choice.epsilon, "delta=" + std::to_string(choice.delta));
    }
    case Kind::BitsMabLB: {
        const double k = need(q.K, "K", kind);
        const double r = need(q.R, "R", kind);
        check(k >= 2.0, kind, "K must be at least 2");
        detail::check_budget(kind, r, k);
        if (r == 0.0) return detail::zero_information(kind, t, k);
        const std::optional<double> eps =
            t > 0.0 ? std::optional(std::sqrt((k - 1.0) * std::log2(k) / (6.0 * r * t * q.a_bar))) : std::nullopt;
        return detail::make(kind, bits_mab_lb(t, k, r, q.a_bar), eps);
    }
    case Kind::BitsLinearLB: {
        const double d = need(q.d, "d", kind);
        const double k = need(q.K, "K", kind);
        const double r = need(q.R, "R", kind);
        check(d >= 1.0, kind, "d must be at least 1");
        check(k >= 2.0, kind, "K must be at least 2");
        detail::check_budget(kind, r, k);
        if (r == 0.0) return detail::zero_information(kind, t, k);
        const std::optional<double> eps =
            t > 0.0 ? std::optional(std::sqrt(d * std::log2(k) / (6.0 * r * q.a_bar * t))) : std::nullopt;
        return detail::make(kind, bits_linear_lb(t, d, k, r, q.a_bar), eps);
    }
    case Kind::TsBitsUB: {
        const double k = need(q.K, "K", kind);
        const double r = need(q.R, "R", kind);
        check(k >= 2.0, kind, "K must be at least 2");
        detail::check_budget(kind, r, k);
        check(r > 0.0, kind, "the upper bound needs R > 0");
        return detail::make(kind, ts_bits_ub(t, k, r), std::nullopt);
    }
    case Kind::TsBitsLinearUB: {
        const double d = need(q.d, "d", kind);
        const double k = need(q.K, "K", kind);
        const double r = need(q.R, "R", kind);
        check(d >= 1.0, kind, "d must be at least 1");
        check(k >= 2.0, kind, "K must be at least 2");
        detail::check_budget(kind, r, k);
        check(r > 0.0, kind, "the upper bound needs R > 0");
        return detail::make(kind, ts_bits_linear_ub(t, d, k, r), std::nullopt);
    }
    case Kind::EntropyMabLB: {
        const double k = need(q.K, "K", kind);
        const double h = need(q.H, "H", kind);
        const double c = need(q.c, "c", kind);
        check(k >= 2.0, kind, "K must be at least 2");
        check(h >= 0.0 && h <= std::log2(k) * (1.0 + 1e-12), kind, "H must lie in [0, log2 K]");
        check(c > 0.0, kind, "c must be positive");
        const double factor = 2.0 * std::sqrt(c * h / std::log2(k));
        return detail::make(kind, factor * finite_mab_lb(t, k, q.a_bar), std::nullopt,
                            "factor=" + std::to_string(factor));
    }
    case Kind::RussoEntropyUB: {
        const double k = need(q.K, "K", kind);
        const double h = need(q.H, "H", kind);
        check(k >= 2.0, kind, "K must be at least 2");
        check(h >= 0.0 && h <= std::log2(k) * (1.0 + 1e-12), kind, "H must lie in [0, log2 K]");
        return detail::make(kind, q.kappa * std::sqrt(k * t * h), std::nullopt,
                            "big-O bound; kappa=" + std::to_string(q.kappa) + " is a chosen constant");
    }
    case Kind::RlFiniteLB: {
        const double k = need(q.K, "K", kind);
        const double s = need(q.S, "S", kind);
        const double len = need(q.episode_length, "episode_length", kind);
        check(k >= 1.0 && s >= 1.0 && len >= 1.0, kind, "K, S and episode length must be at least 1");
        const double decisions = len * s * k;
        check(decisions >= 2.0, kind, "need at least two deterministic policies");
        const std::optional<double> eps =
            t > 0.0 ? std::optional(std::sqrt((decisions - 1.0) / (6.0 * t * q.a_bar))) : std::nullopt;
        return detail::make(kind, finite_mab_lb(t, decisions, q.a_bar), eps,
                            "decisions=" + std::to_string(decisions));
    }
    }
    throw DomainError("unhandled bound kind");
}

// ---------------------------------------------------------------------------
// Covering and packing numbers on grids over boxes

enum class Metric { L1, L2, Linf };

inline Metric parse_metric(std::string_view name) {
    if (name == "l1" || name == "L1") return Metric::L1;
    if (name == "l2" || name == "L2") return Metric::L2;
    if (name == "linf" || name == "Linf" || name == "LINF") return Metric::Linf;
    throw DomainError("unknown metric '" + std::string(name) + "'");
}

/// Axis-aligned box [lo, hi]^dim sampled on a regular grid. The grid step is
/// the largest value <= `step` that divides the side evenly, so both faces
/// are on the grid. lo == hi gives a single point.
struct BoxGrid {
    std::size_t dim = 1;
    double lo = 0.0;
    double hi = 1.0;
    double step = 0.01;

    std::size_t intervals() const {
        if (hi == lo) return 0;
        return static_cast<std::size_t>(std::ceil((hi - lo) / step - 1e-9));
    }
    std::size_t points_per_axis() const { return intervals() + 1; }
    double coordinate(std::size_t i) const {
        const std::size_t n = intervals();
        return n == 0 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    }
};

namespace detail {

inline void validate(const BoxGrid& g, double epsilon) {
    if (g.dim < 1 || g.dim > 3) throw DomainError("grid dimension must be 1, 2 or 3");
    if (!(g.hi >= g.lo)) throw DomainError("grid needs hi >= lo");
    if (!(g.step > 0.0)) throw DomainError("grid step must be positive");
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
}

inline double distance(Metric m, std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = std::abs(a[i] - b[i]);
        switch (m) {
        case Metric::L1: acc += diff; break;
        case Metric::L2: acc += diff * diff; break;
        case Metric::Linf: acc = std::max(acc, diff); break;
        }
    }
    return m == Metric::L2 ? std::sqrt(acc) : acc;
}

/// All grid points in row-major order (first coordinate slowest).
inline std::vector<double> grid_points(const BoxGrid& g) {
    const std::size_t n = g.points_per_axis();
    std::size_t total = 1;
    for (std::size_t k = 0; k < g.dim; ++k) total *= n;
    std::vector<double> pts(total * g.dim);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (std::size_t k = g.dim; k-- > 0;) {
            pts[idx * g.dim + k] = g.coordinate(rem % n);
            rem /= n;
        }
    }
    return pts;
}

// Grid coordinates are exact multiples of the step only up to rounding;
// comparisons against epsilon allow this much slack.
inline double slack(double epsilon) { return 1e-12 * std::max(1.0, epsilon); }

}  // namespace detail

/// Size of a maximal packing built by first-fit over the grid in row-major
/// order: a point joins when its distance to every chosen point is >= eps
/// (or > eps when `strict`). A lower bound on the packing number of the grid.
inline std::size_t greedy_packing_number(const BoxGrid& g, Metric m, double epsilon, bool strict = false) {
    detail::validate(g, epsilon);
    const auto pts = detail::grid_points(g);
    const std::size_t dim = g.dim;
    const std::size_t total = pts.size() / dim;
    const double tol = detail::slack(epsilon);
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < total; ++i) {
        const std::span<const double> p(pts.data() + i * dim, dim);
        bool separated = true;
        for (std::size_t c : chosen) {
            const double dist = detail::distance(m, p, std::span<const double>(pts.data() + c * dim, dim));
            if (strict ? dist <= epsilon + tol : dist < epsilon - tol) {
                separated = false;
                break;
            }
        }
        if (separated) chosen.push_back(i);
    }
    return chosen.size();
}

/// Size of a greedy eps-cover of the grid (an upper bound on its covering
/// number). The first uncovered point in row-major order seeds a ball whose
/// centre is the seed shifted towards `hi` by eps / dim (L1),
/// eps / sqrt(dim) (L2) or eps (Linf) per coordinate, clipped to the box;
/// every grid point within eps of the centre is then marked covered.
inline std::size_t greedy_covering_number(const BoxGrid& g, Metric m, double epsilon) {
    detail::validate(g, epsilon);
    const auto pts = detail::grid_points(g);
    const std::size_t dim = g.dim;
    const std::size_t total = pts.size() / dim;
    const double tol = detail::slack(epsilon);
    const double shift = m == Metric::L1   ? epsilon / static_cast<double>(dim)
                         : m == Metric::L2 ? epsilon / std::sqrt(static_cast<double>(dim))
                                           : epsilon;
    std::vector<char> covered(total, 0);
    std::vector<double> centre(dim);
    std::size_t balls = 0;
    for (std::size_t i = 0; i < total; ++i) {
        if (covered[i]) continue;
        ++balls;
        for (std::size_t k = 0; k < dim; ++k) centre[k] = std::min(pts[i * dim + k] + shift, g.hi);
        // Points before i are already covered.
        for (std::size_t j = i; j < total; ++j) {
            if (covered[j]) continue;
            if (detail::distance(m, std::span<const double>(pts.data() + j * dim, dim), centre) <= epsilon + tol)
                covered[j] = 1;
        }
    }
    return balls;
}

/// Exact covering number of the grid of a box under Linf by closed eps-balls
/// centred anywhere in the box. Linf balls are products of intervals and the
/// box is a product of grids, so the answer is the 1-D optimum raised to the
/// dimension; the 1-D optimum is the left-to-right sweep that centres each
/// interval eps to the right of the leftmost uncovered point.
inline std::size_t exact_covering_number_linf(const BoxGrid& g, double epsilon) {
    detail::validate(g, epsilon);
    const double tol = detail::slack(epsilon);
    const std::size_t n = g.points_per_axis();
    std::size_t per_axis = 0;
    std::size_t i = 0;
    while (i < n) {
        ++per_axis;
        const double reach = g.coordinate(i) + 2.0 * epsilon + tol;
        while (i < n && g.coordinate(i) <= reach) ++i;
    }
    std::size_t total = 1;
    for (std::size_t k = 0; k < g.dim; ++k) total *= per_axis;
    return total;
}

}  // namespace infolab::bounds
