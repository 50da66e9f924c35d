#pragma once

// Needle-in-a-haystack Bernoulli bandit with a single context.

#include <cstddef>
#include <string>

#include "infolab/errors.hpp"
#include "infolab/info_math.hpp"
#include "infolab/random.hpp"

namespace infolab {

/// K Bernoulli arms; the optimal arm has mean (1 + gap) / 2 and every other
/// arm has mean (1 - gap) / 2.
class NeedleBandit {
public:
    NeedleBandit(std::size_t arms, double gap, std::size_t optimal_arm)
        : arms_(arms), gap_(gap), optimal_arm_(optimal_arm) {
        if (arms < 2) throw OutOfRange("needle bandit needs at least two arms");
        // gap == 1 is admitted so degenerate deterministic arms can be built.
        if (!(gap > 0.0 && gap <= 1.0)) throw OutOfRange("gap must lie in (0, 1]");
        if (optimal_arm >= arms) throw OutOfRange("optimal arm index out of range");
    }

    std::size_t arms() const noexcept { return arms_; }
    double gap() const noexcept { return gap_; }
    std::size_t optimal_arm() const noexcept { return optimal_arm_; }

    /// The simulator fixes a single context; kept so records line up with the
    /// general contextual setting.
    static constexpr int context() noexcept { return 0; }

private:
    std::size_t arms_;
    double gap_;
    std::size_t optimal_arm_;
};

inline NeedleBandit sample_instance(const CategoricalDistribution& prior, std::size_t arms, double gap,
                                    Rng& rng) {
    if (prior.size() != arms) throw LengthMismatch("prior length differs from the arm count");
    return NeedleBandit(arms, gap, sample_categorical(prior, rng));
}

inline double mean_reward(const NeedleBandit& b, std::size_t arm) {
    if (arm >= b.arms()) throw OutOfRange("arm " + std::to_string(arm) + " out of range");
    return arm == b.optimal_arm() ? 0.5 * (1.0 + b.gap()) : 0.5 * (1.0 - b.gap());
}

inline int pull(const NeedleBandit& b, std::size_t arm, Rng& rng) {
    return bernoulli(rng, mean_reward(b, arm)) ? 1 : 0;
}

/// Expected one-round regret of playing `decision`: gap * (1 - decision[optimal]).
inline double per_round_regret(const NeedleBandit& b, const CategoricalDistribution& decision) {
    if (decision.size() != b.arms()) throw LengthMismatch("decision length differs from the arm count");
    return b.gap() * (1.0 - decision[b.optimal_arm()]);
}

/// One round of a run. Regret is kept both in expected form (from the
/// decision distribution) and in realized form (optimal mean minus reward).
struct RunRecord {
    std::size_t t = 0;  // 1-based round index
    int context = 0;
    CategoricalDistribution decision = CategoricalDistribution::uniform(1);
    std::size_t arm = 0;
    int reward = 0;
    double inst_regret = 0.0;
    double inst_regret_realized = 0.0;
    double cum_regret = 0.0;
    double cum_regret_realized = 0.0;
    double bits = 0.0;
};

}  // namespace infolab
