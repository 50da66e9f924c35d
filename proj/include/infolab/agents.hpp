#pragma once

// Bandit agents for the needle bandit, with per-round information accounting.
//
// Agent contract: next_decision() returns the distribution the agent plays
// this round; the caller samples an arm from it, pulls, and reports the
// outcome through observe(arm, reward).

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "infolab/bandit_env.hpp"
#include "infolab/errors.hpp"
#include "infolab/info_math.hpp"
#include "infolab/random.hpp"

namespace infolab {

class Agent {
public:
    virtual ~Agent() = default;
    virtual CategoricalDistribution next_decision() = 0;
    virtual void observe(std::size_t arm, int reward) = 0;
};

/// Information the agent's decision carries about the optimal arm:
/// KL(decision || prior) in bits.
inline double bits_accumulated(const CategoricalDistribution& decision, const CategoricalDistribution& prior) {
    return kl_bits(decision, prior);
}

// ---------------------------------------------------------------------------
// Thompson sampling over the K candidate optimal-arm models.

struct ArmCounts {
    explicit ArmCounts(std::size_t arms = 0) : successes(arms, 0), failures(arms, 0) {}

    std::vector<std::uint64_t> successes;
    std::vector<std::uint64_t> failures;

    std::size_t arms() const noexcept { return successes.size(); }
    std::uint64_t total() const noexcept {
        std::uint64_t n = 0;
        for (std::size_t i = 0; i < arms(); ++i) n += successes[i] + failures[i];
        return n;
    }
};

/// Exact posterior P(optimal = i | history) for the needle bandit.
///
/// Model i makes arm i pay with probability (1 + gap) / 2 and every other arm
/// with (1 - gap) / 2, so
///   P(history | i) = a^{S_i} b^{F_i} * prod_{j != i} b^{S_j} a^{F_j},
/// a = (1 + gap) / 2, b = (1 - gap) / 2. Evaluated in log space; arms with
/// zero prior mass keep zero posterior mass.
inline CategoricalDistribution ts_posterior(const ArmCounts& counts, double gap,
                                            const CategoricalDistribution& prior) {
    if (!(gap > 0.0 && gap < 1.0)) throw DomainError("ts_posterior: gap must lie in (0, 1)");
    const std::size_t k = prior.size();
    if (counts.arms() != k) throw LengthMismatch("ts_posterior: counts and prior differ in length");
    if (counts.total() == 0) return prior;

    const double log_a = std::log(0.5 * (1.0 + gap));
    const double log_b = std::log(0.5 * (1.0 - gap));
    std::vector<double> logw(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (prior[i] == 0.0) {
            logw[i] = -std::numeric_limits<double>::infinity();
            continue;
        }
        double ll = std::log(prior[i]);
        for (std::size_t j = 0; j < k; ++j) {
            const auto s = static_cast<double>(counts.successes[j]);
            const auto f = static_cast<double>(counts.failures[j]);
            ll += (j == i) ? s * log_a + f * log_b : s * log_b + f * log_a;
        }
        logw[i] = ll;
    }
    return normalize_log_weights(logw);
}

class ThompsonSampling final : public Agent {
public:
    ThompsonSampling(CategoricalDistribution prior, double gap)
        : prior_(std::move(prior)), gap_(gap), counts_(prior_.size()) {}

    CategoricalDistribution next_decision() override { return ts_posterior(counts_, gap_, prior_); }

    void observe(std::size_t arm, int reward) override {
        if (arm >= counts_.arms()) throw OutOfRange("ThompsonSampling: arm out of range");
        ++(reward != 0 ? counts_.successes : counts_.failures)[arm];
    }

    const ArmCounts& counts() const noexcept { return counts_; }

private:
    CategoricalDistribution prior_;
    double gap_;
    ArmCounts counts_;
};

// ---------------------------------------------------------------------------
// EXP3: exponential weights, importance-weighted gains, uniform exploration.

struct Exp3State {
    double gamma = 0.0;
    std::vector<double> log_weights;  // weights are exp(log_weights), always > 0
    CategoricalDistribution decision = CategoricalDistribution::uniform(1);

    std::vector<double> weights() const {
        std::vector<double> w(log_weights.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i]);
        return w;
    }
};

/// Default exploration rate min(1, sqrt(K log2 K / ((e - 1) T))).
inline double default_exp3_gamma(std::size_t arms, std::size_t horizon) {
    const auto k = static_cast<double>(arms);
    const auto t = static_cast<double>(std::max<std::size_t>(horizon, 1));
    return std::min(1.0, std::sqrt(k * std::log2(k) / ((std::numbers::e - 1.0) * t)));
}

namespace detail {
inline CategoricalDistribution exp3_mix(const std::vector<double>& log_weights, double gamma) {
    const auto soft = normalize_log_weights(log_weights);
    const double floor = gamma / static_cast<double>(soft.size());
    std::vector<double> p(soft.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = (1.0 - gamma) * soft[i] + floor;
    return CategoricalDistribution::from_weights(p);
}
}  // namespace detail

inline Exp3State exp3_init(std::size_t arms, double gamma) {
    if (arms < 1) throw OutOfRange("EXP3 needs at least one arm");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("EXP3 gamma must lie in (0, 1]");
    Exp3State s;
    s.gamma = gamma;
    s.log_weights.assign(arms, 0.0);
    s.decision = CategoricalDistribution::uniform(arms);
    return s;
}

/// Applies gain estimate reward / p_arm to the pulled arm only:
/// w_arm <- w_arm * exp(gamma * estimate / K), then re-mixes the decision.
inline void exp3_step(Exp3State& s, std::size_t arm, double reward) {
    if (arm >= s.log_weights.size()) throw OutOfRange("exp3_step: arm out of range");
    if (!(reward >= 0.0 && reward <= 1.0)) throw DomainError("exp3_step: reward must lie in [0, 1]");
    if (reward == 0.0) return;
    const double estimate = reward / s.decision[arm];
    s.log_weights[arm] += s.gamma * estimate / static_cast<double>(s.log_weights.size());
    s.decision = detail::exp3_mix(s.log_weights, s.gamma);
}

class Exp3 final : public Agent {
public:
    Exp3(std::size_t arms, double gamma) : state_(exp3_init(arms, gamma)) {}

    CategoricalDistribution next_decision() override { return state_.decision; }
    void observe(std::size_t arm, int reward) override { exp3_step(state_, arm, reward); }

    const Exp3State& state() const noexcept { return state_; }

private:
    Exp3State state_;
};

// ---------------------------------------------------------------------------
// Zero-information baseline: never learns, always plays uniformly.

inline CategoricalDistribution no_feedback_decision(std::size_t arms) {
    return CategoricalDistribution::uniform(arms);
}

class NoFeedback final : public Agent {
public:
    explicit NoFeedback(std::size_t arms) : arms_(arms) {}
    CategoricalDistribution next_decision() override { return no_feedback_decision(arms_); }
    void observe(std::size_t, int) override {}

private:
    std::size_t arms_;
};

// ---------------------------------------------------------------------------
// Construction by name. Additional agents plug in through AgentRegistry.

struct AgentSpec {
    std::string type;   // registry key, e.g. "ThompsonSampling"
    std::string label;  // unique per suite; also feeds the agent's seed path
    std::map<std::string, double> params;
};

struct AgentContext {
    std::size_t arms = 0;
    double gap = 0.0;
    std::size_t horizon = 0;
    CategoricalDistribution prior = CategoricalDistribution::uniform(1);
};

using AgentFactory = std::function<std::unique_ptr<Agent>(const AgentSpec&, const AgentContext&)>;

/// Name -> factory table. Register extra agents before starting any run; the
/// table is read concurrently by worker threads and is not locked.
class AgentRegistry {
public:
    static AgentRegistry& instance() {
        static AgentRegistry registry = with_builtins();
        return registry;
    }

    void add(std::string type, AgentFactory factory) { factories_[std::move(type)] = std::move(factory); }
    bool contains(const std::string& type) const { return factories_.contains(type); }

    std::unique_ptr<Agent> make(const AgentSpec& spec, const AgentContext& ctx) const {
        auto it = factories_.find(spec.type);
        if (it == factories_.end()) throw DomainError("unknown agent type '" + spec.type + "'");
        return it->second(spec, ctx);
    }

private:
    static AgentRegistry with_builtins() {
        AgentRegistry r;
        r.add("ThompsonSampling", [](const AgentSpec&, const AgentContext& c) -> std::unique_ptr<Agent> {
            return std::make_unique<ThompsonSampling>(c.prior, c.gap);
        });
        r.add("Exp3", [](const AgentSpec& s, const AgentContext& c) -> std::unique_ptr<Agent> {
            auto it = s.params.find("gamma");
            const double gamma = it != s.params.end() ? it->second : default_exp3_gamma(c.arms, c.horizon);
            return std::make_unique<Exp3>(c.arms, gamma);
        });
        r.add("NoFeedback", [](const AgentSpec&, const AgentContext& c) -> std::unique_ptr<Agent> {
            return std::make_unique<NoFeedback>(c.arms);
        });
        return r;
    }

    std::map<std::string, AgentFactory> factories_;
};

// ---------------------------------------------------------------------------

/// Plays `agent` against `bandit` for `horizon` rounds. Bits are measured on
/// the decision before the arm is sampled. All randomness (arm choice and
/// reward) comes from `rng`, drawn in that order each round.
inline std::vector<RunRecord> run_agent(const NeedleBandit& bandit, Agent& agent,
                                        const CategoricalDistribution& prior, std::size_t horizon, Rng& rng) {
    std::vector<RunRecord> trace;
    trace.reserve(horizon);
    const double best = mean_reward(bandit, bandit.optimal_arm());
    double cum = 0.0;
    double cum_realized = 0.0;
    for (std::size_t t = 1; t <= horizon; ++t) {
        RunRecord rec;
        rec.t = t;
        rec.context = NeedleBandit::context();
        rec.decision = agent.next_decision();
        rec.bits = bits_accumulated(rec.decision, prior);
        rec.inst_regret = per_round_regret(bandit, rec.decision);
        rec.arm = sample_categorical(rec.decision, rng);
        rec.reward = pull(bandit, rec.arm, rng);
        rec.inst_regret_realized = best - rec.reward;
        cum += rec.inst_regret;
        cum_realized += rec.inst_regret_realized;
        rec.cum_regret = cum;
        rec.cum_regret_realized = cum_realized;
        agent.observe(rec.arm, rec.reward);
        trace.push_back(std::move(rec));
    }
    return trace;
}

}  // namespace infolab
