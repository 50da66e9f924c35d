#pragma once

// Two-expert cascade for multiple-choice questions. A cheap expert always
// answers first; the information content of its answer distribution (KL from
// uniform, in bits) decides whether the costly expert is consulted.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "infolab/errors.hpp"
#include "infolab/external_expert.hpp"
#include "infolab/info_math.hpp"
#include "infolab/parallel.hpp"
#include "infolab/random.hpp"
#include "infolab/stats.hpp"

namespace infolab::router {

struct Question {
    long long id = 0;
    double difficulty = 0.0;       // in [0, 1]; simulator construct
    std::size_t correct_option = 0;
    std::size_t option_count = 4;
};

enum class ExpertKind { Simulated, External };

struct ExpertSpec {
    ExpertKind kind = ExpertKind::Simulated;
    double skill = 0.5;
    double sharpness = 4.0;  // logit scale a
    double noise = 1.0;      // std-dev of wrong-option logits
    double cost = 0.0;       // charged per query
    std::string command;     // External only
    std::chrono::milliseconds timeout = ExternalProcess::kDefaultTimeout;
};

enum class Route { Small, Large };

inline std::string_view to_string(Route r) { return r == Route::Small ? "Small" : "Large"; }

struct RoutingEpisode {
    long long question_id = 0;
    CategoricalDistribution small_dist = CategoricalDistribution::uniform(1);
    double bits_score = 0.0;
    Route routed_to = Route::Small;
    std::size_t answered_option = 0;
    bool correct = false;
    double regret = 0.0;
};

// ---------------------------------------------------------------------------

/// KL(answer || uniform) = log2 L - H(answer), in bits.
inline double bits_score(const CategoricalDistribution& answer) {
    return kl_bits(answer, CategoricalDistribution::uniform(answer.size()));
}

/// Softmax of logits z with z_correct = a (skill - difficulty) and
/// z_wrong ~ Normal(0, noise) drawn fresh from `rng`, in option order.
inline CategoricalDistribution simulated_answer(const Question& q, const ExpertSpec& e, Rng& rng) {
    if (e.kind != ExpertKind::Simulated) throw DomainError("simulated_answer needs a simulated expert");
    if (q.option_count < 2 || q.correct_option >= q.option_count)
        throw DomainError("question needs >= 2 options and a valid correct option");
    std::vector<double> z(q.option_count);
    for (std::size_t j = 0; j < z.size(); ++j)
        z[j] = j == q.correct_option ? e.sharpness * (e.skill - q.difficulty) : e.noise * standard_normal(rng);
    return normalize_log_weights(z);
}

/// Draws an option from `answer` by inverse CDF over the order
/// (correct option, then the rest in index order). Each draw has law
/// `answer`; ordering the correct option first makes correctness monotone in
/// the shared uniform, so policies that see the same draw are compared on
/// common random numbers.
inline std::size_t sample_answer(const CategoricalDistribution& answer, std::size_t correct_option, Rng& rng) {
    if (correct_option >= answer.size()) throw DomainError("correct option out of range");
    const double u = uniform01(rng);
    double acc = answer[correct_option];
    if (u < acc) return correct_option;
    std::size_t last = correct_option;
    for (std::size_t j = 0; j < answer.size(); ++j) {
        if (j == correct_option || answer[j] == 0.0) continue;
        acc += answer[j];
        last = j;
        if (u < acc) return j;
    }
    return last;  // rounding left u just above the total mass
}

class Expert {
public:
    virtual ~Expert() = default;
    virtual CategoricalDistribution answer(const Question& q, Rng& rng) = 0;
};

class SimulatedExpert final : public Expert {
public:
    explicit SimulatedExpert(ExpertSpec spec) : spec_(std::move(spec)) {}
    CategoricalDistribution answer(const Question& q, Rng& rng) override { return simulated_answer(q, spec_, rng); }

private:
    ExpertSpec spec_;
};

/// Sends synthetic questions to an adapter process. The payload is a JSON
/// document describing the question; real adapters map ids to their own
/// question text.
class ExternalExpert final : public Expert {
public:
    explicit ExternalExpert(const ExpertSpec& spec) : process_(spec.command, spec.timeout) {}

    CategoricalDistribution answer(const Question& q, Rng&) override {
        nlohmann::json payload{{"difficulty", q.difficulty}};
        const auto reply = process_.round_trip(encode_expert_request(q.id, q.option_count, payload.dump()));
        return decode_expert_response(reply, q.id, q.option_count);
    }

private:
    ExternalProcess process_;
};

inline std::unique_ptr<Expert> make_expert(const ExpertSpec& spec) {
    if (spec.kind == ExpertKind::External) return std::make_unique<ExternalExpert>(spec);
    return std::make_unique<SimulatedExpert>(spec);
}

// ---------------------------------------------------------------------------

/// Threshold under which a score routes to the large expert, chosen so that a
/// fraction `target_rate` of `scores` is routed there (ties count as Large).
/// Rate 0 yields -inf, i.e. never route.
inline double calibrate_threshold(std::span<const double> scores, double target_rate) {
    if (scores.empty()) throw DomainError("calibrate_threshold: no scores");
    if (!(target_rate >= 0.0 && target_rate <= 1.0)) throw DomainError("target rate must lie in [0, 1]");
    if (target_rate == 0.0) return -std::numeric_limits<double>::infinity();
    return quantile(scores, target_rate);
}

enum class PolicyKind { BitsBased, Random, AlwaysSmall, AlwaysLarge };

inline std::string_view to_string(PolicyKind k) {
    switch (k) {
    case PolicyKind::BitsBased: return "BitsBased";
    case PolicyKind::Random: return "Random";
    case PolicyKind::AlwaysSmall: return "AlwaysSmall";
    case PolicyKind::AlwaysLarge: return "AlwaysLarge";
    }
    return "?";
}

inline PolicyKind parse_policy(std::string_view name) {
    for (auto k : {PolicyKind::BitsBased, PolicyKind::Random, PolicyKind::AlwaysSmall, PolicyKind::AlwaysLarge})
        if (to_string(k) == name) return k;
    throw DomainError("unknown routing policy '" + std::string(name) + "'");
}

struct RoutingPolicy {
    PolicyKind kind = PolicyKind::BitsBased;
    double large_probability = 0.5;  // Random only
    // Default escalates uncertain answers (low score). `invert` escalates
    // confident answers instead: Large iff score >= threshold.
    bool invert = false;
};

/// Random consumes exactly one uniform draw; the other policies draw nothing.
inline Route route(double score, double threshold, const RoutingPolicy& policy, Rng& rng) {
    switch (policy.kind) {
    case PolicyKind::BitsBased:
        if (policy.invert) return score >= threshold ? Route::Large : Route::Small;
        return score <= threshold ? Route::Large : Route::Small;
    case PolicyKind::Random: return bernoulli(rng, policy.large_probability) ? Route::Large : Route::Small;
    case PolicyKind::AlwaysSmall: return Route::Small;
    case PolicyKind::AlwaysLarge: return Route::Large;
    }
    return Route::Small;
}

/// Regret against an oracle that answers correctly for free:
/// 1[incorrect] + large_cost * 1[routed Large].
inline double episode_regret(bool correct, Route routed, double large_cost) {
    return (correct ? 0.0 : 1.0) + (routed == Route::Large ? large_cost : 0.0);
}

/// One question. Draws from `rng` in order: small answer, routing, large
/// answer (only if routed Large), answer sampling.
inline RoutingEpisode episode(const Question& q, Expert& small, Expert& large, double large_cost,
                              const RoutingPolicy& policy, double threshold, Rng& rng) {
    RoutingEpisode ep;
    ep.question_id = q.id;
    ep.small_dist = small.answer(q, rng);
    ep.bits_score = bits_score(ep.small_dist);
    ep.routed_to = route(ep.bits_score, threshold, policy, rng);
    const auto chosen = ep.routed_to == Route::Large ? large.answer(q, rng) : ep.small_dist;
    ep.answered_option = sample_answer(chosen, q.correct_option, rng);
    ep.correct = ep.answered_option == q.correct_option;
    ep.regret = episode_regret(ep.correct, ep.routed_to, large_cost);
    return ep;
}

// ---------------------------------------------------------------------------
// Multi-seed experiment

struct ExperimentSettings {
    std::size_t option_count = 4;
    std::size_t n_questions = 200;
    std::size_t n_seeds = 10;
    std::vector<double> target_rates{0.5};
    std::vector<PolicyKind> policies{PolicyKind::BitsBased, PolicyKind::Random, PolicyKind::AlwaysSmall,
                                     PolicyKind::AlwaysLarge};
    bool invert = false;
    ExpertSpec small{ExpertKind::Simulated, 0.45, 4.0, 1.0, 0.0, {}, ExternalProcess::kDefaultTimeout};
    ExpertSpec large{ExpertKind::Simulated, 0.8, 4.0, 1.0, 0.1, {}, ExternalProcess::kDefaultTimeout};
    std::uint64_t master_seed = 0;
    std::size_t jobs = 1;
};

struct LoggedEpisode {
    std::size_t seed = 0;
    double target_rate = 0.0;
    PolicyKind policy = PolicyKind::BitsBased;
    RoutingEpisode episode;
};

struct SeedSummary {
    std::size_t seed = 0;
    double target_rate = 0.0;
    PolicyKind policy = PolicyKind::BitsBased;
    double threshold = 0.0;
    double total_regret = 0.0;
    double deployment_rate = 0.0;
};

struct PolicySummary {
    double target_rate = 0.0;
    PolicyKind policy = PolicyKind::BitsBased;
    stats::Summary regret;
    stats::Summary deployment;
};

struct ExperimentReport {
    std::vector<SeedSummary> per_seed;    // seed-major, then rate, then policy
    std::vector<PolicySummary> summary;   // rate-major, then policy
    std::vector<LoggedEpisode> episodes;  // seed, rate, policy, question order
};

namespace detail {

inline std::uint64_t stream(const ExperimentSettings& s, std::size_t seed, std::string_view name, long long qid = -1) {
    return derive_seed(s.master_seed, {seed, fnv1a(name), static_cast<std::uint64_t>(qid)});
}

struct SeedResult {
    std::vector<SeedSummary> summaries;
    std::vector<LoggedEpisode> episodes;
};

/// Every policy sees the same questions, the same expert answers and the same
/// per-question random draws; expert answers are computed once per question
/// and shared, the large one only when some policy asks for it.
inline SeedResult run_seed(const ExperimentSettings& s, std::size_t seed) {
    Rng question_rng = make_rng(stream(s, seed, "questions"));
    std::vector<Question> questions(s.n_questions);
    for (std::size_t i = 0; i < s.n_questions; ++i) {
        auto& q = questions[i];
        q.id = static_cast<long long>(i);
        q.option_count = s.option_count;
        q.difficulty = uniform01(question_rng);
        q.correct_option = static_cast<std::size_t>(uniform01(question_rng) * static_cast<double>(s.option_count));
    }

    auto small = make_expert(s.small);
    auto large = make_expert(s.large);
    std::vector<CategoricalDistribution> small_dists;
    std::vector<double> scores;
    small_dists.reserve(questions.size());
    for (const auto& q : questions) {
        Rng r = make_rng(stream(s, seed, "small", q.id));
        small_dists.push_back(small->answer(q, r));
        scores.push_back(bits_score(small_dists.back()));
    }
    std::vector<std::optional<CategoricalDistribution>> large_dists(questions.size());
    auto large_answer = [&](std::size_t i) -> const CategoricalDistribution& {
        if (!large_dists[i]) {
            Rng r = make_rng(stream(s, seed, "large", questions[i].id));
            large_dists[i] = large->answer(questions[i], r);
        }
        return *large_dists[i];
    };

    SeedResult out;
    for (double rate : s.target_rates) {
        double threshold = calibrate_threshold(scores, rate);
        if (s.invert) {
            // Mirror the calibration so the inverted rule still deploys `rate`.
            std::vector<double> negated(scores.size());
            std::transform(scores.begin(), scores.end(), negated.begin(), [](double v) { return -v; });
            threshold = -calibrate_threshold(negated, rate);
        }
        for (PolicyKind kind : s.policies) {
            const RoutingPolicy policy{kind, rate, s.invert};
            SeedSummary sum{seed, rate, kind, threshold, 0.0, 0.0};
            std::size_t deployed = 0;
            for (std::size_t i = 0; i < questions.size(); ++i) {
                const auto& q = questions[i];
                Rng route_rng = make_rng(stream(s, seed, "route", q.id));
                Rng answer_rng = make_rng(stream(s, seed, "answer", q.id));
                RoutingEpisode ep;
                ep.question_id = q.id;
                ep.small_dist = small_dists[i];
                ep.bits_score = scores[i];
                ep.routed_to = route(ep.bits_score, threshold, policy, route_rng);
                const auto& chosen = ep.routed_to == Route::Large ? large_answer(i) : small_dists[i];
                ep.answered_option = sample_answer(chosen, q.correct_option, answer_rng);
                ep.correct = ep.answered_option == q.correct_option;
                ep.regret = episode_regret(ep.correct, ep.routed_to, s.large.cost);
                sum.total_regret += ep.regret;
                deployed += ep.routed_to == Route::Large ? 1 : 0;
                out.episodes.push_back({seed, rate, kind, std::move(ep)});
            }
            sum.deployment_rate = static_cast<double>(deployed) / static_cast<double>(questions.size());
            out.summaries.push_back(sum);
        }
    }
    return out;
}

}  // namespace detail

inline void validate(const ExperimentSettings& s) {
    std::vector<std::string> problems;
    if (s.option_count < 2) problems.push_back("router.option_count must be >= 2");
    if (s.n_questions < 1) problems.push_back("router.n_questions must be >= 1");
    if (s.n_seeds < 1) problems.push_back("router.n_seeds must be >= 1");
    if (s.target_rates.empty()) problems.push_back("router.target_rate needs at least one value");
    for (double r : s.target_rates)
        if (!(r >= 0.0 && r <= 1.0)) problems.push_back("router.target_rate values must lie in [0, 1]");
    if (std::set<double>(s.target_rates.begin(), s.target_rates.end()).size() != s.target_rates.size())
        problems.push_back("router.target_rate values must be distinct");
    if (s.policies.empty()) problems.push_back("router.policies must not be empty");
    for (const auto* e : {&s.small, &s.large}) {
        if (!(e->cost >= 0.0)) problems.push_back("expert cost must be >= 0");
        if (e->kind == ExpertKind::Simulated && !(e->noise >= 0.0)) problems.push_back("expert noise must be >= 0");
        if (e->kind == ExpertKind::External && e->command.empty())
            problems.push_back("external expert needs a command");
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

/// Runs every seed (in parallel when `jobs` > 1) and merges results in seed
/// order. Each seed owns its experts, so external adapters are started once
/// per seed.
inline ExperimentReport run_router_experiment(const ExperimentSettings& s) {
    validate(s);
    std::vector<detail::SeedResult> results(s.n_seeds);
    parallel_for(s.n_seeds, s.jobs, [&](std::size_t seed) { results[seed] = detail::run_seed(s, seed); });

    ExperimentReport report;
    for (auto& r : results) {
        report.per_seed.insert(report.per_seed.end(), r.summaries.begin(), r.summaries.end());
        std::move(r.episodes.begin(), r.episodes.end(), std::back_inserter(report.episodes));
    }
    for (double rate : s.target_rates) {
        for (PolicyKind kind : s.policies) {
            std::vector<double> regrets;
            std::vector<double> rates;
            for (const auto& ps : report.per_seed) {
                if (ps.target_rate != rate || ps.policy != kind) continue;
                regrets.push_back(ps.total_regret);
                rates.push_back(ps.deployment_rate);
            }
            report.summary.push_back({rate, kind, stats::summarize(regrets), stats::summarize(rates)});
        }
    }
    return report;
}

}  // namespace infolab::router
