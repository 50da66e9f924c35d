#pragma once

// Experiment configuration, seeding, orchestration and file output.
//
// Configuration files are YAML mappings. Every key is optional except
// `kind`; omitted keys take the defaults shown in ExperimentConfig.
//
// Seeding: with master seed m, run r and agent label L,
//   instance stream = derive_seed(m, {r, fnv1a("instance")})
//   agent stream    = derive_seed(m, {r, fnv1a(L)})
// Every agent in run r therefore faces the same sampled instance, and an
// agent's rows do not depend on which other agents are configured.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "infolab/agents.hpp"
#include "infolab/bandit_env.hpp"
#include "infolab/bounds.hpp"
#include "infolab/cascade_router.hpp"
#include "infolab/csv.hpp"
#include "infolab/errors.hpp"
#include "infolab/info_math.hpp"
#include "infolab/parallel.hpp"
#include "infolab/random.hpp"
#include "infolab/stats.hpp"

namespace infolab::harness {

enum class ExperimentKind { BanditSuite, RouterSuite, BoundsEval, PackEstimate };

inline std::string_view to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::BanditSuite: return "BanditSuite";
    case ExperimentKind::RouterSuite: return "RouterSuite";
    case ExperimentKind::BoundsEval: return "BoundsEval";
    case ExperimentKind::PackEstimate: return "PackEstimate";
    }
    return "?";
}

struct PackSettings {
    std::string space = "interval";  // interval | square | cube
    bounds::Metric metric = bounds::Metric::Linf;
    double eps = 0.25;
    bool strict = false;
    std::optional<double> step;  // defaults to eps / 50
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::BanditSuite;
    std::size_t arms = 8;
    double gap = 0.1;
    std::size_t horizon = 5000;
    std::size_t n_runs = 100;
    std::uint64_t master_seed = 0;
    std::string prior_spec = "uniform";  // uniform | entropy:<bits> | explicit list
    CategoricalDistribution prior = CategoricalDistribution::uniform(8);
    std::vector<AgentSpec> agents{{"ThompsonSampling", "ThompsonSampling", {}},
                                  {"Exp3", "Exp3", {}},
                                  {"NoFeedback", "NoFeedback", {}}};
    router::ExperimentSettings router;
    bounds::Kind bound_kind = bounds::Kind::FiniteMabLB;
    bounds::Query bound_query;
    PackSettings pack;
    std::string output = "out";
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

template <class T>
T scalar(const YAML::Node& n, const std::string& field, const char* expected) {
    try {
        if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "not a scalar");
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ParseError("line " + std::to_string(line_of(n)) + ": field '" + field + "' must be " + expected,
                         line_of(n), field);
    }
}

inline void check_keys(const YAML::Node& map, const std::string& where, std::initializer_list<const char*> known) {
    if (!map.IsMap())
        throw ParseError("line " + std::to_string(line_of(map)) + ": '" + where + "' must be a mapping",
                         line_of(map), where);
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) {
            const auto field = where.empty() ? key : where + "." + key;
            throw ParseError("line " + std::to_string(line_of(kv.first)) + ": unknown field '" + field + "'",
                             line_of(kv.first), field);
        }
    }
}

inline router::ExpertSpec parse_expert(const YAML::Node& n, const std::string& where, router::ExpertSpec spec) {
    check_keys(n, where, {"kind", "skill", "sharpness", "noise", "cost", "command", "timeout_s"});
    if (n["kind"]) {
        const auto kind = scalar<std::string>(n["kind"], where + ".kind", "Simulated or External");
        if (kind == "Simulated") spec.kind = router::ExpertKind::Simulated;
        else if (kind == "External") spec.kind = router::ExpertKind::External;
        else throw ParseError("line " + std::to_string(line_of(n["kind"])) + ": " + where +
                              ".kind must be Simulated or External", line_of(n["kind"]), where + ".kind");
    }
    if (n["skill"]) spec.skill = scalar<double>(n["skill"], where + ".skill", "a number");
    if (n["sharpness"]) spec.sharpness = scalar<double>(n["sharpness"], where + ".sharpness", "a number");
    if (n["noise"]) spec.noise = scalar<double>(n["noise"], where + ".noise", "a number");
    if (n["cost"]) spec.cost = scalar<double>(n["cost"], where + ".cost", "a number");
    if (n["command"]) spec.command = scalar<std::string>(n["command"], where + ".command", "a string");
    if (n["timeout_s"]) {
        const double s = scalar<double>(n["timeout_s"], where + ".timeout_s", "a number");
        spec.timeout = std::chrono::milliseconds(static_cast<long long>(std::llround(s * 1000.0)));
    }
    return spec;
}

template <class T>
std::vector<T> scalar_list(const YAML::Node& n, const std::string& field, const char* expected) {
    std::vector<T> out;
    if (n.IsSequence()) {
        for (const auto& item : n) out.push_back(scalar<T>(item, field, expected));
    } else {
        out.push_back(scalar<T>(n, field, expected));
    }
    return out;
}

}  // namespace detail

/// Parses and validates a configuration document. `source` names the input
/// in error messages.
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<config>") {
    using detail::scalar;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg, e.mark.line + 1, "");
    }
    if (!root.IsMap()) throw ParseError(source + ": configuration must be a mapping", 1, "");
    detail::check_keys(root, "",
                       {"kind", "K", "gap", "horizon", "T", "n_runs", "master_seed", "prior", "agents", "router",
                        "bounds", "pack", "output"});

    ExperimentConfig cfg;
    std::vector<std::string> problems;

    if (!root["kind"]) throw ParseError(source + ": missing field 'kind'", 1, "kind");
    {
        const auto kind = scalar<std::string>(root["kind"], "kind", "a string");
        if (kind == "BanditSuite") cfg.kind = ExperimentKind::BanditSuite;
        else if (kind == "RouterSuite") cfg.kind = ExperimentKind::RouterSuite;
        else if (kind == "BoundsEval") cfg.kind = ExperimentKind::BoundsEval;
        else if (kind == "PackEstimate") cfg.kind = ExperimentKind::PackEstimate;
        else throw ParseError("line " + std::to_string(detail::line_of(root["kind"])) + ": unknown kind '" + kind + "'",
                              detail::line_of(root["kind"]), "kind");
    }

    long long arms = 8, horizon = 5000, n_runs = 100;
    if (root["K"]) arms = scalar<long long>(root["K"], "K", "an integer");
    if (root["horizon"] && root["T"]) throw ParseError(source + ": give either 'horizon' or 'T'", 0, "horizon");
    if (root["horizon"]) horizon = scalar<long long>(root["horizon"], "horizon", "an integer");
    if (root["T"]) horizon = scalar<long long>(root["T"], "T", "an integer");
    if (root["n_runs"]) n_runs = scalar<long long>(root["n_runs"], "n_runs", "an integer");
    if (root["gap"]) cfg.gap = scalar<double>(root["gap"], "gap", "a number");
    if (root["master_seed"]) cfg.master_seed = scalar<std::uint64_t>(root["master_seed"], "master_seed", "a non-negative integer");
    if (root["output"]) cfg.output = scalar<std::string>(root["output"], "output", "a path");

    if (arms < 2) problems.push_back("K must be >= 2");
    if (horizon < 1) problems.push_back("horizon must be >= 1");
    if (n_runs < 1) problems.push_back("n_runs must be >= 1");
    if (!(cfg.gap > 0.0 && cfg.gap < 1.0)) problems.push_back("gap must lie in (0, 1)");
    cfg.arms = static_cast<std::size_t>(std::max(arms, 2LL));
    cfg.horizon = static_cast<std::size_t>(std::max(horizon, 1LL));
    cfg.n_runs = static_cast<std::size_t>(std::max(n_runs, 1LL));

    // Prior: "uniform", "entropy:<bits>", or a list of probabilities.
    std::optional<std::vector<double>> explicit_prior;
    if (const auto p = root["prior"]) {
        if (p.IsSequence()) {
            explicit_prior = detail::scalar_list<double>(p, "prior", "a number");
            cfg.prior_spec = "explicit";
        } else {
            cfg.prior_spec = scalar<std::string>(p, "prior", "uniform, entropy:<bits> or a list");
        }
    }
    try {
        if (explicit_prior) {
            if (explicit_prior->size() != cfg.arms) problems.push_back("prior list length must equal K");
            else cfg.prior = CategoricalDistribution(*explicit_prior);
        } else if (cfg.prior_spec == "uniform") {
            cfg.prior = CategoricalDistribution::uniform(cfg.arms);
        } else if (cfg.prior_spec.rfind("entropy:", 0) == 0) {
            double bits = 0.0;
            try {
                bits = std::stod(cfg.prior_spec.substr(8));
            } catch (const std::exception&) {
                throw ParseError("line " + std::to_string(detail::line_of(root["prior"])) +
                                 ": prior 'entropy:<bits>' needs a number", detail::line_of(root["prior"]), "prior");
            }
            cfg.prior = make_entropy_prior(cfg.arms, bits, 1e-9);
        } else {
            throw ParseError("line " + std::to_string(detail::line_of(root["prior"])) +
                             ": prior must be uniform, entropy:<bits> or a list", detail::line_of(root["prior"]), "prior");
        }
    } catch (const InvalidTarget& e) {
        problems.push_back(std::string("prior: ") + e.what());
    } catch (const InvalidDistribution& e) {
        problems.push_back(std::string("prior: ") + e.what());
    }

    if (const auto list = root["agents"]) {
        if (!list.IsSequence())
            throw ParseError("line " + std::to_string(detail::line_of(list)) + ": 'agents' must be a list",
                             detail::line_of(list), "agents");
        cfg.agents.clear();
        for (const auto& item : list) {
            AgentSpec spec;
            if (item.IsScalar()) {
                spec.type = item.as<std::string>();
            } else {
                if (!item.IsMap() || !item["type"])
                    throw ParseError("line " + std::to_string(detail::line_of(item)) + ": agent entries need 'type'",
                                     detail::line_of(item), "agents.type");
                for (const auto& kv : item) {
                    const auto key = kv.first.as<std::string>();
                    if (key == "type") spec.type = scalar<std::string>(kv.second, "agents.type", "a string");
                    else if (key == "label") spec.label = scalar<std::string>(kv.second, "agents.label", "a string");
                    else spec.params[key] = scalar<double>(kv.second, "agents." + key, "a number");
                }
            }
            if (spec.label.empty()) spec.label = spec.type;
            cfg.agents.push_back(std::move(spec));
        }
    }
    {
        std::set<std::string> labels;
        if (cfg.kind == ExperimentKind::BanditSuite && cfg.agents.empty()) problems.push_back("agents must not be empty");
        for (const auto& a : cfg.agents) {
            if (!AgentRegistry::instance().contains(a.type)) problems.push_back("unknown agent type '" + a.type + "'");
            if (!labels.insert(a.label).second) problems.push_back("duplicate agent label '" + a.label + "'");
            if (auto g = a.params.find("gamma"); g != a.params.end() && !(g->second > 0.0 && g->second <= 1.0))
                problems.push_back("agent '" + a.label + "': gamma must lie in (0, 1]");
        }
    }

    cfg.router.master_seed = cfg.master_seed;
    if (const auto r = root["router"]) {
        detail::check_keys(r, "router",
                           {"option_count", "n_questions", "n_seeds", "target_rate", "policies", "invert", "small",
                            "large"});
        auto& rs = cfg.router;
        if (r["option_count"]) {
            const auto v = scalar<long long>(r["option_count"], "router.option_count", "an integer");
            if (v < 2) problems.push_back("router.option_count must be >= 2");
            rs.option_count = static_cast<std::size_t>(std::max(v, 2LL));
        }
        if (r["n_questions"]) {
            const auto v = scalar<long long>(r["n_questions"], "router.n_questions", "an integer");
            if (v < 1) problems.push_back("router.n_questions must be >= 1");
            rs.n_questions = static_cast<std::size_t>(std::max(v, 1LL));
        }
        if (r["n_seeds"]) {
            const auto v = scalar<long long>(r["n_seeds"], "router.n_seeds", "an integer");
            if (v < 1) problems.push_back("router.n_seeds must be >= 1");
            rs.n_seeds = static_cast<std::size_t>(std::max(v, 1LL));
        }
        if (r["target_rate"]) rs.target_rates = detail::scalar_list<double>(r["target_rate"], "router.target_rate", "a number");
        if (r["policies"]) {
            rs.policies.clear();
            for (const auto& name : detail::scalar_list<std::string>(r["policies"], "router.policies", "a policy name")) {
                try {
                    rs.policies.push_back(router::parse_policy(name));
                } catch (const DomainError& e) {
                    problems.push_back(e.what());
                }
            }
        }
        if (r["invert"]) rs.invert = scalar<bool>(r["invert"], "router.invert", "true or false");
        if (r["small"]) rs.small = detail::parse_expert(r["small"], "router.small", rs.small);
        if (r["large"]) rs.large = detail::parse_expert(r["large"], "router.large", rs.large);
    }
    if (cfg.kind == ExperimentKind::RouterSuite) {
        try {
            router::validate(cfg.router);
        } catch (const ValidationError& e) {
            problems.insert(problems.end(), e.problems.begin(), e.problems.end());
        }
    }

    if (const auto b = root["bounds"]) {
        detail::check_keys(b, "bounds", {"kind", "T", "K", "d", "R", "H", "A_bar", "c", "c1", "c2", "S",
                                         "episode_length", "kappa"});
        auto& q = cfg.bound_query;
        if (b["kind"]) {
            try {
                cfg.bound_kind = bounds::parse_kind(scalar<std::string>(b["kind"], "bounds.kind", "a bound kind"));
            } catch (const DomainError& e) {
                problems.push_back(e.what());
            }
        }
        auto opt = [&](const char* key, std::optional<double>& slot) {
            if (b[key]) slot = scalar<double>(b[key], std::string("bounds.") + key, "a number");
        };
        opt("T", q.T); opt("K", q.K); opt("d", q.d); opt("R", q.R); opt("H", q.H);
        opt("c", q.c); opt("c1", q.c1); opt("c2", q.c2); opt("S", q.S); opt("episode_length", q.episode_length);
        if (b["A_bar"]) q.a_bar = scalar<double>(b["A_bar"], "bounds.A_bar", "a number");
        if (b["kappa"]) q.kappa = scalar<double>(b["kappa"], "bounds.kappa", "a number");
        if (!(q.a_bar > 0.0)) problems.push_back("bounds.A_bar must be positive");
    }

    if (const auto p = root["pack"]) {
        detail::check_keys(p, "pack", {"space", "metric", "eps", "strict", "step"});
        auto& ps = cfg.pack;
        if (p["space"]) ps.space = scalar<std::string>(p["space"], "pack.space", "interval, square or cube");
        if (p["metric"]) {
            try {
                ps.metric = bounds::parse_metric(scalar<std::string>(p["metric"], "pack.metric", "l1, l2 or linf"));
            } catch (const DomainError& e) {
                problems.push_back(e.what());
            }
        }
        if (p["eps"]) ps.eps = scalar<double>(p["eps"], "pack.eps", "a number");
        if (p["strict"]) ps.strict = scalar<bool>(p["strict"], "pack.strict", "true or false");
        if (p["step"]) ps.step = scalar<double>(p["step"], "pack.step", "a number");
        if (ps.space != "interval" && ps.space != "square" && ps.space != "cube")
            problems.push_back("pack.space must be interval, square or cube");
        if (!(ps.eps > 0.0)) problems.push_back("pack.eps must be positive");
        if (ps.step && !(*ps.step > 0.0)) problems.push_back("pack.step must be positive");
    }

    if (!problems.empty()) throw ValidationError(std::move(problems));
    return cfg;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read config file " + path.string(), 0, "");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path.string());
}

// ---------------------------------------------------------------------------
// Bandit suite

struct RawRow {
    std::size_t run_id = 0;
    std::string agent;
    std::size_t t = 0;
    std::size_t arm = 0;
    int reward = 0;
    double inst_regret_expected = 0.0;
    double inst_regret_realized = 0.0;
    double cum_regret_expected = 0.0;
    double cum_regret_realized = 0.0;
    double bits = 0.0;
};

inline constexpr std::string_view kRawHeader =
    "run_id,agent,t,arm,reward,inst_regret_expected,inst_regret_realized,cum_regret_expected,"
    "cum_regret_realized,bits\n";
inline constexpr std::string_view kAggregateHeader = "agent,t,mean_cum_regret,err_cum_regret,mean_bits,err_bits,n\n";

struct AggregateRow {
    std::string agent;
    std::size_t t = 0;
    stats::Summary cum_regret;           // expected form
    stats::Summary cum_regret_realized;  // in memory only; not in the CSV
    stats::Summary bits;
};

/// Groups rows by (agent, t), agents in order of first appearance, and
/// summarizes each group in row order.
inline std::vector<AggregateRow> aggregate(std::span<const RawRow> rows) {
    struct Group {
        stats::Accumulator regret, realized, bits;
    };
    std::vector<std::string> agents;
    std::map<std::string, std::map<std::size_t, Group>> groups;
    for (const auto& r : rows) {
        if (!groups.contains(r.agent)) agents.push_back(r.agent);
        auto& g = groups[r.agent][r.t];
        g.regret.add(r.cum_regret_expected);
        g.realized.add(r.cum_regret_realized);
        g.bits.add(r.bits);
    }
    std::vector<AggregateRow> out;
    for (const auto& a : agents)
        for (const auto& [t, g] : groups[a])
            out.push_back({a, t, g.regret.summary(), g.realized.summary(), g.bits.summary()});
    return out;
}

inline void append_raw(std::string& out, const RawRow& r) {
    csv::row(out, r.run_id, r.agent, r.t, r.arm, r.reward, r.inst_regret_expected, r.inst_regret_realized,
             r.cum_regret_expected, r.cum_regret_realized, r.bits);
}

inline void append_aggregate(std::string& out, const AggregateRow& a) {
    csv::row(out, a.agent, a.t, a.cum_regret.mean, a.cum_regret.err, a.bits.mean, a.bits.err, a.cum_regret.n);
}

struct SuiteOptions {
    std::optional<std::filesystem::path> out_dir;  // nothing is written when unset
    std::size_t jobs = 1;
};

struct BanditSuiteResult {
    std::vector<AggregateRow> aggregate;  // agent-major, then t
    std::vector<std::filesystem::path> files;

    /// Aggregate row of `agent` at round t (1-based).
    const AggregateRow& at(const std::string& agent, std::size_t t) const {
        for (const auto& r : aggregate)
            if (r.agent == agent && r.t == t) return r;
        throw OutOfRange("no aggregate row for " + agent + " at t=" + std::to_string(t));
    }
};

/// All agents of one run, rows ordered by agent then t.
inline std::vector<RawRow> simulate_run(const ExperimentConfig& cfg, std::size_t run_id) {
    Rng instance_rng = make_rng(derive_seed(cfg.master_seed, {run_id, fnv1a("instance")}));
    const NeedleBandit bandit = sample_instance(cfg.prior, cfg.arms, cfg.gap, instance_rng);
    const AgentContext ctx{cfg.arms, cfg.gap, cfg.horizon, cfg.prior};

    std::vector<RawRow> rows;
    rows.reserve(cfg.agents.size() * cfg.horizon);
    for (const auto& spec : cfg.agents) {
        Rng rng = make_rng(derive_seed(cfg.master_seed, {run_id, fnv1a(spec.label)}));
        auto agent = AgentRegistry::instance().make(spec, ctx);
        for (const auto& rec : run_agent(bandit, *agent, cfg.prior, cfg.horizon, rng)) {
            rows.push_back({run_id, spec.label, rec.t, rec.arm, rec.reward, rec.inst_regret, rec.inst_regret_realized,
                            rec.cum_regret, rec.cum_regret_realized, rec.bits});
        }
    }
    return rows;
}

namespace detail {

class FileSink {
public:
    FileSink() = default;
    explicit FileSink(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw Error("cannot write " + path.string());
    }
    bool active() const { return out_.is_open(); }
    void write(std::string& buffer) {
        if (active()) out_.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        buffer.clear();
    }
    void close() {
        if (!active()) return;
        out_.close();
        if (!out_) throw Error("error while writing output");
    }

private:
    std::ofstream out_;
};

}  // namespace detail

/// Runs every (run, agent) pair and writes raw.csv and aggregate.csv.
/// Runs execute in batches on `jobs` threads; rows are consumed strictly in
/// run order, so the output bytes do not depend on `jobs`.
inline BanditSuiteResult run_bandit_suite(const ExperimentConfig& cfg, const SuiteOptions& opts = {}) {
    if (cfg.kind != ExperimentKind::BanditSuite) throw DomainError("run_bandit_suite needs kind BanditSuite");
    BanditSuiteResult result;
    detail::FileSink raw;
    if (opts.out_dir) {
        std::filesystem::create_directories(*opts.out_dir);
        raw = detail::FileSink(*opts.out_dir / "raw.csv");
        result.files.push_back(*opts.out_dir / "raw.csv");
    }

    struct Slot {
        stats::Accumulator regret, realized, bits;
    };
    std::map<std::string, std::vector<Slot>> acc;
    for (const auto& a : cfg.agents) acc[a.label].resize(cfg.horizon);

    std::string buffer(kRawHeader);
    const std::size_t jobs = std::max<std::size_t>(opts.jobs, 1);
    const std::size_t batch = jobs * 4;
    for (std::size_t start = 0; start < cfg.n_runs; start += batch) {
        const std::size_t count = std::min(batch, cfg.n_runs - start);
        std::vector<std::vector<RawRow>> runs(count);
        parallel_for(count, jobs, [&](std::size_t i) { runs[i] = simulate_run(cfg, start + i); });
        for (const auto& rows : runs) {
            for (const auto& r : rows) {
                auto& slot = acc[r.agent][r.t - 1];
                slot.regret.add(r.cum_regret_expected);
                slot.realized.add(r.cum_regret_realized);
                slot.bits.add(r.bits);
                if (raw.active()) append_raw(buffer, r);
            }
            raw.write(buffer);
        }
    }
    raw.close();

    for (const auto& a : cfg.agents) {
        const auto& slots = acc[a.label];
        for (std::size_t t = 0; t < cfg.horizon; ++t)
            result.aggregate.push_back(
                {a.label, t + 1, slots[t].regret.summary(), slots[t].realized.summary(), slots[t].bits.summary()});
    }

    if (opts.out_dir) {
        detail::FileSink agg(*opts.out_dir / "aggregate.csv");
        std::string text(kAggregateHeader);
        for (const auto& row : result.aggregate) append_aggregate(text, row);
        agg.write(text);
        agg.close();
        result.files.push_back(*opts.out_dir / "aggregate.csv");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Router suite

inline std::vector<std::filesystem::path> write_router_report(const router::ExperimentReport& report,
                                                              const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string episodes("seed,target_rate,policy,question_id,bits_score,routed_to,answered_option,correct,regret\n");
    for (const auto& e : report.episodes)
        csv::row(episodes, e.seed, e.target_rate, router::to_string(e.policy), e.episode.question_id,
                 e.episode.bits_score, router::to_string(e.episode.routed_to), e.episode.answered_option,
                 e.episode.correct ? 1 : 0, e.episode.regret);
    std::string seeds("seed,target_rate,policy,threshold,total_regret,deployment_rate\n");
    for (const auto& s : report.per_seed)
        csv::row(seeds, s.seed, s.target_rate, router::to_string(s.policy), s.threshold, s.total_regret,
                 s.deployment_rate);
    std::string summary("target_rate,policy,mean_regret,err_regret,mean_deployment,err_deployment,n\n");
    for (const auto& s : report.summary)
        csv::row(summary, s.target_rate, router::to_string(s.policy), s.regret.mean, s.regret.err, s.deployment.mean,
                 s.deployment.err, s.regret.n);

    std::vector<std::filesystem::path> files;
    for (auto& [name, text] : {std::pair{"router_episodes.csv", &episodes}, std::pair{"router_seeds.csv", &seeds},
                               std::pair{"router_summary.csv", &summary}}) {
        detail::FileSink sink(dir / name);
        sink.write(*text);
        sink.close();
        files.push_back(dir / name);
    }
    return files;
}

inline router::ExperimentReport run_router_suite(const ExperimentConfig& cfg, const SuiteOptions& opts = {}) {
    if (cfg.kind != ExperimentKind::RouterSuite) throw DomainError("run_router_suite needs kind RouterSuite");
    auto settings = cfg.router;
    settings.master_seed = cfg.master_seed;
    settings.jobs = std::max<std::size_t>(opts.jobs, 1);
    auto report = router::run_router_experiment(settings);
    if (opts.out_dir) write_router_report(report, *opts.out_dir);
    return report;
}

// ---------------------------------------------------------------------------
// Bound and packing reports

inline nlohmann::json bound_report(bounds::Kind kind, const bounds::Query& q) {
    const auto r = bounds::eval_closed_form(kind, q);
    nlohmann::json params = nlohmann::json::object();
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) params[key] = *v;
    };
    put("T", q.T); put("K", q.K); put("d", q.d); put("R", q.R); put("H", q.H);
    params["A_bar"] = q.a_bar;
    put("c", q.c); put("c1", q.c1); put("c2", q.c2); put("S", q.S); put("episode_length", q.episode_length);
    if (kind == bounds::Kind::RussoEntropyUB) params["kappa"] = q.kappa;

    nlohmann::json j;
    j["kind"] = std::string(bounds::to_string(kind));
    j["params"] = params;
    j["raw"] = r.raw;
    j["clamped"] = r.clamped;
    j["chosen_epsilon"] = r.chosen_epsilon ? nlohmann::json(*r.chosen_epsilon) : nlohmann::json(nullptr);
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

inline bounds::BoxGrid pack_grid(const PackSettings& p) {
    bounds::BoxGrid g;
    g.dim = p.space == "interval" ? 1 : p.space == "square" ? 2 : 3;
    g.lo = 0.0;
    g.hi = 1.0;
    g.step = p.step.value_or(p.eps / 50.0);
    return g;
}

inline nlohmann::json pack_report(const PackSettings& p) {
    const auto grid = pack_grid(p);
    nlohmann::json j;
    j["space"] = p.space;
    j["metric"] = p.metric == bounds::Metric::L1 ? "l1" : p.metric == bounds::Metric::L2 ? "l2" : "linf";
    j["eps"] = p.eps;
    j["strict"] = p.strict;
    j["step"] = grid.step;
    j["grid_points_per_axis"] = grid.points_per_axis();
    j["packing"] = bounds::greedy_packing_number(grid, p.metric, p.eps, p.strict);
    j["covering"] = bounds::greedy_covering_number(grid, p.metric, p.eps);
    if (p.metric == bounds::Metric::Linf) j["exact_covering"] = bounds::exact_covering_number_linf(grid, p.eps);
    return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    detail::FileSink sink(path);
    std::string copy = text;
    sink.write(copy);
    sink.close();
}

/// Dispatches on cfg.kind and writes the kind's outputs under `out_dir`.
inline std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                                         std::size_t jobs = 1) {
    const SuiteOptions opts{out_dir, jobs};
    switch (cfg.kind) {
    case ExperimentKind::BanditSuite: return run_bandit_suite(cfg, opts).files;
    case ExperimentKind::RouterSuite: {
        const auto report = run_router_suite(cfg, {});
        return write_router_report(report, out_dir);
    }
    case ExperimentKind::BoundsEval: {
        write_text(out_dir / "bounds.json", bound_report(cfg.bound_kind, cfg.bound_query).dump() + "\n");
        return {out_dir / "bounds.json"};
    }
    case ExperimentKind::PackEstimate: {
        write_text(out_dir / "pack.json", pack_report(cfg.pack).dump() + "\n");
        return {out_dir / "pack.json"};
    }
    }
    return {};
}

}  // namespace infolab::harness
