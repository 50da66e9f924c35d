#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "infolab/harness.hpp"

using namespace infolab;
using namespace infolab::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("infolab_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        rows.push_back(fields);
    }
    return rows;
}

ExperimentConfig small_bandit(std::size_t runs = 5, std::size_t horizon = 50) {
    auto cfg = parse_config_text("kind: BanditSuite\n");
    cfg.n_runs = runs;
    cfg.horizon = horizon;
    cfg.master_seed = 17;
    return cfg;
}

}  // namespace

TEST(Config, MinimalFileGivesDefaults) {
    const auto cfg = parse_config_text("kind: BanditSuite\n");
    EXPECT_EQ(cfg.kind, ExperimentKind::BanditSuite);
    EXPECT_EQ(cfg.arms, 8u);
    EXPECT_EQ(cfg.gap, 0.1);
    EXPECT_EQ(cfg.horizon, 5000u);
    EXPECT_EQ(cfg.n_runs, 100u);
    EXPECT_EQ(cfg.prior, CategoricalDistribution::uniform(8));
    ASSERT_EQ(cfg.agents.size(), 3u);
    EXPECT_EQ(cfg.agents[0].label, "ThompsonSampling");
    EXPECT_EQ(cfg.agents[1].label, "Exp3");
    EXPECT_EQ(cfg.agents[2].label, "NoFeedback");
    EXPECT_EQ(cfg.router.target_rates, std::vector<double>{0.5});
}

TEST(Config, EntropyPrior) {
    const auto cfg = parse_config_text("kind: BanditSuite\nK: 8\nprior: \"entropy:1.5\"\n");
    EXPECT_NEAR(entropy_bits(cfg.prior), 1.5, 1e-9);
}

TEST(Config, ExplicitPriorAndAgents) {
    const auto cfg = parse_config_text(R"(kind: BanditSuite
K: 3
prior: [0.5, 0.25, 0.25]
agents:
  - ThompsonSampling
  - {type: Exp3, label: fast, gamma: 0.3}
  - {type: Exp3, label: slow, gamma: 0.05}
)");
    EXPECT_EQ(cfg.prior, CategoricalDistribution({0.5, 0.25, 0.25}));
    ASSERT_EQ(cfg.agents.size(), 3u);
    EXPECT_EQ(cfg.agents[1].label, "fast");
    EXPECT_EQ(cfg.agents[1].params.at("gamma"), 0.3);
}

TEST(Config, GapOutOfRange) { EXPECT_THROW(parse_config_text("kind: BanditSuite\ngap: 1.5\n"), ValidationError); }

TEST(Config, ValidationListsEveryProblem) {
    try {
        parse_config_text(R"(kind: BanditSuite
gap: 1.5
n_runs: 0
K: 3
prior: [0.5, 0.5]
agents: [Exp3, Exp3, Mystery]
)");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.problems.size(), 5u) << e.what();
    }
}

TEST(Config, ParseErrorsCarryLineAndField) {
    try {
        parse_config_text("kind: BanditSuite\nK: 8\nhorizn: 10\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 3);
        EXPECT_EQ(e.field, "horizn");
    }
    try {
        parse_config_text("kind: BanditSuite\ngap: lots\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 2);
        EXPECT_EQ(e.field, "gap");
    }
    EXPECT_THROW(parse_config_text("K: 8\n"), ParseError);
    EXPECT_THROW(parse_config_text("kind: [unclosed\n"), ParseError);
    EXPECT_THROW(parse_config_text("kind: Nonsense\n"), ParseError);
    EXPECT_THROW(parse_config(fs::path("/nonexistent/config.yaml")), ParseError);
}

TEST(Config, RouterSection) {
    const auto cfg = parse_config_text(R"(kind: RouterSuite
master_seed: 5
router:
  n_questions: 50
  target_rate: [0.5, 0.9]
  policies: [BitsBased, Random]
  large: {skill: 0.9, cost: 0.2}
)");
    EXPECT_EQ(cfg.router.n_questions, 50u);
    EXPECT_EQ(cfg.router.target_rates, (std::vector<double>{0.5, 0.9}));
    EXPECT_EQ(cfg.router.policies.size(), 2u);
    EXPECT_EQ(cfg.router.large.skill, 0.9);
    EXPECT_EQ(cfg.router.large.cost, 0.2);
    EXPECT_EQ(cfg.router.small.skill, 0.45);
    EXPECT_THROW(parse_config_text("kind: RouterSuite\nrouter: {target_rate: 2}\n"), ValidationError);
    EXPECT_THROW(parse_config_text("kind: RouterSuite\nrouter: {colour: red}\n"), ParseError);
}

TEST(Aggregate, Examples) {
    std::vector<RawRow> rows;
    for (double v : {1.0, 2.0, 3.0}) rows.push_back({0, "a", 1, 0, 0, 0, 0, v, v, v});
    rows.push_back({0, "b", 1, 0, 0, 0, 0, 4.0, 4.0, 0.0});
    for (int i = 0; i < 5; ++i) rows.push_back({0, "c", 1, 0, 0, 0, 0, 7.0, 7.0, 0.0});
    const auto agg = aggregate(rows);
    ASSERT_EQ(agg.size(), 3u);
    EXPECT_DOUBLE_EQ(agg[0].cum_regret.mean, 2.0);
    EXPECT_NEAR(agg[0].cum_regret.err, 2.0 / std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(agg[0].cum_regret.err, 1.1547, 1e-4);
    EXPECT_EQ(agg[1].cum_regret.err, 0.0);
    EXPECT_EQ(agg[1].cum_regret.n, 1u);
    EXPECT_EQ(agg[2].cum_regret.err, 0.0);
    EXPECT_EQ(agg[2].cum_regret.n, 5u);
}

TEST(BanditSuite, NoFeedbackLinearRegret) {
    auto cfg = small_bandit(1, 2000);
    cfg.agents = {{"NoFeedback", "NoFeedback", {}}};
    const auto res = run_bandit_suite(cfg);
    const auto& last = res.at("NoFeedback", 2000);
    EXPECT_NEAR(last.cum_regret.mean, 175.0, 1e-9);
    EXPECT_NEAR(last.cum_regret_realized.mean, 175.0, 3.0 * std::sqrt(2000 * 0.2475));
}

TEST(BanditSuite, PointMassPriorIsFree) {
    auto cfg = small_bandit(3, 200);
    cfg.prior = CategoricalDistribution::point_mass(8, 5);
    cfg.agents = {{"ThompsonSampling", "ThompsonSampling", {}}};
    for (const auto& r : run_bandit_suite(cfg).aggregate) {
        EXPECT_EQ(r.cum_regret.mean, 0.0);
        EXPECT_EQ(r.bits.mean, 0.0);
    }
}

TEST(BanditSuite, FilesHaveExactHeadersAndRecomputeFromRaw) {
    const auto dir = scratch("files");
    const auto cfg = small_bandit(6, 40);
    const auto res = run_bandit_suite(cfg, {dir, 3});
    const auto raw = read_csv(dir / "raw.csv");
    const auto agg = read_csv(dir / "aggregate.csv");
    EXPECT_EQ(slurp(dir / "raw.csv").substr(0, kRawHeader.size()), kRawHeader);
    EXPECT_EQ(slurp(dir / "aggregate.csv").substr(0, kAggregateHeader.size()), kAggregateHeader);
    EXPECT_EQ(slurp(dir / "raw.csv").find('\r'), std::string::npos);
    ASSERT_EQ(raw.size(), 1 + 6u * 3 * 40);
    ASSERT_EQ(agg.size(), 1 + 3u * 40);

    // Independent recomputation: two-pass mean and variance per (agent, t).
    std::map<std::pair<std::string, std::string>, std::vector<double>> regret, bits;
    for (std::size_t i = 1; i < raw.size(); ++i) {
        ASSERT_EQ(raw[i].size(), 10u);
        regret[{raw[i][1], raw[i][2]}].push_back(std::stod(raw[i][7]));
        bits[{raw[i][1], raw[i][2]}].push_back(std::stod(raw[i][9]));
    }
    auto two_pass = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        m /= double(v.size());
        double ss = 0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::pair{m, 2.0 * std::sqrt(ss / double(v.size() - 1)) / std::sqrt(double(v.size()))};
    };
    for (std::size_t i = 1; i < agg.size(); ++i) {
        const auto key = std::pair{agg[i][0], agg[i][1]};
        const auto [rm, re] = two_pass(regret.at(key));
        const auto [bm, be] = two_pass(bits.at(key));
        EXPECT_NEAR(std::stod(agg[i][2]), rm, 1e-9 * (1 + std::abs(rm)));
        EXPECT_NEAR(std::stod(agg[i][3]), re, 1e-9 * (1 + re));
        EXPECT_NEAR(std::stod(agg[i][4]), bm, 1e-9 * (1 + std::abs(bm)));
        EXPECT_NEAR(std::stod(agg[i][5]), be, 1e-9 * (1 + be));
        EXPECT_EQ(agg[i][6], "6");
    }
    EXPECT_EQ(res.aggregate.size(), 3u * 40);
}

TEST(BanditSuite, DeterministicAcrossRunsAndJobCounts) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const auto cfg = small_bandit(9, 60);
    run_bandit_suite(cfg, {a, 1});
    run_bandit_suite(cfg, {b, 4});
    EXPECT_EQ(slurp(a / "raw.csv"), slurp(b / "raw.csv"));
    EXPECT_EQ(slurp(a / "aggregate.csv"), slurp(b / "aggregate.csv"));
    auto other = cfg;
    other.master_seed = 18;
    const auto c = scratch("det_c");
    run_bandit_suite(other, {c, 1});
    EXPECT_NE(slurp(a / "raw.csv"), slurp(c / "raw.csv"));
}

TEST(BanditSuite, RemovingAnAgentLeavesOthersUnchanged) {
    const auto full_dir = scratch("iso_full");
    const auto part_dir = scratch("iso_part");
    auto cfg = small_bandit(4, 30);
    run_bandit_suite(cfg, {full_dir, 1});
    cfg.agents.erase(cfg.agents.begin());
    run_bandit_suite(cfg, {part_dir, 1});
    auto rows_of = [](const fs::path& p, const std::string& agent) {
        std::vector<std::vector<std::string>> out;
        for (auto& r : read_csv(p))
            if (r.size() > 1 && r[1] == agent) out.push_back(r);
        return out;
    };
    for (const char* agent : {"Exp3", "NoFeedback"}) {
        const auto a = rows_of(full_dir / "raw.csv", agent);
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, rows_of(part_dir / "raw.csv", agent));
    }
}

TEST(BanditSuite, AgentsShareTheInstanceWithinARun) {
    // An agent stuck on arm 0 has regret 0 or gap depending only on the
    // instance, so two of them in one run must report identical rows.
    struct First final : Agent {
        CategoricalDistribution next_decision() override { return CategoricalDistribution::point_mass(8, 0); }
        void observe(std::size_t, int) override {}
    };
    AgentRegistry::instance().add("FirstArm", [](const AgentSpec&, const AgentContext&) { return std::make_unique<First>(); });
    auto cfg = small_bandit(40, 1);
    cfg.agents = {{"FirstArm", "x", {}}, {"FirstArm", "y", {}}};
    const auto dir = scratch("shared");
    run_bandit_suite(cfg, {dir, 2});
    std::map<std::string, std::map<std::string, std::string>> regret;
    for (const auto& r : read_csv(dir / "raw.csv"))
        if (r[0] != "run_id") regret[r[1]][r[0]] = r[5];
    EXPECT_EQ(regret["x"], regret["y"]);
    int hits = 0;
    for (const auto& [run, v] : regret["x"]) hits += v == "0";
    EXPECT_GT(hits, 0);
    EXPECT_LT(hits, 40);
}

TEST(RouterSuite, WritesThreeFilesDeterministically) {
    const auto cfg = parse_config_text("kind: RouterSuite\nmaster_seed: 3\nrouter: {n_seeds: 3, n_questions: 40}\n");
    const auto a = scratch("router_a");
    const auto b = scratch("router_b");
    EXPECT_EQ(run_experiment(cfg, a, 1).size(), 3u);
    run_experiment(cfg, b, 3);
    for (const char* f : {"router_episodes.csv", "router_seeds.csv", "router_summary.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_EQ(read_csv(a / "router_episodes.csv")[0].size(), 9u);
    EXPECT_EQ(read_csv(a / "router_summary.csv").size(), 1u + 4);
}

TEST(BoundsAndPack, ReportsViaConfig) {
    const auto dir = scratch("bounds");
    const auto cfg = parse_config_text("kind: BoundsEval\nbounds: {kind: TsBitsUB, T: 10000, K: 8, R: 3}\n");
    run_experiment(cfg, dir);
    const auto j = nlohmann::json::parse(slurp(dir / "bounds.json"));
    EXPECT_NEAR(j["raw"].get<double>(), 346.41, 0.01);
    EXPECT_TRUE(j["chosen_epsilon"].is_null());

    const auto pcfg = parse_config_text("kind: PackEstimate\npack: {space: interval, eps: 0.25, strict: true}\n");
    run_experiment(pcfg, dir);
    const auto p = nlohmann::json::parse(slurp(dir / "pack.json"));
    EXPECT_EQ(p["packing"], 4);
    EXPECT_EQ(p["covering"], 2);
}

TEST(Cli, SubcommandsRunAndAreDeterministic) {
    const auto dir = scratch("cli");
    const auto cfg_path = dir / "cfg.yaml";
    std::ofstream(cfg_path) << "kind: BanditSuite\nhorizon: 30\nn_runs: 4\n";
    const std::string cli = CLI_PATH;
    auto run = [&](const std::string& args) { return std::system((cli + " " + args + " > /dev/null 2>&1").c_str()); };
    ASSERT_EQ(run("bandit-run --config " + cfg_path.string() + " --out " + (dir / "a").string() + " --seed 5"), 0);
    ASSERT_EQ(run("bandit-run --config " + cfg_path.string() + " --out " + (dir / "b").string() +
                  " --seed 5 --jobs 3"),
              0);
    EXPECT_EQ(slurp(dir / "a" / "raw.csv"), slurp(dir / "b" / "raw.csv"));
    EXPECT_EQ(run("bounds-eval --kind FiniteMabLB --T 10000 --K 8"), 0);
    EXPECT_NE(run("bounds-eval --kind FiniteMabLB --K 8"), 0);
    EXPECT_EQ(run("pack-estimate --space square --metric linf --eps 0.25"), 0);
    EXPECT_NE(run("router-run --config " + cfg_path.string()), 0);

    const auto bad = dir / "bad.yaml";
    std::ofstream(bad) << "kind: BanditSuite\ngap: 3\n";
    EXPECT_NE(run("bandit-run --config " + bad.string()), 0);
}

TEST(Configs, ShippedConfigsParse) {
    for (const auto& entry : fs::directory_iterator(CONFIG_DIR)) {
        if (entry.path().extension() == ".yaml") {
            EXPECT_NO_THROW(parse_config(entry.path())) << entry.path();
        }
    }
}
