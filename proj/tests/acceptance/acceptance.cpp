// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "infolab/harness.hpp"

using namespace infolab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

harness::ExperimentConfig bandit_config(std::size_t horizon, std::size_t runs, std::uint64_t seed) {
    auto cfg = harness::parse_config_text("kind: BanditSuite\n");
    cfg.horizon = horizon;
    cfg.n_runs = runs;
    cfg.master_seed = seed;
    return cfg;
}

// 1. TS posterior vs Bayes' rule applied to every short history.
Outcome posterior_exactness() {
    double worst = 0.0;
    std::size_t histories = 0;
    for (std::size_t k : {2u, 3u}) {
        const std::vector<double> prior(k, 1.0 / double(k));
        std::vector<std::pair<std::size_t, int>> h;
        std::function<void()> visit = [&] {
            ArmCounts counts(k);
            std::vector<double> w(prior);
            for (auto [arm, r] : h) {
                ++(r ? counts.successes : counts.failures)[arm];
                for (std::size_t m = 0; m < k; ++m) {
                    const double mu = arm == m ? 0.55 : 0.45;
                    w[m] *= r ? mu : 1.0 - mu;
                }
            }
            double z = 0.0;
            for (double v : w) z += v;
            const auto post = ts_posterior(counts, 0.1, CategoricalDistribution(prior));
            for (std::size_t m = 0; m < k; ++m) worst = std::max(worst, std::abs(post[m] - w[m] / z));
            ++histories;
            if (h.size() == 3) return;
            for (std::size_t a = 0; a < k; ++a)
                for (int r = 0; r <= 1; ++r) {
                    h.emplace_back(a, r);
                    visit();
                    h.pop_back();
                }
        };
        visit();
    }
    return {worst <= 1e-12, fmt("%zu histories, max |diff| = %.3g", histories, worst)};
}

// 2. TS beats EXP3 on regret and accumulates more bits.
Outcome ts_beats_exp3() {
    auto cfg = bandit_config(5000, 100, 20240101);
    cfg.agents = {{"ThompsonSampling", "ThompsonSampling", {}}, {"Exp3", "Exp3", {}}};
    const auto res = harness::run_bandit_suite(cfg, {std::nullopt, jobs()});
    const auto& ts = res.at("ThompsonSampling", 5000);
    const auto& ex = res.at("Exp3", 5000);
    const bool regret_ok = ex.cum_regret.mean - ts.cum_regret.mean > ts.cum_regret.err + ex.cum_regret.err;
    const bool bits_ok = ts.bits.mean > ex.bits.mean;
    return {regret_ok && bits_ok,
            fmt("regret TS %.2f+-%.2f vs EXP3 %.2f+-%.2f; bits TS %.3f vs EXP3 %.3f", ts.cum_regret.mean,
                ts.cum_regret.err, ex.cum_regret.mean, ex.cum_regret.err, ts.bits.mean, ex.bits.mean)};
}

struct EntropySweep {
    std::vector<double> targets{0.5, 1.5, 3.0};
    std::vector<harness::BanditSuiteResult> results;
    std::vector<double> entropies;
    double seconds = 0.0;
};

EntropySweep& entropy_sweep() {
    static EntropySweep sweep = [] {
        EntropySweep s;
        const auto start = std::chrono::steady_clock::now();
        for (double h : s.targets) {
            auto cfg = bandit_config(5000, 100, 777);
            cfg.prior = make_entropy_prior(8, h, 1e-9);
            cfg.agents = {{"ThompsonSampling", "ThompsonSampling", {}}};
            s.entropies.push_back(entropy_bits(cfg.prior));
            s.results.push_back(harness::run_bandit_suite(cfg, {std::nullopt, jobs()}));
        }
        s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return s;
    }();
    return sweep;
}

// 3. Final TS regret increases with prior entropy.
Outcome entropy_sweep_ordering() {
    auto& s = entropy_sweep();
    std::vector<stats::Summary> finals;
    for (const auto& r : s.results) finals.push_back(r.at("ThompsonSampling", 5000).cum_regret);
    bool increasing = true;
    for (std::size_t i = 1; i < finals.size(); ++i) increasing = increasing && finals[i].mean > finals[i - 1].mean;
    const bool separated = finals[2].mean - finals[0].mean >= finals[0].err + finals[2].err;
    return {increasing && separated && s.seconds < 60.0,
            fmt("H=0.5: %.2f+-%.2f, H=1.5: %.2f+-%.2f, H=3.0: %.2f+-%.2f; sweep %.1f s", finals[0].mean, finals[0].err,
                finals[1].mean, finals[1].err, finals[2].mean, finals[2].err, s.seconds)};
}

// 4. Run-mean bits never exceed the prior entropy beyond Monte-Carlo noise.
Outcome information_cap() {
    auto& s = entropy_sweep();
    double worst_margin = -1e300;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < s.results.size(); ++i)
        for (const auto& row : s.results[i].aggregate) {
            worst_margin = std::max(worst_margin, row.bits.mean - (s.entropies[i] + 3.0 * row.bits.standard_error()));
            ++checked;
        }
    return {worst_margin <= 0.0, fmt("%zu (H, t) points, max(bits - cap) = %.4f", checked, worst_margin)};
}

// 5. NoFeedback regret is exactly linear in expectation.
Outcome linear_baseline() {
    auto cfg = bandit_config(2000, 100, 5);
    cfg.agents = {{"NoFeedback", "NoFeedback", {}}};
    const auto res = harness::run_bandit_suite(cfg, {std::nullopt, jobs()});
    const auto& last = res.at("NoFeedback", 2000);
    const bool expected_ok = std::abs(last.cum_regret.mean - 175.0) <= 1e-9 && last.cum_regret.err <= 1e-9;
    const double z = std::abs(last.cum_regret_realized.mean - 175.0) / last.cum_regret_realized.standard_error();
    return {expected_ok && z <= 3.0,
            fmt("expected %.12f, realized %.2f (%.2f standard errors)", last.cum_regret.mean,
                last.cum_regret_realized.mean, z)};
}

// 6. Closed forms vs hand arithmetic.
Outcome bound_spot_values() {
    using bounds::Kind;
    auto eval = [](Kind k, double t, double kk, std::optional<double> r) {
        bounds::Query q;
        q.T = t;
        q.K = kk;
        q.R = r;
        return bounds::eval_closed_form(k, q).raw;
    };
    const double k = 8.0, t = 1e4;
    const double oracle_finite = 0.5 * std::sqrt(t * 7.0 / 6.0) * (2.0 / 3.0 - 1.0 / 7.0);
    const double oracle_bits = 0.5 * std::sqrt(t * k * 3.0 / (6.0 * 3.0)) * (2.0 / 3.0 - 1.0 / 7.0);
    const double oracle_ts = 3.0 * std::sqrt(k * t / 6.0);
    const double oracle_zero = 1000.0 / 2.0 * (1.0 - 1.0 / 8.0);
    const std::vector<std::pair<double, double>> pairs{{eval(Kind::FiniteMabLB, t, k, std::nullopt), oracle_finite},
                                                       {eval(Kind::BitsMabLB, t, k, 3.0), oracle_bits},
                                                       {eval(Kind::TsBitsUB, t, k, 3.0), oracle_ts},
                                                       {eval(Kind::BitsMabLB, 1000, k, 0.0), oracle_zero}};
    double worst = 0.0;
    for (auto [got, want] : pairs) worst = std::max(worst, std::abs(got - want) / want);
    return {worst <= 1e-9, fmt("%.6f, %.6f, %.6f, %.6f; max rel err %.2g", pairs[0].first, pairs[1].first,
                               pairs[2].first, pairs[3].first, worst)};
}

// 7. Monotonicity in R, constant upper/lower ratio, Fano zero crossing.
Outcome bound_properties() {
    using bounds::Kind;
    bounds::Query q;
    q.T = 1e4;
    q.K = 8;
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 20; ++i) {
        q.R = 3.0 * i / 20.0;
        const double v = bounds::eval_closed_form(Kind::BitsMabLB, q).raw;
        decreasing = decreasing && v < prev;
        prev = v;
    }
    double lo = 1e300, hi = -1e300;
    for (double t : {100.0, 1e3, 1e4, 1e5, 1e6})
        for (double r : {0.25, 0.5, 1.0, 2.0, 3.0}) {
            q.T = t;
            q.R = r;
            const double ratio =
                bounds::eval_closed_form(Kind::TsBitsUB, q).raw / bounds::eval_closed_form(Kind::BitsMabLB, q).raw;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    const double spread = (hi - lo) / lo;
    double fano_worst = 0.0;
    for (double k : {4.0, 8.0, 16.0, 1024.0})
        fano_worst = std::max(fano_worst, std::abs(bounds::fano_rhs(1000, 0.1, k, std::log2(k) - 1.0)));
    return {decreasing && spread <= 1e-9 && fano_worst <= 1e-12,
            fmt("decreasing in R: %s; ratio spread %.2g; |fano| at I+1=log2 K: %.2g", decreasing ? "yes" : "no",
                spread, fano_worst)};
}

// 8. Strict packing at 2 eps <= covering at eps <= strict packing at eps.
Outcome sandwich() {
    std::string detail;
    bool ok = true;
    for (std::size_t d : {1u, 2u})
        for (double eps : {0.1, 0.25}) {
            const bounds::BoxGrid g{d, 0.0, 1.0, eps / 50.0};
            const auto m2 = bounds::greedy_packing_number(g, bounds::Metric::Linf, 2 * eps, true);
            const auto n = bounds::greedy_covering_number(g, bounds::Metric::Linf, eps);
            const auto m = bounds::greedy_packing_number(g, bounds::Metric::Linf, eps, true);
            ok = ok && m2 <= n && n <= m;
            detail += fmt("%sd=%zu eps=%.2f: %zu<=%zu<=%zu", detail.empty() ? "" : "; ", d, eps, m2, n, m);
        }
    return {ok, detail};
}

// 9. Bits-based routing beats random routing at matched deployment.
Outcome router_dominance() {
    router::ExperimentSettings s;
    s.target_rates = {0.5, 0.9};
    s.master_seed = 99;
    s.jobs = jobs();
    const auto rep = router::run_router_experiment(s);
    auto find = [&](double rate, router::PolicyKind k) {
        for (const auto& p : rep.summary)
            if (p.target_rate == rate && p.policy == k) return p;
        return router::PolicySummary{};
    };
    bool ok = true;
    std::string detail;
    for (double rate : s.target_rates) {
        const auto bits = find(rate, router::PolicyKind::BitsBased);
        const auto rnd = find(rate, router::PolicyKind::Random);
        const auto small = find(rate, router::PolicyKind::AlwaysSmall);
        const auto large = find(rate, router::PolicyKind::AlwaysLarge);
        ok = ok && bits.regret.mean <= rnd.regret.mean && std::abs(bits.deployment.mean - rate) <= 0.05 &&
             small.regret.mean > large.regret.mean;
        detail += fmt("%srate %.1f: bits %.1f, random %.1f, deploy %.3f, small %.1f, large %.1f",
                      detail.empty() ? "" : "; ", rate, bits.regret.mean, rnd.regret.mean, bits.deployment.mean,
                      small.regret.mean, large.regret.mean);
    }
    return {ok, detail};
}

// 10. Same config and seed give byte-identical files, for every suite kind.
Outcome determinism() {
    const auto root = fs::temp_directory_path() / ("infolab_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::string>> configs{
        {"bandit", "kind: BanditSuite\nhorizon: 300\nn_runs: 12\nmaster_seed: 8\n"},
        {"entropy", "kind: BanditSuite\nhorizon: 300\nn_runs: 12\nprior: \"entropy:1.5\"\nmaster_seed: 8\n"},
        {"router", "kind: RouterSuite\nmaster_seed: 8\nrouter: {target_rate: [0.5, 0.9]}\n"},
        {"bounds", "kind: BoundsEval\nbounds: {kind: LipschitzLB, T: 1000, d: 2, c1: 1, c2: 1}\n"},
        {"pack", "kind: PackEstimate\npack: {space: square, eps: 0.1, strict: true}\n"}};
    std::size_t files = 0;
    bool ok = true;
    for (const auto& [name, text] : configs) {
        const auto cfg = harness::parse_config_text(text);
        const auto a = harness::run_experiment(cfg, root / name / "a", 1);
        const auto b = harness::run_experiment(cfg, root / name / "b", jobs());
        ok = ok && a.size() == b.size() && !a.empty();
        for (std::size_t i = 0; ok && i < a.size(); ++i) {
            ok = slurp(a[i]) == slurp(b[i]) && !slurp(a[i]).empty();
            ++files;
        }
    }
    fs::remove_all(root);
    return {ok, fmt("%zu file pairs compared across 5 suites", files)};
}

}  // namespace

int main() {
    const std::vector<std::tuple<int, const char*, double, std::function<Outcome()>>> checks{
        {1, "posterior exactness", 1.0, posterior_exactness},
        {2, "TS vs EXP3 ordering", 60.0, ts_beats_exp3},
        {3, "regret increases with prior entropy", 60.0, entropy_sweep_ordering},
        {4, "information cap", 0.0, information_cap},
        {5, "linear-regret baseline", 0.0, linear_baseline},
        {6, "bound spot values", 0.0, bound_spot_values},
        {7, "bound properties", 0.0, bound_properties},
        {8, "packing/covering sandwich", 10.0, sandwich},
        {9, "router dominance", 10.0, router_dominance},
        {10, "determinism", 0.0, determinism},
    };
    int failures = 0;
    for (const auto& [id, name, limit, fn] : checks) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (limit > 0.0 && secs >= limit) {
            o.pass = false;
            o.detail += fmt(" [over %.0f s limit]", limit);
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s criterion %d (%s): %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(checks.size()) - failures, checks.size());
    return failures == 0 ? 0 : 1;
}
