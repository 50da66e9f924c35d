// infolab command line: bandit-run, router-run, bounds-eval, pack-estimate.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "infolab/harness.hpp"

namespace {

using namespace infolab;

struct RunArgs {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
    cmd->add_option("--config", a.config, "YAML configuration file")->required();
    cmd->add_option("--out", a.out, "output directory (default: the config's `output`)");
    cmd->add_option("--seed", a.seed, "override master_seed");
    cmd->add_option("--jobs", a.jobs, "worker threads")->check(CLI::PositiveNumber);
}

int run_suite(const RunArgs& a, harness::ExperimentKind expected) {
    auto cfg = harness::parse_config(a.config);
    if (cfg.kind != expected) {
        std::cerr << "error: config kind is " << harness::to_string(cfg.kind) << ", expected "
                  << harness::to_string(expected) << "\n";
        return 2;
    }
    if (a.seed) {
        cfg.master_seed = *a.seed;
        cfg.router.master_seed = *a.seed;
    }
    const std::filesystem::path out = a.out.value_or(cfg.output);
    for (const auto& f : harness::run_experiment(cfg, out, a.jobs)) std::cout << f.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bandit, routing and regret-bound experiments"};
    app.require_subcommand(1);

    RunArgs bandit_args;
    auto* bandit = app.add_subcommand("bandit-run", "simulate bandit agents and write raw.csv / aggregate.csv");
    add_run_options(bandit, bandit_args);

    RunArgs router_args;
    auto* router_cmd = app.add_subcommand("router-run", "simulate the two-model cascade and write router_*.csv");
    add_run_options(router_cmd, router_args);

    std::string kind;
    bounds::Query q;
    auto* bounds_cmd = app.add_subcommand("bounds-eval", "evaluate a closed-form regret bound, print JSON");
    bounds_cmd->add_option("--kind", kind, "bound id, e.g. FiniteMabLB")->required();
    bounds_cmd->add_option("--T", q.T, "horizon");
    bounds_cmd->add_option("--K", q.K, "number of arms");
    bounds_cmd->add_option("--d", q.d, "dimension");
    bounds_cmd->add_option("--R", q.R, "information budget, bits");
    bounds_cmd->add_option("--H", q.H, "prior entropy, bits");
    bounds_cmd->add_option("--A-bar", q.a_bar, "KL-vs-metric constant")->capture_default_str();
    bounds_cmd->add_option("--c", q.c, "minimal-information constant");
    bounds_cmd->add_option("--c1", q.c1, "metric-dimension constant c1");
    bounds_cmd->add_option("--c2", q.c2, "metric-dimension constant c2");
    bounds_cmd->add_option("--S", q.S, "states (RL)");
    bounds_cmd->add_option("--episode-len", q.episode_length, "episode length (RL)");
    bounds_cmd->add_option("--kappa", q.kappa, "entropy upper-bound constant")->capture_default_str();

    harness::PackSettings pack;
    std::string metric = "linf";
    double step = 0.0;
    auto* pack_cmd = app.add_subcommand("pack-estimate", "greedy packing / covering numbers on a grid, print JSON");
    pack_cmd->add_option("--space", pack.space, "interval | square | cube")
        ->check(CLI::IsMember({"interval", "square", "cube"}))
        ->capture_default_str();
    pack_cmd->add_option("--metric", metric, "l1 | l2 | linf")->capture_default_str();
    pack_cmd->add_option("--eps", pack.eps, "radius")->required()->check(CLI::PositiveNumber);
    pack_cmd->add_flag("--strict", pack.strict, "require distances > eps instead of >= eps");
    pack_cmd->add_option("--step", step, "grid step (default eps/50)")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bandit) return run_suite(bandit_args, harness::ExperimentKind::BanditSuite);
        if (*router_cmd) return run_suite(router_args, harness::ExperimentKind::RouterSuite);
        if (*bounds_cmd) {
            std::cout << harness::bound_report(bounds::parse_kind(kind), q).dump() << "\n";
            return 0;
        }
        if (*pack_cmd) {
            pack.metric = bounds::parse_metric(metric);
            if (step > 0.0) pack.step = step;
            std::cout << harness::pack_report(pack).dump() << "\n";
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << "invalid configuration:\n";
        for (const auto& p : e.problems) std::cerr << "  - " << p << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
