// Command-line driver for rare-event experiments.
//
//   cepmc run --config FILE [--reps R] [--seed S] [--out DIR] [--threads M]
//   cepmc list-problems
//   cepmc list-methods
//   cepmc plot-data --from DIR [--out DIR]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "cepmc/errors.hpp"
#include "cepmc/harness/config.hpp"
#include "cepmc/harness/experiment.hpp"
#include "cepmc/harness/plot_data.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

int run_command(const std::string& config_path, const cepmc::harness::PlanOverrides& overrides, int threads) {
    using namespace cepmc::harness;
    ExperimentPlan plan;
    try {
        plan = build_plan(KeyValueConfig::load(config_path), overrides);
    } catch (const cepmc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    const auto cells = run_plan(plan, threads);
    write_outputs(plan, cells);

    int failures = 0;
    for (const auto& cell : cells) {
        const CellSummary s = summarize(cell);
        failures += s.failures;
        std::cout << to_string(cell.spec.method) << ' ' << cell.spec.problem_id << " D=" << cell.dim
                  << " rho=" << cell.spec.run.rho << " mean=" << s.mean_estimate;
        if (s.rrmse) std::cout << " rrmse=" << *s.rrmse;
        if (s.failures) std::cout << " failures=" << s.failures;
        std::cout << "\n";
    }
    std::cout << "wrote " << plan.output_dir << "\n";
    return failures > 0 ? kRuntimeError : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rare-event probability estimation experiments"};
    app.require_subcommand(1);

    std::string config_path;
    int reps = 0;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto* run = app.add_subcommand("run", "Run the experiments described by a config file");
    run->add_option("--config", config_path, "Experiment config file")->required();
    auto* reps_opt = run->add_option("--reps", reps, "Replications per cell")->check(CLI::PositiveNumber);
    auto* seed_opt = run->add_option("--seed", seed, "Master seed");
    auto* out_opt = run->add_option("--out", out_dir, "Output directory");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* list_problems = app.add_subcommand("list-problems", "List available problems");
    auto* list_methods = app.add_subcommand("list-methods", "List available methods");

    std::string from_dir;
    std::string plot_out;
    auto* plot = app.add_subcommand("plot-data", "Write plot-ready data from a run directory");
    plot->add_option("--from", from_dir, "Directory written by `run`")->required();
    plot->add_option("--out", plot_out, "Destination (default: <from>/plots)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*run) {
            cepmc::harness::PlanOverrides overrides;
            if (*reps_opt) overrides.replications = reps;
            if (*seed_opt) overrides.seed = seed;
            if (*out_opt) overrides.output_dir = out_dir;
            return run_command(config_path, overrides, threads);
        }
        if (*list_problems) {
            for (const auto& id : cepmc::problem_ids()) std::cout << id << "\n";
            return 0;
        }
        if (*list_methods) {
            for (const auto& id : cepmc::harness::method_ids()) std::cout << id << "\n";
            return 0;
        }
        if (*plot) {
            const std::string dest = plot_out.empty() ? from_dir + "/plots" : plot_out;
            for (const auto& f : cepmc::harness::emit_plot_data(from_dir, dest)) std::cout << f << "\n";
            return 0;
        }
    } catch (const cepmc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return 0;
}
