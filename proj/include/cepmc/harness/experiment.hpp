#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cepmc/harness/config.hpp"

namespace cepmc::harness {

/// Centered Latin hypercube on [0,1]^D mapped to [-1,1]^D: every coordinate
/// of every point is a stratum center 2(i + 0.5)/N - 1, and each stratum is
/// used exactly once per dimension.
std::vector<Vector> latin_hypercube_init(int n, int d, Rng& rng);

/// Initial proposal population for `spec` on `problem`. Means are drawn from
/// the base distribution (standard_normal), placed at base.mean + L u for
/// Latin hypercube points u (latin_hypercube_pm), or taken verbatim
/// (explicit). Covariances are init_sigma^2 times the base covariance.
std::vector<GaussianParams> initial_proposals(const ExperimentSpec& spec, const RareEventProblem& problem,
                                              Rng& rng);

struct ReplicationRecord {
    int rep = 0;
    std::uint64_t seed = 0;
    std::optional<double> estimate;
    double std_error = 0.0;
    double ess_final = 0.0;
    double runtime_ms = 0.0;
    std::string error;
    std::vector<GaussianParams> final_proposals;
};

/// Runs one replication; module errors are caught and stored in `error`.
ReplicationRecord run_replication(const ExperimentSpec& spec, int rep, std::uint64_t seed);

struct CellResult {
    ExperimentSpec spec;
    int dim = 0;
    std::optional<double> reference;
    std::vector<ReplicationRecord> reps;
};

struct CellSummary {
    int completed = 0;
    int failures = 0;
    double mean_estimate = 0.0;
    double std_error = 0.0;  // of the mean over replications
    std::optional<double> rrmse;
    double mean_runtime_ms = 0.0;
};

CellSummary summarize(const CellResult& cell);

/// Executes every cell of the plan with `threads` workers. Replication r of
/// every cell uses derive_seed(master_seed, r). Results are ordered by cell
/// and replication regardless of scheduling.
std::vector<CellResult> run_plan(const ExperimentPlan& plan, int threads = 1);

/// Deterministic CSV bodies.
std::string replications_csv(const std::vector<CellResult>& cells);
std::string summary_csv(const std::vector<CellResult>& cells);
std::string final_proposals_csv(const std::vector<CellResult>& cells);
/// Wall-clock timings; the only non-deterministic output.
std::string timings_csv(const std::vector<CellResult>& cells);

/// Writes replications.csv, summary.csv, final_proposals.csv, timings.csv
/// and run.cfg into plan.output_dir (created if needed).
void write_outputs(const ExperimentPlan& plan, const std::vector<CellResult>& cells);

}  // namespace cepmc::harness
