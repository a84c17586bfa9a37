#pragma once

#include <cstdint>
#include <vector>

#include "cepmc/cross_entropy.hpp"
#include "cepmc/estimation.hpp"
#include "cepmc/gaussian.hpp"
#include "cepmc/problem.hpp"
#include "cepmc/rng.hpp"
#include "cepmc/weighting.hpp"

namespace cepmc {

/// Which batch the final-trial estimator uses.
enum class FinalBatch {
    AsDrawn,  // trial T's batch, drawn before the last update
    Fresh,    // one extra batch drawn from the parameters after trial T
};

struct RunConfig {
    int proposals = 25;        // N
    Eigen::Index samples = 100;  // K, per proposal
    int trials = 20;           // T
    double rho = 0.1;
    /// First trial whose update touches the covariance; 0 selects ceil(T/2)+1.
    int cov_schedule_start = 0;
    std::uint64_t seed = 0;
    FinalBatch final_batch = FinalBatch::AsDrawn;

    int effective_cov_schedule_start() const {
        return cov_schedule_start > 0 ? cov_schedule_start : default_cov_schedule_start(trials);
    }
    /// Throws std::invalid_argument on violated invariants.
    void validate() const;
};

struct PopulationState {
    std::vector<GaussianParams> proposals;
    int trial = 1;  // index of the next trial to run
    std::vector<double> level_trace;
};

struct TrialResult {
    PopulationState state;
    WeightedBatch batch;
    std::vector<UpdateOutcome> outcomes;  // one per proposal
};

/// Adaptation half of a trial on an already drawn batch: pooled level
/// (capped at gamma) written into `batch.level`, then one guarded update per
/// proposal from its own elite samples weighted by their DM weights.
TrialResult cepmc_update(const PopulationState& state, WeightedBatch batch, const RareEventProblem& problem,
                         const RunConfig& config);

/// One CE-PMC trial: draw K from each proposal, DM-weight all NK samples,
/// take the level from the pooled performances (capped at gamma), and update
/// each proposal from its own elite samples.
TrialResult cepmc_trial(const PopulationState& state, const RareEventProblem& problem,
                        const RunConfig& config, Rng& rng);

struct PopulationRun {
    EstimateResult result;
    std::vector<WeightedBatch> batches;
    /// proposals before trial 1, after trial 1, ..., after trial T.
    std::vector<std::vector<GaussianParams>> parameter_trace;
    std::vector<std::vector<UpdateOutcome>> outcomes;
    /// Batch the estimate came from (trial T's, or the fresh one).
    WeightedBatch estimating_batch;

    const std::vector<GaussianParams>& final_proposals() const { return parameter_trace.back(); }
};

/// Full CE-PMC run of config.trials trials from `init`.
PopulationRun run_cepmc(const RareEventProblem& problem, const RunConfig& config,
                        const std::vector<GaussianParams>& init, Rng& rng);

/// Draws K from each proposal and evaluates performances and DM weights.
/// Shared by the population methods.
WeightedBatch draw_population_batch(const std::vector<GaussianParams>& proposals,
                                    const RareEventProblem& problem, Eigen::Index per_proposal,
                                    Rng& rng, int trial_index);

}  // namespace cepmc
