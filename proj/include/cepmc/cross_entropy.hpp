#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "cepmc/estimation.hpp"
#include "cepmc/gaussian.hpp"
#include "cepmc/problem.hpp"
#include "cepmc/rng.hpp"
#include "cepmc/weighting.hpp"

namespace cepmc {

/// S_(ceil((1 - rho) K)) of the ascending order statistics (1-based).
/// Throws EmptyBatch for K == 0, std::invalid_argument for rho outside (0, 1).
double sample_quantile(std::span<const double> performances, double rho);
double sample_quantile(const Vector& performances, double rho);

/// Weighted update of one proposal with the adaptation loop's fallbacks.
enum class UpdateOutcome {
    Updated,              // mean and covariance from the elite moments
    MeanOnly,             // covariance schedule not yet active
    SingularCovRetained,  // covariance failed factorization; previous kept
    Frozen,               // no elite weight mass; parameters unchanged
};

struct GuardedUpdate {
    GaussianParams params;
    UpdateOutcome outcome;
};

/// Moment update from `weights` (already masked). Falls back to `previous`
/// parameters when all weights are zero and to the previous covariance when
/// the updated one is singular. The returned params are always factorizable
/// if `previous` was.
GuardedUpdate guarded_update(const SampleMatrix& samples, const Vector& weights,
                             const GaussianParams& previous, bool update_cov);

/// Multilevel CE update: weighted_moment_update with weights
/// I(S >= level) * pi(x)/q_previous(x). Without `update_cov` the previous
/// covariance is retained. Throws AllWeightsZero if no elite mass.
GaussianParams ce_update(const SampleMatrix& samples, const Vector& performances, double level,
                         const GaussianParams& previous, const RareEventProblem& problem,
                         bool update_cov);

enum class CeTermination { LevelReached, MaxIterations };

struct CeTrace {
    std::vector<double> levels;
    std::vector<GaussianParams> parameters;  // parameters used to draw each iteration
    int iterations = 0;
    CeTermination terminated_by = CeTermination::MaxIterations;
};

class MaxIterationsExceeded : public std::runtime_error {
public:
    MaxIterationsExceeded(const std::string& what, CeTrace trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const CeTrace& trace() const noexcept { return trace_; }

private:
    CeTrace trace_;
};

struct CeOptions {
    double rho = 0.1;
    Eigen::Index samples = 1000;
    int max_iterations = 100;
};

struct CeRun {
    EstimateResult result;
    CeTrace trace;
    WeightedBatch final_batch;
};

/// Multilevel cross-entropy with a single Gaussian proposal. Iterates until
/// the sample quantile reaches gamma, then estimates from the terminal batch.
/// Throws MaxIterationsExceeded (carrying the partial trace) if the level is
/// not reached within options.max_iterations.
CeRun run_ce(const RareEventProblem& problem, const CeOptions& options, const GaussianParams& init,
             Rng& rng);

struct FixedTrialCeOptions {
    double rho = 0.1;
    Eigen::Index samples = 1000;
    int trials = 20;
    /// First trial whose update touches the covariance; 0 selects ceil(T/2)+1.
    int cov_schedule_start = 0;
};

struct FixedTrialCeRun {
    EstimateResult result;
    std::vector<GaussianParams> parameters;  // T + 1 entries, init first
    std::vector<double> levels;
    std::vector<UpdateOutcome> outcomes;
    WeightedBatch final_batch;
};

/// Cross-entropy with a fixed trial count: always updates at level
/// min(quantile, gamma), follows the covariance schedule and the same
/// fallbacks as the population method, and estimates from trial T's batch.
FixedTrialCeRun run_ce_fixed_trials(const RareEventProblem& problem,
                                    const FixedTrialCeOptions& options, const GaussianParams& init,
                                    Rng& rng);

/// ceil(T/2) + 1.
int default_cov_schedule_start(int trials);

}  // namespace cepmc
