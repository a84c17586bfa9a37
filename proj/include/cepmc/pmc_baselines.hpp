#pragma once

#include <vector>

#include "cepmc/population.hpp"

namespace cepmc {

/// `count` i.i.d. categorical indices with probabilities weights / sum(weights).
/// Throws AllWeightsZero when the weights sum to zero.
std::vector<Eigen::Index> multinomial_resample(const Eigen::Ref<const Vector>& weights,
                                               Eigen::Index count, Rng& rng);

struct BaselineRun {
    EstimateResult result;
    std::vector<WeightedBatch> batches;
    std::vector<std::vector<GaussianParams>> parameter_trace;  // init first
    /// Per trial, per weight group (N groups for LR, one for GR): whether the
    /// group was entirely zero and reset to uniform weights.
    std::vector<std::vector<bool>> uniform_reset;
};

/// Local-resampling PMC. Weights are DM weights times I(S >= gamma); each
/// proposal's next mean is resampled from its own K samples. Covariances
/// stay at their initial values.
BaselineRun run_lr_pmc(const RareEventProblem& problem, const RunConfig& config,
                       const std::vector<GaussianParams>& init, Rng& rng);

/// Global-resampling PMC: the N next means come from one multinomial pass
/// over all NK samples.
BaselineRun run_gr_pmc(const RareEventProblem& problem, const RunConfig& config,
                       const std::vector<GaussianParams>& init, Rng& rng);

}  // namespace cepmc
