#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cepmc/weighting.hpp"

namespace cepmc {

enum class EstimatorKind { FinalTrial, AllTrials, PlainMC };

std::string_view to_string(EstimatorKind kind);

/// Outcome of one estimation run. `estimate` is recorded raw; weight noise
/// can push it above 1.
struct EstimateResult {
    double estimate = 0.0;
    /// Sample standard error of the estimate from the batch that produced it.
    double std_error = 0.0;
    EstimatorKind estimator_kind = EstimatorKind::FinalTrial;
    /// ESS of the unindicated weights of the estimating batch.
    double n_effective = 0.0;
    std::vector<double> level_trace;
    std::uint64_t seed = 0;
    double runtime_ms = 0.0;
};

/// (1/NK) sum I(S >= gamma) w over one batch.
double final_trial_estimate(const WeightedBatch& batch, double gamma);

/// Standard error of final_trial_estimate, treating the NK terms as i.i.d.
double final_trial_std_error(const WeightedBatch& batch, double gamma);

/// Mean of the per-trial estimates, i.e. (1/TNK) sum_t sum_n sum_k I w.
double all_trials_estimate(std::span<const WeightedBatch> batches, double gamma);

/// sqrt(mean((x_r - ref)^2)) / ref.
double rrmse(std::span<const double> estimates, double reference);

/// (sum w)^2 / sum w^2. Throws AllWeightsZero if sum w == 0.
/// Accepts a vector or a matrix of weights (all entries pooled).
double effective_sample_size(const Eigen::Ref<const Matrix>& weights);

}  // namespace cepmc
