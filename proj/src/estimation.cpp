#include "cepmc/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "cepmc/errors.hpp"

namespace cepmc {

std::string_view to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::FinalTrial: return "final_trial";
        case EstimatorKind::AllTrials: return "all_trials";
        case EstimatorKind::PlainMC: return "plain_mc";
    }
    return "unknown";
}

namespace {

Matrix indicated_weights(const WeightedBatch& batch, double gamma) {
    if (batch.dm_weights.size() == 0) throw EmptyBatch("estimate: empty batch");
    return (batch.performances.array() >= gamma).cast<double>().matrix().cwiseProduct(batch.dm_weights);
}

}  // namespace

double final_trial_estimate(const WeightedBatch& batch, double gamma) {
    return indicated_weights(batch, gamma).mean();
}

double final_trial_std_error(const WeightedBatch& batch, double gamma) {
    const Matrix terms = indicated_weights(batch, gamma);
    const double m = static_cast<double>(terms.size());
    if (m < 2) return 0.0;
    const double mean = terms.mean();
    const double var = (terms.array() - mean).square().sum() / (m - 1.0);
    return std::sqrt(var / m);
}

double all_trials_estimate(std::span<const WeightedBatch> batches, double gamma) {
    if (batches.empty()) throw EmptyBatch("all_trials_estimate: no batches");
    double sum = 0.0;
    for (const auto& b : batches) sum += final_trial_estimate(b, gamma);
    return sum / static_cast<double>(batches.size());
}

double rrmse(std::span<const double> estimates, double reference) {
    if (estimates.empty()) throw std::invalid_argument("rrmse: no estimates");
    if (!(reference > 0.0)) throw std::invalid_argument("rrmse: reference must be positive");
    double sq = 0.0;
    for (double e : estimates) sq += (e - reference) * (e - reference);
    return std::sqrt(sq / static_cast<double>(estimates.size())) / reference;
}

double effective_sample_size(const Eigen::Ref<const Matrix>& weights) {
    const double s = weights.sum();
    if (!(s > 0.0)) throw AllWeightsZero("effective_sample_size: zero total weight");
    return s * s / weights.squaredNorm();
}

}  // namespace cepmc
