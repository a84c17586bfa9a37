#pragma once

#include <vector>

#include "cepmc/gaussian.hpp"
#include "cepmc/problem.hpp"

namespace cepmc {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// One trial's output: N proposals x K samples.
///
/// `dm_weights` never has the indicator folded in; callers apply
/// elite_mask() against whichever level they need.
struct WeightedBatch {
    std::vector<SampleMatrix> samples;  // N entries, each D x K
    Matrix performances;                // N x K
    Matrix dm_weights;                  // N x K
    double level = 0.0;
    int trial_index = 0;

    Eigen::Index proposals() const noexcept { return performances.rows(); }
    Eigen::Index per_proposal() const noexcept { return performances.cols(); }
};

/// Deterministic-mixture weights pi(x) / ((1/N) sum_m q_m(x)) for every
/// sample of every proposal, evaluated in log space. Returns N x K.
/// Throws NonFiniteWeight if any weight is NaN or infinite.
Matrix dm_weights(const std::vector<SampleMatrix>& samples,
                  const std::vector<GaussianParams>& proposals, const LogDensityFn& target);

/// Same, with the problem's batched base density.
Matrix dm_weights(const std::vector<SampleMatrix>& samples,
                  const std::vector<GaussianParams>& proposals, const RareEventProblem& problem);

/// Ordinary importance weights pi(x)/q(x).
Vector standard_is_weights(const SampleMatrix& samples, const GaussianParams& proposal,
                           const LogDensityFn& target);
Vector standard_is_weights(const SampleMatrix& samples, const GaussianParams& proposal,
                           const RareEventProblem& problem);

/// performances >= level, elementwise. Ties are elite.
Mask elite_mask(const Vector& performances, double level);

}  // namespace cepmc
