#include "cepmc/pmc_baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "cepmc/errors.hpp"

namespace cepmc {

std::vector<Eigen::Index> multinomial_resample(const Eigen::Ref<const Vector>& weights,
                                               Eigen::Index count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("multinomial_resample: count must be positive");
    std::vector<double> cumulative(static_cast<std::size_t>(weights.size()));
    double total = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!(weights(i) >= 0.0) || !std::isfinite(weights(i)))
            throw std::invalid_argument("multinomial_resample: weights must be finite and nonnegative");
        total += weights(i);
        cumulative[static_cast<std::size_t>(i)] = total;
    }
    if (!(total > 0.0)) throw AllWeightsZero("multinomial_resample: weights sum to zero");

    std::vector<Eigen::Index> out;
    out.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index c = 0; c < count; ++c) {
        const double u = rng.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        // u == total can only happen through rounding; the last positive entry owns it.
        if (it == cumulative.end()) it = std::lower_bound(cumulative.begin(), cumulative.end(), total);
        out.push_back(static_cast<Eigen::Index>(it - cumulative.begin()));
    }
    return out;
}

namespace {

enum class Scheme { Local, Global };

BaselineRun run_resampling_pmc(const RareEventProblem& problem, const RunConfig& config,
                               const std::vector<GaussianParams>& init, Rng& rng, Scheme scheme) {
    config.validate();
    if (static_cast<int>(init.size()) != config.proposals)
        throw std::invalid_argument("resampling PMC: init must hold N proposals");
    const auto start = std::chrono::steady_clock::now();
    const auto n = static_cast<Eigen::Index>(init.size());
    const Eigen::Index k = config.samples;

    BaselineRun run;
    run.parameter_trace.push_back(init);
    for (int t = 1; t <= config.trials; ++t) {
        const auto& current = run.parameter_trace.back();
        WeightedBatch batch = draw_population_batch(current, problem, k, rng, t);
        batch.level = problem.gamma;
        Matrix w = (batch.performances.array() >= problem.gamma).cast<double>().matrix().cwiseProduct(batch.dm_weights);

        std::vector<GaussianParams> next;
        next.reserve(current.size());
        std::vector<bool> resets;
        if (scheme == Scheme::Local) {
            for (Eigen::Index i = 0; i < n; ++i) {
                Vector row = w.row(i).transpose();
                const bool reset = !(row.sum() > 0.0);
                if (reset) row.setConstant(1.0 / static_cast<double>(k));
                resets.push_back(reset);
                const Eigen::Index pick = multinomial_resample(row, 1, rng).front();
                const auto& src = current[static_cast<std::size_t>(i)];
                next.emplace_back(batch.samples[static_cast<std::size_t>(i)].col(pick), src.cov());
            }
        } else {
            // Row-major flattening: index i * K + j is sample j of proposal i.
            Vector flat(n * k);
            for (Eigen::Index i = 0; i < n; ++i) flat.segment(i * k, k) = w.row(i).transpose();
            const bool reset = !(flat.sum() > 0.0);
            if (reset) flat.setConstant(1.0 / static_cast<double>(n * k));
            resets.push_back(reset);
            const auto picks = multinomial_resample(flat, n, rng);
            for (Eigen::Index i = 0; i < n; ++i) {
                const Eigen::Index p = picks[static_cast<std::size_t>(i)];
                next.emplace_back(batch.samples[static_cast<std::size_t>(p / k)].col(p % k),
                                  current[static_cast<std::size_t>(i)].cov());
            }
        }
        run.uniform_reset.push_back(std::move(resets));
        run.batches.push_back(std::move(batch));
        run.parameter_trace.push_back(std::move(next));
    }

    const WeightedBatch& last = run.batches.back();
    EstimateResult& r = run.result;
    r.estimate = final_trial_estimate(last, problem.gamma);
    r.std_error = final_trial_std_error(last, problem.gamma);
    r.n_effective = effective_sample_size(last.dm_weights);
    r.estimator_kind = EstimatorKind::FinalTrial;
    r.level_trace.assign(static_cast<std::size_t>(config.trials), problem.gamma);
    r.seed = rng.seed();
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return run;
}

}  // namespace

BaselineRun run_lr_pmc(const RareEventProblem& problem, const RunConfig& config,
                       const std::vector<GaussianParams>& init, Rng& rng) {
    return run_resampling_pmc(problem, config, init, rng, Scheme::Local);
}

BaselineRun run_gr_pmc(const RareEventProblem& problem, const RunConfig& config,
                       const std::vector<GaussianParams>& init, Rng& rng) {
    return run_resampling_pmc(problem, config, init, rng, Scheme::Global);
}

}  // namespace cepmc
