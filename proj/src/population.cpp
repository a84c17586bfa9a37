#include "cepmc/population.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace cepmc {

void RunConfig::validate() const {
    if (proposals < 1 || samples < 1 || trials < 1)
        throw std::invalid_argument("RunConfig: N, K and T must be at least 1");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("RunConfig: rho must lie in (0, 1)");
    const int start = effective_cov_schedule_start();
    if (start < 1 || start > trials + 1)
        throw std::invalid_argument("RunConfig: cov_schedule_start must lie in [1, T+1]");
}

WeightedBatch draw_population_batch(const std::vector<GaussianParams>& proposals,
                                    const RareEventProblem& problem, Eigen::Index per_proposal,
                                    Rng& rng, int trial_index) {
    const auto n = static_cast<Eigen::Index>(proposals.size());
    WeightedBatch batch;
    batch.trial_index = trial_index;
    batch.samples.reserve(proposals.size());
    batch.performances.resize(n, per_proposal);
    for (Eigen::Index i = 0; i < n; ++i) {
        batch.samples.push_back(draw(proposals[static_cast<std::size_t>(i)], rng, per_proposal));
        batch.performances.row(i) = problem.performances(batch.samples.back()).transpose();
    }
    batch.dm_weights = dm_weights(batch.samples, proposals, problem);
    return batch;
}

TrialResult cepmc_update(const PopulationState& state, WeightedBatch batch, const RareEventProblem& problem,
                         const RunConfig& config) {
    const auto n = state.proposals.size();
    if (batch.samples.size() != n) throw std::invalid_argument("cepmc_update: batch does not match population");

    TrialResult out;
    out.batch = std::move(batch);
    const Matrix& perf = out.batch.performances;
    const Eigen::Map<const Vector> pooled(perf.data(), perf.size());
    const double level = std::min(sample_quantile(pooled, config.rho), problem.gamma);
    out.batch.level = level;

    const bool update_cov = state.trial >= config.effective_cov_schedule_start();
    out.state.proposals.reserve(n);
    out.outcomes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const Vector perf_n = perf.row(row).transpose();
        const Vector w = elite_mask(perf_n, level).cast<double>().matrix().cwiseProduct(
            out.batch.dm_weights.row(row).transpose());
        GuardedUpdate next = guarded_update(out.batch.samples[i], w, state.proposals[i], update_cov);
        out.state.proposals.push_back(std::move(next.params));
        out.outcomes.push_back(next.outcome);
    }
    out.state.trial = state.trial + 1;
    out.state.level_trace = state.level_trace;
    out.state.level_trace.push_back(level);
    return out;
}

TrialResult cepmc_trial(const PopulationState& state, const RareEventProblem& problem,
                        const RunConfig& config, Rng& rng) {
    for (const auto& p : state.proposals)
        if (p.dim() != problem.dim()) throw std::invalid_argument("cepmc_trial: proposal dimension mismatch");
    WeightedBatch batch = draw_population_batch(state.proposals, problem, config.samples, rng, state.trial);
    return cepmc_update(state, std::move(batch), problem, config);
}

PopulationRun run_cepmc(const RareEventProblem& problem, const RunConfig& config,
                        const std::vector<GaussianParams>& init, Rng& rng) {
    config.validate();
    if (static_cast<int>(init.size()) != config.proposals)
        throw std::invalid_argument("run_cepmc: init must hold N proposals");
    const auto start = std::chrono::steady_clock::now();

    PopulationRun run;
    PopulationState state{init, 1, {}};
    run.parameter_trace.push_back(init);
    for (int t = 1; t <= config.trials; ++t) {
        TrialResult tr = cepmc_trial(state, problem, config, rng);
        run.batches.push_back(std::move(tr.batch));
        run.outcomes.push_back(std::move(tr.outcomes));
        run.parameter_trace.push_back(tr.state.proposals);
        state = std::move(tr.state);
    }

    if (config.final_batch == FinalBatch::Fresh) {
        run.estimating_batch = draw_population_batch(state.proposals, problem, config.samples, rng,
                                                     config.trials + 1);
        run.estimating_batch.level = problem.gamma;
    } else {
        run.estimating_batch = run.batches.back();
    }

    EstimateResult& r = run.result;
    r.estimate = final_trial_estimate(run.estimating_batch, problem.gamma);
    r.std_error = final_trial_std_error(run.estimating_batch, problem.gamma);
    r.n_effective = effective_sample_size(run.estimating_batch.dm_weights);
    r.estimator_kind = EstimatorKind::FinalTrial;
    r.level_trace = state.level_trace;
    r.seed = rng.seed();
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return run;
}

}  // namespace cepmc
