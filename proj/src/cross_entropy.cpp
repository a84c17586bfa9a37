#include "cepmc/cross_entropy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "cepmc/errors.hpp"

namespace cepmc {

double sample_quantile(std::span<const double> performances, double rho) {
    if (performances.empty()) throw EmptyBatch("sample_quantile: no performances");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("sample_quantile: rho must lie in (0, 1)");
    const auto k = static_cast<double>(performances.size());
    // (1 - rho) K is often an integer in exact arithmetic; shave the rounding
    // error that would push ceil() one index too high.
    const double pos = (1.0 - rho) * k;
    auto index = static_cast<std::size_t>(std::ceil(pos - 1e-9 * std::max(1.0, pos)));
    index = std::clamp<std::size_t>(index, 1, performances.size());
    std::vector<double> sorted(performances.begin(), performances.end());
    auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(index - 1);
    std::nth_element(sorted.begin(), nth, sorted.end());
    return *nth;
}

double sample_quantile(const Vector& performances, double rho) {
    return sample_quantile(std::span<const double>(performances.data(), static_cast<std::size_t>(performances.size())), rho);
}

GuardedUpdate guarded_update(const SampleMatrix& samples, const Vector& weights,
                             const GaussianParams& previous, bool update_cov) {
    if (!(weights.sum() > 0.0)) return {previous, UpdateOutcome::Frozen};
    if (!update_cov)
        return {weighted_moment_update(samples, weights, previous.cov()), UpdateOutcome::MeanOnly};
    GaussianParams next = weighted_moment_update(samples, weights);
    if (next.factorizable()) return {std::move(next), UpdateOutcome::Updated};
    return {GaussianParams(next.mean(), previous.cov()), UpdateOutcome::SingularCovRetained};
}

GaussianParams ce_update(const SampleMatrix& samples, const Vector& performances, double level,
                         const GaussianParams& previous, const RareEventProblem& problem,
                         bool update_cov) {
    const Vector w = standard_is_weights(samples, previous, problem);
    const Vector masked = elite_mask(performances, level).cast<double>().matrix().cwiseProduct(w);
    if (update_cov) return weighted_moment_update(samples, masked);
    return weighted_moment_update(samples, masked, previous.cov());
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

WeightedBatch single_batch(SampleMatrix samples, const Vector& perf, const Vector& w, double level,
                           int trial) {
    WeightedBatch b;
    b.samples.push_back(std::move(samples));
    b.performances = perf.transpose();
    b.dm_weights = w.transpose();
    b.level = level;
    b.trial_index = trial;
    return b;
}

void fill_result(EstimateResult& r, const WeightedBatch& batch, double gamma) {
    r.estimate = final_trial_estimate(batch, gamma);
    r.std_error = final_trial_std_error(batch, gamma);
    r.n_effective = effective_sample_size(batch.dm_weights);
}

}  // namespace

int default_cov_schedule_start(int trials) { return (trials + 1) / 2 + 1; }

CeRun run_ce(const RareEventProblem& problem, const CeOptions& options, const GaussianParams& init,
             Rng& rng) {
    if (options.samples < 2) throw std::invalid_argument("run_ce: need at least 2 samples");
    const auto start = std::chrono::steady_clock::now();
    CeTrace trace;
    GaussianParams current = init;
    double level = std::numeric_limits<double>::lowest();
    for (int t = 1; t <= options.max_iterations; ++t) {
        SampleMatrix x = draw(current, rng, options.samples);
        const Vector perf = problem.performances(x);
        level = std::min(sample_quantile(perf, options.rho), problem.gamma);
        trace.levels.push_back(level);
        trace.parameters.push_back(current);
        trace.iterations = t;
        const Vector w = standard_is_weights(x, current, problem);
        if (level >= problem.gamma) {
            trace.terminated_by = CeTermination::LevelReached;
            CeRun run{{}, std::move(trace), single_batch(std::move(x), perf, w, level, t)};
            fill_result(run.result, run.final_batch, problem.gamma);
            run.result.estimator_kind = EstimatorKind::FinalTrial;
            run.result.level_trace = run.trace.levels;
            run.result.seed = rng.seed();
            run.result.runtime_ms = elapsed_ms(start);
            return run;
        }
        const Vector masked = elite_mask(perf, level).cast<double>().matrix().cwiseProduct(w);
        GuardedUpdate next = guarded_update(x, masked, current, true);
        if (next.outcome == UpdateOutcome::Frozen)
            throw AllWeightsZero("run_ce: no elite weight mass at iteration " + std::to_string(t));
        current = std::move(next.params);
    }
    trace.terminated_by = CeTermination::MaxIterations;
    throw MaxIterationsExceeded("run_ce: level not reached within " +
                                    std::to_string(options.max_iterations) + " iterations",
                                std::move(trace));
}

FixedTrialCeRun run_ce_fixed_trials(const RareEventProblem& problem,
                                    const FixedTrialCeOptions& options, const GaussianParams& init,
                                    Rng& rng) {
    if (options.trials < 1) throw std::invalid_argument("run_ce_fixed_trials: need T >= 1");
    const auto start = std::chrono::steady_clock::now();
    const int cov_start =
        options.cov_schedule_start > 0 ? options.cov_schedule_start : default_cov_schedule_start(options.trials);
    FixedTrialCeRun run;
    run.parameters.push_back(init);
    for (int t = 1; t <= options.trials; ++t) {
        const GaussianParams& current = run.parameters.back();
        SampleMatrix x = draw(current, rng, options.samples);
        const Vector perf = problem.performances(x);
        const double level = std::min(sample_quantile(perf, options.rho), problem.gamma);
        const Vector w = standard_is_weights(x, current, problem);
        const Vector masked = elite_mask(perf, level).cast<double>().matrix().cwiseProduct(w);
        GuardedUpdate next = guarded_update(x, masked, current, t >= cov_start);
        run.levels.push_back(level);
        run.outcomes.push_back(next.outcome);
        if (t == options.trials) run.final_batch = single_batch(std::move(x), perf, w, level, t);
        run.parameters.push_back(std::move(next.params));
    }
    fill_result(run.result, run.final_batch, problem.gamma);
    run.result.estimator_kind = EstimatorKind::FinalTrial;
    run.result.level_trace = run.levels;
    run.result.seed = rng.seed();
    run.result.runtime_ms = elapsed_ms(start);
    return run;
}

}  // namespace cepmc
