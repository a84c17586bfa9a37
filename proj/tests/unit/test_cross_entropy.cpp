#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "../support/oracles.hpp"
#include "cepmc/cross_entropy.hpp"
#include "cepmc/errors.hpp"
#include "cepmc/problems.hpp"

using namespace cepmc;

namespace {

RareEventProblem first_coordinate_problem(int dim, double gamma) {
    return {"x1", "first coordinate", GaussianParams::isotropic(Vector::Zero(dim), 1.0),
            [](const Eigen::Ref<const Vector>& x) { return x(0); }, gamma, normal_cdf(-gamma), std::nullopt};
}

}  // namespace

TEST_CASE("sample_quantile: order-statistic index") {
    std::vector<double> s(10);
    std::iota(s.begin(), s.end(), 1.0);
    CHECK(sample_quantile(s, 0.1) == 9.0);
    CHECK(sample_quantile(s, 0.95) == 1.0);
    CHECK(sample_quantile(std::vector<double>{5.0}, 0.3) == 5.0);

    std::vector<double> big(2500);
    std::iota(big.begin(), big.end(), 1.0);
    CHECK(sample_quantile(big, 0.1) == 2250.0);
}

TEST_CASE("sample_quantile: errors") {
    CHECK_THROWS_AS(sample_quantile(std::vector<double>{}, 0.1), EmptyBatch);
    CHECK_THROWS_AS(sample_quantile(std::vector<double>{1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_quantile(std::vector<double>{1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("sample_quantile is permutation invariant") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs(1 + trial * 3);
        for (auto& x : xs) x = rng.normal();
        const double rho = 0.01 + 0.98 * rng.uniform();
        const double q = sample_quantile(xs, rho);
        std::shuffle(xs.begin(), xs.end(), rng.engine());
        CHECK(sample_quantile(xs, rho) == q);
    }
}

TEST_CASE("ce_update: all samples elite with q = pi gives plain moments") {
    const RareEventProblem p = first_coordinate_problem(2, 10.0);
    Rng rng(2);
    const SampleMatrix x = draw(p.base, rng, 50);
    const GaussianParams u = ce_update(x, p.performances(x), std::numeric_limits<double>::lowest(), p.base, p, true);
    const GaussianParams plain = weighted_moment_update(x, Vector::Ones(50));
    CHECK((u.mean() - plain.mean()).norm() <= 1e-12);
    CHECK((u.cov() - plain.cov()).norm() <= 1e-12);
}

TEST_CASE("ce_update: a single elite sample becomes the mean") {
    const RareEventProblem p = first_coordinate_problem(2, 10.0);
    Rng rng(3);
    const SampleMatrix x = draw(p.base, rng, 20);
    const Vector perf = p.performances(x);
    Eigen::Index top = 0;
    perf.maxCoeff(&top);
    const GaussianParams u = ce_update(x, perf, perf(top), p.base, p, false);
    CHECK(u.mean() == x.col(top));
    CHECK(u.cov() == p.base.cov());
    CHECK_THROWS_AS(ce_update(x, perf, perf(top) + 1.0, p.base, p, true), AllWeightsZero);
}

TEST_CASE("ce_update matches direct maximization of the CE objective (1-D)") {
    const RareEventProblem p = first_coordinate_problem(1, 10.0);
    const GaussianParams previous(Vector::Constant(1, 0.8), Matrix::Constant(1, 1, 1.7));
    Rng rng(4);
    const SampleMatrix x = draw(previous, rng, 40);
    const Vector perf = p.performances(x);
    const double level = 0.5;
    // I(S >= level) * pi / q_prev, from the direct density formulas.
    Vector w(40);
    for (Eigen::Index k = 0; k < 40; ++k) {
        const double xv = x(0, k);
        const double q = oracle::phi((xv - 0.8) / std::sqrt(1.7)) / std::sqrt(1.7);
        w(k) = perf(k) >= level ? oracle::phi(xv) / q : 0.0;
    }
    const auto direct = oracle::weighted_gaussian_mle(x, w);
    const GaussianParams u = ce_update(x, perf, level, previous, p, true);
    CHECK(std::abs(u.mean()(0) - direct.mean(0)) <= 1e-4);
    CHECK(std::abs(u.cov()(0, 0) - direct.cov(0, 0)) <= 1e-4);
}

TEST_CASE("guarded_update: fallbacks") {
    const GaussianParams prev = GaussianParams::isotropic(Vector::Zero(2), 1.0);
    Rng rng(5);
    const SampleMatrix x = draw(prev, rng, 6);

    const GuardedUpdate frozen = guarded_update(x, Vector::Zero(6), prev, true);
    CHECK(frozen.outcome == UpdateOutcome::Frozen);
    CHECK(frozen.params.mean() == prev.mean());

    Vector point = Vector::Zero(6);
    point(4) = 2.0;
    const GuardedUpdate singular = guarded_update(x, point, prev, true);
    CHECK(singular.outcome == UpdateOutcome::SingularCovRetained);
    CHECK(singular.params.mean() == x.col(4));
    CHECK(singular.params.cov() == prev.cov());
    CHECK(singular.params.factorizable());

    const GuardedUpdate mean_only = guarded_update(x, Vector::Ones(6), prev, false);
    CHECK(mean_only.outcome == UpdateOutcome::MeanOnly);
    CHECK(mean_only.params.cov() == prev.cov());

    CHECK(guarded_update(x, Vector::Ones(6), prev, true).outcome == UpdateOutcome::Updated);
}

TEST_CASE("run_ce: non-rare event terminates at once with estimate near one half") {
    const RareEventProblem p = first_coordinate_problem(2, 0.0);
    Rng rng(6);
    const CeRun run = run_ce(p, {0.1, 4000, 100}, p.base, rng);
    CHECK(run.trace.iterations == 1);
    CHECK(run.trace.terminated_by == CeTermination::LevelReached);
    CHECK(run.trace.levels.back() == p.gamma);
    CHECK(std::abs(run.result.estimate - 0.5) <= 4.0 * std::sqrt(0.25 / 4000));
}

TEST_CASE("run_ce: zero iterations raises with an empty trace") {
    const RareEventProblem p = make_s4(5.0, 2);
    Rng rng(7);
    try {
        run_ce(p, {0.1, 100, 0}, p.base, rng);
        FAIL("expected MaxIterationsExceeded");
    } catch (const MaxIterationsExceeded& e) {
        CHECK(e.trace().levels.empty());
        CHECK(e.trace().iterations == 0);
        CHECK(e.trace().terminated_by == CeTermination::MaxIterations);
    }
}

TEST_CASE("run_ce: level trace is capped at gamma and mostly non-decreasing") {
    // The likelihood-ratio covariance update can collapse on S4 and stall
    // below gamma; stalled runs still contribute their partial traces.
    const RareEventProblem p = make_s4(5.0, 2);
    int steps = 0, rising = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(derive_seed(99, seed));
        CeTrace trace;
        try {
            const CeRun run = run_ce(p, {0.1, 2000, 40}, p.base, rng);
            trace = run.trace;
            CHECK(trace.terminated_by == CeTermination::LevelReached);
            CHECK(trace.levels.back() == p.gamma);
        } catch (const MaxIterationsExceeded& e) {
            trace = e.trace();
            CHECK(trace.terminated_by == CeTermination::MaxIterations);
            CHECK(trace.iterations == 40);
        }
        REQUIRE(trace.levels.size() == trace.parameters.size());
        for (std::size_t i = 0; i < trace.levels.size(); ++i) {
            CHECK(trace.levels[i] <= p.gamma);
            if (i > 0) {
                ++steps;
                if (trace.levels[i] >= trace.levels[i - 1]) ++rising;
            }
        }
    }
    CHECK(rising >= 0.9 * steps);
}

TEST_CASE("run_ce_fixed_trials: schedule and bookkeeping") {
    const RareEventProblem p = make_s4(3.0, 3);
    Rng rng(8);
    const FixedTrialCeRun run = run_ce_fixed_trials(p, {0.1, 500, 7, 0}, p.base, rng);
    CHECK(run.parameters.size() == 8);
    CHECK(run.levels.size() == 7);
    CHECK(default_cov_schedule_start(7) == 5);
    CHECK(default_cov_schedule_start(20) == 11);
    for (int t = 1; t <= 4; ++t) {
        CHECK(run.outcomes[static_cast<std::size_t>(t - 1)] != UpdateOutcome::Updated);
        CHECK(run.parameters[static_cast<std::size_t>(t)].cov() == p.base.cov());
    }
    for (double l : run.levels) CHECK(l <= p.gamma);
    CHECK(run.final_batch.trial_index == 7);
}
