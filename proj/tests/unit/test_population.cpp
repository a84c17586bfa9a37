#include <doctest.h>

#include <cmath>
#include <limits>

#include "cepmc/population.hpp"
#include "cepmc/problems.hpp"

using namespace cepmc;

namespace {

std::vector<GaussianParams> spread_population(int n, int d) {
    std::vector<GaussianParams> out;
    for (int i = 0; i < n; ++i) out.push_back(GaussianParams::isotropic(Vector::Constant(d, 0.5 * i - 0.5), 1.0));
    return out;
}

}  // namespace

TEST_CASE("RunConfig validation") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
    c.rho = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.rho = 0.1;
    c.cov_schedule_start = c.trials + 2;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.cov_schedule_start = c.trials + 1;  // mean-only throughout
    CHECK_NOTHROW(c.validate());
    c.proposals = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("cepmc_trial: all samples elite and proposals equal to pi give per-proposal moments") {
    RareEventProblem p = make_s4(5.0, 2);
    p.gamma = std::numeric_limits<double>::lowest();
    RunConfig cfg;
    cfg.proposals = 3;
    cfg.samples = 40;
    cfg.trials = 4;
    cfg.cov_schedule_start = 1;
    PopulationState state{std::vector<GaussianParams>(3, p.base), 1, {}};
    Rng rng(1);
    const TrialResult tr = cepmc_trial(state, p, cfg, rng);
    for (std::size_t i = 0; i < 3; ++i) {
        const GaussianParams plain = weighted_moment_update(tr.batch.samples[i], Vector::Ones(40));
        CHECK((tr.state.proposals[i].mean() - plain.mean()).norm() <= 1e-12);
        CHECK((tr.state.proposals[i].cov() - plain.cov()).norm() <= 1e-12);
        CHECK(tr.outcomes[i] == UpdateOutcome::Updated);
    }
    CHECK(tr.state.trial == 2);
    CHECK(tr.state.level_trace.size() == 1);
}

TEST_CASE("cepmc_trial: a proposal with no elite mass is frozen") {
    const RareEventProblem p = make_s4(3.0, 1);
    RunConfig cfg;
    cfg.proposals = 2;
    cfg.samples = 50;
    cfg.trials = 2;
    const std::vector<GaussianParams> props{GaussianParams::isotropic(Vector::Constant(1, 3.0), 0.5),
                                            GaussianParams::isotropic(Vector::Constant(1, -10.0), 0.5)};
    Rng rng(2);
    const TrialResult tr = cepmc_trial({props, 1, {}}, p, cfg, rng);
    CHECK(tr.outcomes[1] == UpdateOutcome::Frozen);
    CHECK(tr.state.proposals[1].mean() == props[1].mean());
    CHECK(tr.state.proposals[1].cov() == props[1].cov());
    CHECK(tr.outcomes[0] == UpdateOutcome::MeanOnly);
}

TEST_CASE("cepmc_trial: singular covariance update keeps the previous covariance") {
    // With K = 10, rho = 0.1 the level is the 9th order statistic: two
    // elite points in 2-D give a rank-one covariance.
    const RareEventProblem p = make_s4(50.0, 2);
    RunConfig cfg;
    cfg.proposals = 1;
    cfg.samples = 10;
    cfg.trials = 2;
    cfg.cov_schedule_start = 1;
    const std::vector<GaussianParams> props{GaussianParams::isotropic(Vector::Zero(2), 1.0)};
    Rng rng(3);
    const TrialResult tr = cepmc_trial({props, 1, {}}, p, cfg, rng);
    CHECK(tr.outcomes[0] == UpdateOutcome::SingularCovRetained);
    CHECK(tr.state.proposals[0].cov() == props[0].cov());
    CHECK(tr.state.proposals[0].factorizable());
    CHECK(tr.state.proposals[0].mean() != props[0].mean());
}

TEST_CASE("cepmc_update is equivariant under relabelling proposals") {
    const RareEventProblem p = make_s3();
    RunConfig cfg;
    cfg.proposals = 4;
    cfg.samples = 60;
    cfg.trials = 2;
    cfg.cov_schedule_start = 1;
    const auto props = spread_population(4, 2);
    Rng rng(4);
    const WeightedBatch batch = draw_population_batch(props, p, cfg.samples, rng, 1);
    const TrialResult base = cepmc_update({props, 1, {}}, batch, p, cfg);

    const std::vector<std::size_t> perm{3, 1, 0, 2};
    std::vector<GaussianParams> pp;
    WeightedBatch pb;
    pb.performances.resize(4, cfg.samples);
    for (std::size_t r = 0; r < perm.size(); ++r) {
        pp.push_back(props[perm[r]]);
        pb.samples.push_back(batch.samples[perm[r]]);
    }
    for (std::size_t r = 0; r < perm.size(); ++r)
        pb.performances.row(static_cast<Eigen::Index>(r)) = batch.performances.row(static_cast<Eigen::Index>(perm[r]));
    pb.dm_weights = dm_weights(pb.samples, pp, p);
    const TrialResult permuted = cepmc_update({pp, 1, {}}, pb, p, cfg);

    CHECK(permuted.batch.level == base.batch.level);
    for (std::size_t r = 0; r < perm.size(); ++r) {
        const auto& a = permuted.state.proposals[r];
        const auto& b = base.state.proposals[perm[r]];
        CHECK((a.mean() - b.mean()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((a.cov() - b.cov()).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("run_cepmc: N = 1 reproduces fixed-trial cross-entropy exactly") {
    const RareEventProblem p = make_s4(4.0, 3);
    RunConfig cfg;
    cfg.proposals = 1;
    cfg.samples = 300;
    cfg.trials = 10;
    const GaussianParams init = GaussianParams::isotropic(Vector::Constant(3, 0.25), 1.0);
    Rng a(5), b(5);
    const PopulationRun pop = run_cepmc(p, cfg, {init}, a);
    const FixedTrialCeRun ce = run_ce_fixed_trials(p, {cfg.rho, cfg.samples, cfg.trials, 0}, init, b);
    REQUIRE(pop.parameter_trace.size() == ce.parameters.size());
    for (std::size_t t = 0; t < ce.parameters.size(); ++t) {
        CHECK((pop.parameter_trace[t][0].mean() - ce.parameters[t].mean()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((pop.parameter_trace[t][0].cov() - ce.parameters[t].cov()).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK(pop.result.estimate == doctest::Approx(ce.result.estimate).epsilon(1e-12));
}

TEST_CASE("run_cepmc: invariants over a full run") {
    const RareEventProblem p = make_s3();
    RunConfig cfg;
    cfg.proposals = 6;
    cfg.samples = 100;
    cfg.trials = 10;
    Rng rng(6);
    const PopulationRun run = run_cepmc(p, cfg, spread_population(6, 2), rng);
    CHECK(run.batches.size() == 10);
    CHECK(run.parameter_trace.size() == 11);
    for (const auto& b : run.batches) {
        CHECK(b.level <= p.gamma);
        CHECK((b.dm_weights.array() >= 0.0).all());
        CHECK(b.dm_weights.allFinite());
    }
    for (const auto& gen : run.parameter_trace)
        for (const auto& q : gen) CHECK(q.factorizable());
    // Covariances only move from the scheduled trial on (trial 6 for T = 10).
    for (std::size_t t = 1; t <= 5; ++t)
        for (std::size_t i = 0; i < 6; ++i) CHECK(run.parameter_trace[t][i].cov() == run.parameter_trace[0][i].cov());
    // The estimate counts only samples at the true threshold.
    CHECK(run.result.estimate == final_trial_estimate(run.batches.back(), p.gamma));
    CHECK(run.result.level_trace.size() == 10);
}

TEST_CASE("run_cepmc: single untempered trial from pi is a plain MIS estimate") {
    const RareEventProblem p = make_s4(0.5, 2);
    RunConfig cfg;
    cfg.proposals = 3;
    cfg.samples = 1000;
    cfg.trials = 1;
    Rng rng(7);
    const PopulationRun run = run_cepmc(p, cfg, std::vector<GaussianParams>(3, p.base), rng);
    const WeightedBatch& b = run.batches.front();
    CHECK((b.dm_weights.array() - 1.0).abs().maxCoeff() <= 1e-12);
    const double hits = (b.performances.array() >= p.gamma).cast<double>().mean();
    CHECK(run.result.estimate == doctest::Approx(hits).epsilon(1e-12));
    CHECK(std::abs(run.result.estimate - normal_cdf(-0.5)) <= 4.0 * std::sqrt(0.31 * 0.69 / 3000));
}

TEST_CASE("run_cepmc: fresh final batch is drawn from the adapted population") {
    const RareEventProblem p = make_s4(3.0, 2);
    RunConfig cfg;
    cfg.proposals = 2;
    cfg.samples = 200;
    cfg.trials = 4;
    cfg.final_batch = FinalBatch::Fresh;
    Rng rng(8);
    const PopulationRun run = run_cepmc(p, cfg, spread_population(2, 2), rng);
    CHECK(run.estimating_batch.trial_index == 5);
    CHECK(run.result.estimate == final_trial_estimate(run.estimating_batch, p.gamma));
    CHECK_THROWS_AS(run_cepmc(p, cfg, spread_population(3, 2), rng), std::invalid_argument);
}
