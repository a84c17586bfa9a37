#include "cepmc/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "cepmc/cross_entropy.hpp"
#include "cepmc/errors.hpp"
#include "cepmc/pmc_baselines.hpp"

namespace cepmc::harness {

std::vector<Vector> latin_hypercube_init(int n, int d, Rng& rng) {
    if (n < 1 || d < 1) throw std::invalid_argument("latin_hypercube_init: N and D must be positive");
    std::vector<Vector> points(static_cast<std::size_t>(n), Vector(d));
    std::vector<int> strata(static_cast<std::size_t>(n));
    for (int j = 0; j < d; ++j) {
        std::iota(strata.begin(), strata.end(), 0);
        // Fisher-Yates with the shared stream, so the layout is reproducible.
        for (int i = n - 1; i > 0; --i) {
            const auto pick = static_cast<int>(rng.uniform() * (i + 1));
            std::swap(strata[static_cast<std::size_t>(i)], strata[static_cast<std::size_t>(std::min(pick, i))]);
        }
        for (int i = 0; i < n; ++i)
            points[static_cast<std::size_t>(i)](j) = 2.0 * (strata[static_cast<std::size_t>(i)] + 0.5) / n - 1.0;
    }
    return points;
}

std::vector<GaussianParams> initial_proposals(const ExperimentSpec& spec, const RareEventProblem& problem,
                                              Rng& rng) {
    const int n = spec.run.proposals;
    const Matrix cov = spec.init_sigma * spec.init_sigma * problem.base.cov();
    std::vector<GaussianParams> out;
    out.reserve(static_cast<std::size_t>(n));
    switch (spec.init) {
        case InitScheme::StandardNormal: {
            const SampleMatrix means = draw(problem.base, rng, n);
            for (int i = 0; i < n; ++i) out.emplace_back(means.col(i), cov);
            break;
        }
        case InitScheme::LatinHypercube: {
            const auto pts = latin_hypercube_init(n, static_cast<int>(problem.dim()), rng);
            for (const auto& u : pts) out.emplace_back(problem.base.mean() + problem.base.factor() * u, cov);
            break;
        }
        case InitScheme::Explicit:
            for (const auto& m : spec.explicit_means) out.emplace_back(m, cov);
            break;
    }
    return out;
}

namespace {

EstimateResult plain_monte_carlo(const RareEventProblem& problem, Eigen::Index total, Rng& rng) {
    constexpr Eigen::Index kChunk = 100000;
    const auto start = std::chrono::steady_clock::now();
    Eigen::Index hits = 0;
    for (Eigen::Index done = 0; done < total; done += kChunk) {
        const SampleMatrix x = draw(problem.base, rng, std::min(kChunk, total - done));
        hits += (problem.performances(x).array() >= problem.gamma).count();
    }
    EstimateResult r;
    const double n = static_cast<double>(total);
    r.estimate = static_cast<double>(hits) / n;
    r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / n);
    r.estimator_kind = EstimatorKind::PlainMC;
    r.n_effective = n;
    r.seed = rng.seed();
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

ReplicationRecord run_replication(const ExperimentSpec& spec, int rep, std::uint64_t seed) {
    ReplicationRecord rec;
    rec.rep = rep;
    rec.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    try {
        const RareEventProblem problem = make_problem(spec.problem_id, spec.problem_params);
        Rng rng(seed);
        EstimateResult result;
        const Eigen::Index budget = static_cast<Eigen::Index>(spec.run.proposals) * spec.run.samples;
        switch (spec.method) {
            case Method::CePmc: {
                auto init = initial_proposals(spec, problem, rng);
                auto run = run_cepmc(problem, spec.run, init, rng);
                result = run.result;
                rec.final_proposals = run.final_proposals();
                break;
            }
            case Method::LrPmc:
            case Method::GrPmc: {
                auto init = initial_proposals(spec, problem, rng);
                auto run = spec.method == Method::LrPmc ? run_lr_pmc(problem, spec.run, init, rng)
                                                        : run_gr_pmc(problem, spec.run, init, rng);
                result = run.result;
                rec.final_proposals = run.parameter_trace.back();
                break;
            }
            case Method::Ce: {
                // A single proposal starts at the base density unless means are given.
                ExperimentSpec single = spec;
                single.run.proposals = 1;
                std::vector<GaussianParams> init;
                if (spec.init == InitScheme::StandardNormal)
                    init.emplace_back(problem.base.mean(), spec.init_sigma * spec.init_sigma * problem.base.cov());
                else
                    init = initial_proposals(single, problem, rng);
                CeOptions opts{spec.run.rho, budget, spec.max_iterations};
                auto run = run_ce(problem, opts, init.front(), rng);
                result = run.result;
                rec.final_proposals = {run.trace.parameters.back()};
                break;
            }
            case Method::PlainMc:
                result = plain_monte_carlo(problem, budget, rng);
                break;
        }
        if (!std::isfinite(result.estimate)) throw NonFiniteWeight("non-finite estimate");
        rec.estimate = result.estimate;
        rec.std_error = result.std_error;
        rec.ess_final = result.n_effective;
    } catch (const MaxIterationsExceeded& e) {
        rec.error = std::string("MaxIterationsExceeded: ") + e.what();
    } catch (const NotPositiveDefinite& e) {
        rec.error = std::string("NotPositiveDefinite: ") + e.what();
    } catch (const AllWeightsZero& e) {
        rec.error = std::string("AllWeightsZero: ") + e.what();
    } catch (const NonFiniteWeight& e) {
        rec.error = std::string("NonFiniteWeight: ") + e.what();
    } catch (const NoConvergence& e) {
        rec.error = std::string("NoConvergence: ") + e.what();
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

CellSummary summarize(const CellResult& cell) {
    CellSummary s;
    std::vector<double> estimates;
    double runtime = 0.0;
    for (const auto& r : cell.reps) {
        runtime += r.runtime_ms;
        if (r.estimate) estimates.push_back(*r.estimate);
        else ++s.failures;
    }
    s.completed = static_cast<int>(estimates.size());
    if (!cell.reps.empty()) s.mean_runtime_ms = runtime / static_cast<double>(cell.reps.size());
    if (estimates.empty()) return s;
    const double m = std::accumulate(estimates.begin(), estimates.end(), 0.0) / static_cast<double>(estimates.size());
    s.mean_estimate = m;
    if (estimates.size() > 1) {
        double sq = 0.0;
        for (double e : estimates) sq += (e - m) * (e - m);
        s.std_error = std::sqrt(sq / static_cast<double>(estimates.size() - 1) / static_cast<double>(estimates.size()));
    }
    if (cell.reference && *cell.reference > 0.0) s.rrmse = rrmse(estimates, *cell.reference);
    return s;
}

std::vector<CellResult> run_plan(const ExperimentPlan& plan, int threads) {
    std::vector<CellResult> cells;
    cells.reserve(plan.cells.size());
    std::vector<std::pair<std::size_t, int>> jobs;
    for (std::size_t c = 0; c < plan.cells.size(); ++c) {
        const auto& spec = plan.cells[c];
        const RareEventProblem problem = make_problem(spec.problem_id, spec.problem_params);
        CellResult cell{spec, static_cast<int>(problem.dim()), problem.truth(), {}};
        cell.reps.resize(static_cast<std::size_t>(spec.replications));
        cells.push_back(std::move(cell));
        for (int r = 0; r < spec.replications; ++r) jobs.emplace_back(c, r);
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const auto [c, r] = jobs[j];
            const auto& spec = plan.cells[c];
            cells[c].reps[static_cast<std::size_t>(r)] =
                run_replication(spec, r, derive_seed(plan.master_seed, static_cast<std::uint64_t>(r)));
        }
    };
    const int n_threads = std::max(1, threads);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    return cells;
}

namespace {

// Commas and newlines would break the CSV; errors are free text.
std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

std::string cell_key(const CellResult& cell) {
    const auto& s = cell.spec;
    std::ostringstream out;
    out << s.experiment_id << ',' << to_string(s.method) << ',' << s.problem_id << ',' << cell.dim << ','
        << s.run.proposals << ',' << s.run.samples << ',' << s.run.trials << ',' << format_double(s.run.rho);
    return out.str();
}

std::string optional_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string join_values(const double* data, Eigen::Index n) {
    std::string out;
    for (Eigen::Index i = 0; i < n; ++i) out += (i ? " " : "") + format_double(data[i]);
    return out;
}

}  // namespace

std::string replications_csv(const std::vector<CellResult>& cells) {
    std::ostringstream out;
    out << "experiment_id,method,problem,D,N,K,T,rho,rep,seed,estimate,estimate_clamped,reference,ess_final,error\n";
    for (const auto& cell : cells) {
        const std::string key = cell_key(cell);
        for (const auto& r : cell.reps) {
            out << key << ',' << r.rep << ',' << r.seed << ',';
            if (r.estimate) {
                out << format_double(*r.estimate) << ',' << format_double(std::clamp(*r.estimate, 0.0, 1.0));
            } else {
                out << ',';
            }
            out << ',' << optional_double(cell.reference) << ',';
            if (r.estimate) out << format_double(r.ess_final);
            out << ',' << sanitize(r.error) << '\n';
        }
    }
    return out.str();
}

std::string summary_csv(const std::vector<CellResult>& cells) {
    std::ostringstream out;
    out << "experiment_id,method,problem,D,N,K,T,rho,replications,failures,mean_estimate,std_error,rrmse,reference\n";
    for (const auto& cell : cells) {
        const CellSummary s = summarize(cell);
        out << cell_key(cell) << ',' << cell.reps.size() << ',' << s.failures << ',';
        if (s.completed > 0) out << format_double(s.mean_estimate) << ',' << format_double(s.std_error);
        else out << ',';
        out << ',' << optional_double(s.rrmse) << ',' << optional_double(cell.reference) << '\n';
    }
    return out.str();
}

std::string final_proposals_csv(const std::vector<CellResult>& cells) {
    std::ostringstream out;
    out << "cell,experiment_id,method,problem,D,N,K,T,rho,rep,proposal,mean,cov\n";
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        if (cell.reps.empty()) continue;
        const auto& r = cell.reps.front();
        for (std::size_t i = 0; i < r.final_proposals.size(); ++i) {
            const auto& p = r.final_proposals[i];
            const Matrix cov_rm = p.cov().transpose();  // column-major storage of the transpose = row-major
            out << c << ',' << cell_key(cell) << ',' << r.rep << ',' << i << ','
                << join_values(p.mean().data(), p.mean().size()) << ','
                << join_values(cov_rm.data(), cov_rm.size()) << '\n';
        }
    }
    return out.str();
}

std::string timings_csv(const std::vector<CellResult>& cells) {
    std::ostringstream out;
    out << "experiment_id,method,problem,D,N,K,T,rho,rep,runtime_ms\n";
    for (const auto& cell : cells)
        for (const auto& r : cell.reps) out << cell_key(cell) << ',' << r.rep << ',' << format_double(r.runtime_ms) << '\n';
    return out.str();
}

void write_outputs(const ExperimentPlan& plan, const std::vector<CellResult>& cells) {
    namespace fs = std::filesystem;
    const fs::path dir(plan.output_dir);
    fs::create_directories(dir);
    auto write = [&](const char* name, const std::string& body) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        out << body;
    };
    write("replications.csv", replications_csv(cells));
    write("summary.csv", summary_csv(cells));
    write("final_proposals.csv", final_proposals_csv(cells));
    write("timings.csv", timings_csv(cells));
    write("run.cfg", plan.source.to_string());
}

}  // namespace cepmc::harness
