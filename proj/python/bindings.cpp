#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cepmc/cross_entropy.hpp"
#include "cepmc/errors.hpp"
#include "cepmc/harness/config.hpp"
#include "cepmc/harness/experiment.hpp"
#include "cepmc/kepler.hpp"
#include "cepmc/pmc_baselines.hpp"
#include "cepmc/population.hpp"
#include "cepmc/problems.hpp"

namespace py = pybind11;
using namespace cepmc;

namespace {

py::dict result_dict(const EstimateResult& r) {
    py::dict d;
    d["estimate"] = r.estimate;
    d["std_error"] = r.std_error;
    d["estimator_kind"] = std::string(to_string(r.estimator_kind));
    d["n_effective"] = r.n_effective;
    d["level_trace"] = r.level_trace;
    d["seed"] = r.seed;
    d["runtime_ms"] = r.runtime_ms;
    return d;
}

std::vector<GaussianParams> isotropic_population(const RareEventProblem& problem, int n, Rng& rng) {
    const SampleMatrix means = draw(problem.base, rng, n);
    std::vector<GaussianParams> out;
    for (int i = 0; i < n; ++i) out.emplace_back(means.col(i), problem.base.cov());
    return out;
}

}  // namespace

PYBIND11_MODULE(_cepmc, m) {
    m.doc() = "Rare-event probability estimation with cross-entropy population Monte Carlo";

    py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", PyExc_ValueError);
    py::register_exception<AllWeightsZero>(m, "AllWeightsZero", PyExc_ArithmeticError);
    py::register_exception<NonFiniteWeight>(m, "NonFiniteWeight", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<MaxIterationsExceeded>(m, "MaxIterationsExceeded", PyExc_RuntimeError);

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("normal", &Rng::normal)
        .def("uniform", &Rng::uniform)
        .def_property_readonly("seed", &Rng::seed);
    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("replication"));

    py::class_<GaussianParams>(m, "GaussianParams")
        .def(py::init<Vector, Matrix>(), py::arg("mean"), py::arg("cov"))
        .def_static("isotropic", &GaussianParams::isotropic, py::arg("mean"), py::arg("sigma"))
        .def_property_readonly("mean", [](const GaussianParams& g) { return Vector(g.mean()); })
        .def_property_readonly("cov", [](const GaussianParams& g) { return Matrix(g.cov()); })
        .def_property_readonly("dim", &GaussianParams::dim)
        .def("factorizable", &GaussianParams::factorizable)
        .def("__repr__", [](const GaussianParams& g) { return "<GaussianParams dim=" + std::to_string(g.dim()) + ">"; });

    m.def("factorize", &factorize, py::arg("cov"));
    m.def("log_density", py::overload_cast<const GaussianParams&, const Eigen::Ref<const Vector>&>(&log_density),
          py::arg("params"), py::arg("x"));
    m.def("log_densities", &log_densities, py::arg("params"), py::arg("samples"));
    m.def("draw", &draw, py::arg("params"), py::arg("rng"), py::arg("count"));
    m.def("weighted_moment_update",
          py::overload_cast<const SampleMatrix&, const Vector&>(&weighted_moment_update), py::arg("samples"),
          py::arg("weights"));
    m.def("sample_quantile", py::overload_cast<const Vector&, double>(&sample_quantile), py::arg("performances"),
          py::arg("rho"));

    py::class_<RareEventProblem>(m, "Problem")
        .def_readonly("id", &RareEventProblem::id)
        .def_readonly("description", &RareEventProblem::description)
        .def_readonly("base", &RareEventProblem::base)
        .def_readonly("gamma", &RareEventProblem::gamma)
        .def_property_readonly("dim", &RareEventProblem::dim)
        .def_property_readonly("truth", &RareEventProblem::truth)
        .def("performance", [](const RareEventProblem& p, const Vector& x) { return p.performance(x); })
        .def("performances", &RareEventProblem::performances, py::arg("samples"));

    m.def("problem_ids", &problem_ids);
    m.def(
        "make_problem",
        [](const std::string& id, double beta, int dim, const std::string& form) {
            ProblemParams params;
            params.beta = beta;
            params.dim = dim;
            if (form == "linear") params.form = LimitStateForm::Linear;
            else if (form != "squared") throw ConfigError("form must be 'squared' or 'linear'");
            return make_problem(id, params);
        },
        py::arg("id"), py::arg("beta") = 5.0, py::arg("dim") = 2, py::arg("form") = "squared");
    m.def("normal_cdf", &normal_cdf, py::arg("z"));
    m.def(
        "dm_weights",
        [](const std::vector<SampleMatrix>& samples, const std::vector<GaussianParams>& proposals,
           const RareEventProblem& problem) { return dm_weights(samples, proposals, problem); },
        py::arg("samples"), py::arg("proposals"), py::arg("problem"));

    auto method = [&](const char* name, auto fn, const char* doc) {
        m.def(
            name,
            [fn](const RareEventProblem& problem, int proposals, Eigen::Index samples, int trials, double rho,
                 std::uint64_t seed, std::optional<std::vector<GaussianParams>> init) {
                RunConfig cfg;
                cfg.proposals = proposals;
                cfg.samples = samples;
                cfg.trials = trials;
                cfg.rho = rho;
                cfg.seed = seed;
                Rng rng(seed);
                const auto start = init ? *init : isotropic_population(problem, proposals, rng);
                auto run = fn(problem, cfg, start, rng);
                py::dict d = result_dict(run.result);
                d["final_proposals"] = run.parameter_trace.back();
                return d;
            },
            py::arg("problem"), py::arg("proposals") = 25, py::arg("samples") = 100, py::arg("trials") = 20,
            py::arg("rho") = 0.1, py::arg("seed") = 0, py::arg("init") = py::none(), doc);
    };
    method("run_cepmc", &run_cepmc, "Cross-entropy population Monte Carlo");
    method("run_lr_pmc", &run_lr_pmc, "Local-resampling PMC baseline");
    method("run_gr_pmc", &run_gr_pmc, "Global-resampling PMC baseline");

    m.def(
        "run_ce",
        [](const RareEventProblem& problem, double rho, Eigen::Index samples, int max_iterations,
           std::uint64_t seed) {
            Rng rng(seed);
            CeRun run = run_ce(problem, {rho, samples, max_iterations}, problem.base, rng);
            py::dict d = result_dict(run.result);
            d["iterations"] = run.trace.iterations;
            return d;
        },
        py::arg("problem"), py::arg("rho") = 0.1, py::arg("samples") = 1000, py::arg("max_iterations") = 100,
        py::arg("seed") = 0);

    py::class_<OrbitalState>(m, "OrbitalState")
        .def(py::init([](const Eigen::Vector3d& r, const Eigen::Vector3d& v, double epoch) {
                 return OrbitalState{r, v, epoch};
             }),
             py::arg("position"), py::arg("velocity"), py::arg("epoch") = 0.0)
        .def_readwrite("position", &OrbitalState::position)
        .def_readwrite("velocity", &OrbitalState::velocity)
        .def_readwrite("epoch", &OrbitalState::epoch);
    m.attr("MU_EARTH") = kMuEarth;
    m.def("kepler_propagate", &kepler_propagate, py::arg("state"), py::arg("dt"), py::arg("mu") = kMuEarth);
    m.def("specific_energy", &specific_energy, py::arg("state"), py::arg("mu") = kMuEarth);
    m.def("orbital_period", &orbital_period, py::arg("state"), py::arg("mu") = kMuEarth);

    m.def(
        "run_experiment",
        [](const std::string& config_text, std::optional<int> reps, std::optional<std::uint64_t> seed,
           std::optional<std::string> out, int threads) {
            const auto plan = harness::build_plan(harness::KeyValueConfig::parse(config_text), {reps, seed, out});
            std::vector<harness::CellResult> cells;
            {
                py::gil_scoped_release release;
                cells = harness::run_plan(plan, threads);
            }
            if (out) harness::write_outputs(plan, cells);
            py::dict d;
            d["replications_csv"] = harness::replications_csv(cells);
            d["summary_csv"] = harness::summary_csv(cells);
            return d;
        },
        py::arg("config_text"), py::arg("reps") = py::none(), py::arg("seed") = py::none(),
        py::arg("out") = py::none(), py::arg("threads") = 1,
        "Runs an experiment described by config text; returns the CSV bodies and writes them to `out` if given.");
}
