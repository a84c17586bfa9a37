#include "cepmc/harness/plot_data.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cepmc/harness/config.hpp"
#include "cepmc/harness/experiment.hpp"

namespace cepmc::harness {

namespace fs = std::filesystem;

std::string contour_csv(const RareEventProblem& problem, const std::vector<GaussianParams>& mixture,
                        const PlotOptions& options) {
    if (problem.dim() != 2) throw std::invalid_argument("contour_csv: problem must be 2-D");
    const int m = options.grid_points;
    const double step = m > 1 ? (options.grid_max - options.grid_min) / (m - 1) : 0.0;
    SampleMatrix grid(2, static_cast<Eigen::Index>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            grid.col(static_cast<Eigen::Index>(i) * m + j) << options.grid_min + i * step, options.grid_min + j * step;

    const Vector log_pi = problem.log_base_density(grid);
    const Vector perf = problem.performances(grid);
    Vector mix = Vector::Zero(grid.cols());
    for (const auto& q : mixture) mix += log_densities(q, grid).array().exp().matrix();
    if (!mixture.empty()) mix /= static_cast<double>(mixture.size());

    std::ostringstream out;
    out << "x1,x2,log_base_density,indicator,optimal_density_unnormalized,mixture_density\n";
    for (Eigen::Index k = 0; k < grid.cols(); ++k) {
        const bool hit = perf(k) >= problem.gamma;
        out << format_double(grid(0, k)) << ',' << format_double(grid(1, k)) << ',' << format_double(log_pi(k)) << ','
            << (hit ? 1 : 0) << ',' << format_double(hit ? std::exp(log_pi(k)) : 0.0) << ',' << format_double(mix(k))
            << '\n';
    }
    return out.str();
}

namespace {

std::vector<double> trace_offsets(const PlotOptions& options) {
    std::vector<double> out;
    const int steps = static_cast<int>(std::floor(2.0 * options.trace_half_window / options.trace_step + 1e-9));
    for (int i = 0; i <= steps; ++i) out.push_back(-options.trace_half_window + i * options.trace_step);
    return out;
}

std::string trace_header(const PlotOptions& options) {
    std::string h = "kind,proposal,sample";
    for (double dt : trace_offsets(options))
        for (const char* axis : {"x", "y", "z"}) h += std::string(",") + axis + "@" + format_double(dt);
    return h + "\n";
}

void append_trace(std::ostringstream& out, const OrbitalState& at_t0, const ConjunctionScenario& scenario,
                  const PlotOptions& options) {
    const OrbitalState anchor = kepler_propagate(at_t0, scenario.horizon, scenario.mu_grav);
    for (double dt : trace_offsets(options)) {
        const auto p = kepler_propagate(anchor, dt, scenario.mu_grav).position;
        out << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z());
    }
    out << '\n';
}

}  // namespace

std::string rogue_traces_csv(const ConjunctionScenario& scenario, const std::vector<SampleMatrix>& perturbations,
                             const std::string& kind, const PlotOptions& options) {
    std::ostringstream out;
    out << trace_header(options);
    const bool from_base = perturbations.size() == 1 && kind == "mc";
    for (std::size_t n = 0; n < perturbations.size(); ++n) {
        for (Eigen::Index k = 0; k < perturbations[n].cols(); ++k) {
            OrbitalState s = scenario.rogue_mean;
            s.position += perturbations[n].col(k).head<3>();
            s.velocity += perturbations[n].col(k).tail<3>();
            out << kind << ',' << (from_base ? -1 : static_cast<long>(n)) << ',' << k;
            append_trace(out, s, scenario, options);
        }
    }
    return out.str();
}

std::string asset_traces_csv(const ConjunctionScenario& scenario, const PlotOptions& options) {
    std::ostringstream out;
    out << trace_header(options);
    for (std::size_t i = 0; i < scenario.assets.size(); ++i) {
        out << "asset," << i << ",0";
        append_trace(out, scenario.assets[i], scenario, options);
    }
    return out.str();
}

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(path);
    if (!in) return rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string f;
        std::istringstream ls(line);
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        rows.push_back(std::move(fields));
    }
    return rows;
}

Vector parse_spaced(const std::string& text) {
    std::istringstream in(text);
    std::vector<double> v;
    double x;
    while (in >> x) v.push_back(x);
    return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_file(const fs::path& path, const std::string& body, std::vector<std::string>& written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    written.push_back(path.string());
}

}  // namespace

std::vector<std::string> emit_plot_data(const std::string& from_dir, const std::string& out_dir,
                                        const PlotOptions& options) {
    std::vector<std::string> written;
    const fs::path from(from_dir);
    if (!fs::exists(from / "run.cfg")) return written;
    const ExperimentPlan plan = build_plan(KeyValueConfig::load((from / "run.cfg").string()));

    // Final mixtures, grouped by cell index.
    std::map<std::size_t, std::vector<GaussianParams>> mixtures;
    for (const auto& row : read_csv_rows(from / "final_proposals.csv")) {
        if (row.size() < 13) continue;
        const std::size_t cell = std::stoul(row[0]);
        const Vector mean = parse_spaced(row[11]);
        const Vector cov_flat = parse_spaced(row[12]);
        const auto d = mean.size();
        if (cov_flat.size() != d * d) continue;
        const Matrix cov = Eigen::Map<const Matrix>(cov_flat.data(), d, d).transpose();
        mixtures[cell].emplace_back(mean, cov);
    }

    const auto summary = read_csv_rows(from / "summary.csv");
    if (mixtures.empty() && summary.empty()) return written;
    const fs::path out(out_dir);
    fs::create_directories(out);

    for (const auto& [cell_index, mixture] : mixtures) {
        if (cell_index >= plan.cells.size()) continue;
        const ExperimentSpec& spec = plan.cells[cell_index];
        const RareEventProblem problem = make_problem(spec.problem_id, spec.problem_params);
        std::ostringstream stem;
        stem << spec.experiment_id << '_' << to_string(spec.method) << '_' << spec.problem_id << "_rho"
             << format_double(spec.run.rho);
        if (problem.dim() == 2) {
            write_file(out / ("contour_" + stem.str() + ".csv"), contour_csv(problem, mixture, options), written);
        } else if (spec.problem_id == "conjunction") {
            Rng rng(derive_seed(plan.master_seed, 0xF16'3ULL + cell_index));
            std::vector<SampleMatrix> per_proposal;
            for (const auto& q : mixture) per_proposal.push_back(draw(q, rng, options.trace_samples_per_proposal));
            const auto& sc = spec.problem_params.scenario;
            write_file(out / ("traces_" + stem.str() + ".csv"),
                       rogue_traces_csv(sc, per_proposal, "proposal", options), written);
            write_file(out / ("traces_mc_" + stem.str() + ".csv"),
                       rogue_traces_csv(sc, {draw(problem.base, rng, options.mc_traces)}, "mc", options), written);
            write_file(out / ("traces_assets_" + stem.str() + ".csv"), asset_traces_csv(sc, options), written);
        }
    }

    // Mean estimate against dimension for the linear limit state.
    std::ostringstream sweep;
    sweep << "method,rho,D,mean_estimate,std_error,truth\n";
    bool any_sweep = false;
    for (const auto& row : summary) {
        if (row.size() < 14 || row[2] != "s4") continue;
        any_sweep = true;
        sweep << row[1] << ',' << row[7] << ',' << row[3] << ',' << row[10] << ',' << row[11] << ',' << row[13] << '\n';
    }
    if (any_sweep) write_file(out / "dimension_sweep.csv", sweep.str(), written);
    return written;
}

}  // namespace cepmc::harness
