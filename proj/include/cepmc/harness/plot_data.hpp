#pragma once

#include <string>
#include <vector>

#include "cepmc/problems.hpp"

namespace cepmc::harness {

struct PlotOptions {
    double grid_min = -7.0;
    double grid_max = 7.0;
    int grid_points = 141;
    int trace_samples_per_proposal = 50;
    int mc_traces = 1000;
    double trace_half_window = 5.0;  // s around t1
    double trace_step = 1.0;         // s
};

/// Grid evaluation over [grid_min, grid_max]^2 of a 2-D problem: base
/// log-density, event indicator, unnormalized optimal density I * pi and the
/// equal-weight mixture density of `mixture`.
std::string contour_csv(const RareEventProblem& problem, const std::vector<GaussianParams>& mixture,
                        const PlotOptions& options);

/// One row per rogue trace, positions sampled on [t1 - w, t1 + w]. `kind`
/// labels the rows; `proposal` is -1 for samples from the base density.
std::string rogue_traces_csv(const ConjunctionScenario& scenario, const std::vector<SampleMatrix>& perturbations,
                             const std::string& kind, const PlotOptions& options);
std::string asset_traces_csv(const ConjunctionScenario& scenario, const PlotOptions& options);

/// Reads the outputs of a `run` from `from_dir` and writes plot-ready CSVs
/// into `out_dir`. Returns the files written; a directory without run
/// outputs yields none.
std::vector<std::string> emit_plot_data(const std::string& from_dir, const std::string& out_dir,
                                        const PlotOptions& options = {});

}  // namespace cepmc::harness
