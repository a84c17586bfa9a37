#pragma once

#include <functional>
#include <optional>
#include <string>

#include "cepmc/gaussian.hpp"

namespace cepmc {

using PerformanceFn = std::function<double(const Eigen::Ref<const Vector>&)>;
using LogDensityFn = std::function<double(const Eigen::Ref<const Vector>&)>;

/// A rare-event problem in exceedance form: estimate P(S(x) >= gamma) for
/// x ~ base. Problems whose natural event is {S <= 0} store -S.
struct RareEventProblem {
    std::string id;
    std::string description;
    GaussianParams base;
    PerformanceFn performance;
    double gamma = 0.0;
    /// Closed-form probability when one exists.
    std::optional<double> exact_probability;
    /// Literature reference value used for RRMSE.
    std::optional<double> reference_probability;

    Eigen::Index dim() const noexcept { return base.dim(); }

    double log_base_density(const Eigen::Ref<const Vector>& x) const { return log_density(base, x); }
    Vector log_base_density(const SampleMatrix& samples) const { return log_densities(base, samples); }
    LogDensityFn log_base_density_fn() const {
        return [b = base](const Eigen::Ref<const Vector>& x) { return log_density(b, x); };
    }

    /// S evaluated on every column.
    Vector performances(const SampleMatrix& samples) const;

    /// exact_probability if known, else reference_probability.
    std::optional<double> truth() const {
        return exact_probability ? exact_probability : reference_probability;
    }
};

}  // namespace cepmc
