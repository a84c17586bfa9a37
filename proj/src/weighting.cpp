#include "cepmc/weighting.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cepmc/errors.hpp"

namespace cepmc {

namespace {

Vector evaluate_target(const SampleMatrix& samples, const LogDensityFn& target) {
    Vector out(samples.cols());
    for (Eigen::Index k = 0; k < samples.cols(); ++k) out(k) = target(samples.col(k));
    return out;
}

// log((1/N) sum_m q_m(x)) for every column, by log-sum-exp against the
// per-sample maximum.
Vector log_mixture(const SampleMatrix& samples, const std::vector<GaussianParams>& proposals) {
    const auto n = static_cast<Eigen::Index>(proposals.size());
    Matrix terms(n, samples.cols());
    for (Eigen::Index m = 0; m < n; ++m) terms.row(m) = log_densities(proposals[m], samples).transpose();
    Vector out(samples.cols());
    for (Eigen::Index k = 0; k < samples.cols(); ++k) {
        const double peak = terms.col(k).maxCoeff();
        if (n == 1) {
            out(k) = peak;
            continue;
        }
        out(k) = peak + std::log((terms.col(k).array() - peak).exp().sum()) - std::log(static_cast<double>(n));
    }
    return out;
}

Matrix dm_weights_impl(const std::vector<SampleMatrix>& samples,
                       const std::vector<GaussianParams>& proposals,
                       const std::vector<Vector>& log_target) {
    if (proposals.empty()) throw std::invalid_argument("dm_weights: no proposals");
    if (samples.size() != proposals.size())
        throw std::invalid_argument("dm_weights: one sample block per proposal required");
    const Eigen::Index k = samples.front().cols();
    Matrix w(static_cast<Eigen::Index>(samples.size()), k);
    for (std::size_t n = 0; n < samples.size(); ++n) {
        if (samples[n].cols() != k) throw std::invalid_argument("dm_weights: ragged sample blocks");
        const Vector lw = log_target[n] - log_mixture(samples[n], proposals);
        for (Eigen::Index j = 0; j < k; ++j) {
            const double v = std::exp(lw(j));
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << "dm_weights: non-finite weight at proposal " << n << ", sample " << j
                    << " (log weight " << lw(j) << ")";
                throw NonFiniteWeight(msg.str());
            }
            w(static_cast<Eigen::Index>(n), j) = v;
        }
    }
    return w;
}

}  // namespace

Matrix dm_weights(const std::vector<SampleMatrix>& samples,
                  const std::vector<GaussianParams>& proposals, const LogDensityFn& target) {
    std::vector<Vector> log_target;
    log_target.reserve(samples.size());
    for (const auto& s : samples) log_target.push_back(evaluate_target(s, target));
    return dm_weights_impl(samples, proposals, log_target);
}

Matrix dm_weights(const std::vector<SampleMatrix>& samples,
                  const std::vector<GaussianParams>& proposals, const RareEventProblem& problem) {
    std::vector<Vector> log_target;
    log_target.reserve(samples.size());
    for (const auto& s : samples) log_target.push_back(problem.log_base_density(s));
    return dm_weights_impl(samples, proposals, log_target);
}

Vector standard_is_weights(const SampleMatrix& samples, const GaussianParams& proposal,
                           const LogDensityFn& target) {
    if (samples.cols() == 0) return Vector(0);
    return dm_weights({samples}, {proposal}, target).row(0).transpose();
}

Vector standard_is_weights(const SampleMatrix& samples, const GaussianParams& proposal,
                           const RareEventProblem& problem) {
    if (samples.cols() == 0) return Vector(0);
    return dm_weights({samples}, {proposal}, problem).row(0).transpose();
}

Mask elite_mask(const Vector& performances, double level) {
    return performances.array() >= level;
}

}  // namespace cepmc
