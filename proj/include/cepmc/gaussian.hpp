#pragma once

#include <optional>

#include <Eigen/Dense>

#include "cepmc/rng.hpp"

namespace cepmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Samples are stored column-wise: a D x K matrix holds K points in D dims.
using SampleMatrix = Eigen::MatrixXd;

/// Lower-triangular factor L with L L^T = cov.
///
/// Throws NotPositiveDefinite when the factorization breaks down or when a
/// pivot L_ii^2 falls below 1e-12 times the largest diagonal entry of cov.
/// Throws std::invalid_argument for a non-square or asymmetric input
/// (relative asymmetry above 1e-10).
Matrix factorize(const Matrix& cov);

/// Mean and covariance of one Gaussian proposal.
///
/// The covariance is symmetrized on construction. The factor is computed
/// eagerly; a covariance that fails the factorization is still representable
/// (it is the signal the adaptation loop uses to detect a singular update),
/// but any operation that needs the factor throws NotPositiveDefinite.
class GaussianParams {
public:
    GaussianParams(Vector mean, Matrix cov);

    /// N(0, sigma^2 I_D).
    static GaussianParams isotropic(Vector mean, double sigma);

    const Vector& mean() const noexcept { return mean_; }
    const Matrix& cov() const noexcept { return cov_; }
    Eigen::Index dim() const noexcept { return mean_.size(); }

    bool factorizable() const noexcept { return factor_.has_value(); }
    /// Throws NotPositiveDefinite if the covariance is singular.
    const Matrix& factor() const;

    /// sum(log L_ii); throws like factor().
    double half_log_det() const;

private:
    Vector mean_;
    Matrix cov_;
    std::optional<Matrix> factor_;
    double half_log_det_ = 0.0;
};

/// Normalized log-density ln N(x; mean, cov).
double log_density(const GaussianParams& params, const Eigen::Ref<const Vector>& x);

/// Column-wise log-density of every sample in a D x K matrix.
Vector log_densities(const GaussianParams& params, const SampleMatrix& samples);

/// Draws `count` samples as a D x count matrix.
SampleMatrix draw(const GaussianParams& params, Rng& rng, Eigen::Index count);

/// Closed-form maximizer of sum_k w_k ln N(x_k; m, C) over (m, C):
/// the weighted mean and the 1/sum(w) weighted covariance.
///
/// Throws AllWeightsZero if no weight is positive, std::invalid_argument for
/// negative or non-finite weights.
GaussianParams weighted_moment_update(const SampleMatrix& samples, const Vector& weights);

/// Mean-only variant: the weighted mean is paired with `retained_cov`.
GaussianParams weighted_moment_update(const SampleMatrix& samples, const Vector& weights,
                                      const Matrix& retained_cov);

}  // namespace cepmc
