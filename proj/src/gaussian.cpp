#include "cepmc/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cepmc/errors.hpp"

namespace cepmc {

namespace {

constexpr double kPivotGuard = 1e-12;
constexpr double kSymmetryTol = 1e-10;

Matrix symmetrized(const Matrix& c) { return 0.5 * (c + c.transpose()); }

// Returns the factor, or nullopt with a reason in `why`.
std::optional<Matrix> try_factorize(const Matrix& cov, std::string* why) {
    const Eigen::Index d = cov.rows();
    if (!cov.allFinite()) {
        if (why) *why = "covariance has non-finite entries";
        return std::nullopt;
    }
    const double max_diag = d > 0 ? cov.diagonal().maxCoeff() : 0.0;
    if (d > 0 && !(max_diag > 0.0)) {
        if (why) *why = "covariance has no positive diagonal entry";
        return std::nullopt;
    }
    Matrix l = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double pivot = cov(j, j) - l.row(j).head(j).squaredNorm();
        if (!(pivot > kPivotGuard * max_diag)) {
            if (why) *why = "pivot " + std::to_string(j) + " = " + std::to_string(pivot) +
                            " below guard";
            return std::nullopt;
        }
        const double ljj = std::sqrt(pivot);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < d; ++i) {
            l(i, j) = (cov(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
        }
    }
    return l;
}

void check_weights(const Vector& weights) {
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw std::invalid_argument("weights must be finite and nonnegative");
    }
}

}  // namespace

Matrix factorize(const Matrix& cov) {
    if (cov.rows() != cov.cols()) throw std::invalid_argument("factorize: matrix is not square");
    const double scale = cov.cwiseAbs().maxCoeff();
    if (cov.size() > 0 && (cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
        throw std::invalid_argument("factorize: matrix is not symmetric");
    std::string why;
    auto l = try_factorize(cov, &why);
    if (!l) throw NotPositiveDefinite("factorize: " + why);
    return *l;
}

GaussianParams::GaussianParams(Vector mean, Matrix cov)
    : mean_(std::move(mean)), cov_(symmetrized(cov)) {
    if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size())
        throw std::invalid_argument("GaussianParams: mean/cov dimension mismatch");
    factor_ = try_factorize(cov_, nullptr);
    if (factor_) half_log_det_ = factor_->diagonal().array().log().sum();
}

GaussianParams GaussianParams::isotropic(Vector mean, double sigma) {
    const auto d = mean.size();
    return GaussianParams(std::move(mean), sigma * sigma * Matrix::Identity(d, d));
}

const Matrix& GaussianParams::factor() const {
    if (!factor_) throw NotPositiveDefinite("covariance is singular or indefinite");
    return *factor_;
}

double GaussianParams::half_log_det() const {
    factor();
    return half_log_det_;
}

double log_density(const GaussianParams& params, const Eigen::Ref<const Vector>& x) {
    if (x.size() != params.dim()) throw std::invalid_argument("log_density: dimension mismatch");
    const Matrix& l = params.factor();
    const Vector z = l.triangularView<Eigen::Lower>().solve(x - params.mean());
    const double d = static_cast<double>(params.dim());
    return -0.5 * d * std::log(2.0 * std::numbers::pi) - params.half_log_det() - 0.5 * z.squaredNorm();
}

Vector log_densities(const GaussianParams& params, const SampleMatrix& samples) {
    if (samples.rows() != params.dim()) throw std::invalid_argument("log_density: dimension mismatch");
    const Matrix& l = params.factor();
    Matrix z = samples.colwise() - params.mean();
    l.triangularView<Eigen::Lower>().solveInPlace(z);
    const double d = static_cast<double>(params.dim());
    const double norm = -0.5 * d * std::log(2.0 * std::numbers::pi) - params.half_log_det();
    return (norm - 0.5 * z.colwise().squaredNorm().array()).matrix().transpose();
}

SampleMatrix draw(const GaussianParams& params, Rng& rng, Eigen::Index count) {
    if (count < 1) throw std::invalid_argument("draw: count must be positive");
    const Matrix& l = params.factor();
    SampleMatrix z(params.dim(), count);
    for (Eigen::Index k = 0; k < count; ++k)
        for (Eigen::Index i = 0; i < params.dim(); ++i) z(i, k) = rng.normal();
    SampleMatrix x = l.triangularView<Eigen::Lower>() * z;
    x.colwise() += params.mean();
    return x;
}

namespace {

Vector weighted_mean(const SampleMatrix& samples, const Vector& weights, double* total) {
    if (samples.cols() != weights.size())
        throw std::invalid_argument("weighted_moment_update: sample/weight count mismatch");
    check_weights(weights);
    const double sum = weights.sum();
    if (!(sum > 0.0)) throw AllWeightsZero("weighted_moment_update: no positive weight");
    *total = sum;
    return samples * weights / sum;
}

}  // namespace

GaussianParams weighted_moment_update(const SampleMatrix& samples, const Vector& weights) {
    double total = 0.0;
    Vector mean = weighted_mean(samples, weights, &total);
    const Matrix centered = samples.colwise() - mean;
    Matrix cov = centered * (weights / total).asDiagonal() * centered.transpose();
    return GaussianParams(std::move(mean), cov);
}

GaussianParams weighted_moment_update(const SampleMatrix& samples, const Vector& weights,
                                      const Matrix& retained_cov) {
    double total = 0.0;
    Vector mean = weighted_mean(samples, weights, &total);
    return GaussianParams(std::move(mean), retained_cov);
}

}  // namespace cepmc
