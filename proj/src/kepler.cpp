#include "cepmc/kepler.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cepmc/errors.hpp"

namespace cepmc {

namespace {

constexpr int kMaxIterations = 50;

}  // namespace

double stumpff_c2(double z) {
    if (std::abs(z) < 1.0) {
        // sum_k (-z)^k / (2k + 2)!
        double term = 0.5, sum = 0.5;
        for (int k = 1; k < 12; ++k) {
            term *= -z / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
            sum += term;
        }
        return sum;
    }
    if (z > 0.0) {
        const double s = std::sin(0.5 * std::sqrt(z));
        return 2.0 * s * s / z;
    }
    return (std::cosh(std::sqrt(-z)) - 1.0) / (-z);
}

double stumpff_c3(double z) {
    if (std::abs(z) < 1.0) {
        // sum_k (-z)^k / (2k + 3)!
        double term = 1.0 / 6.0, sum = term;
        for (int k = 1; k < 12; ++k) {
            term *= -z / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            sum += term;
        }
        return sum;
    }
    if (z > 0.0) {
        const double x = std::sqrt(z);
        return (x - std::sin(x)) / (z * x);
    }
    const double x = std::sqrt(-z);
    return (std::sinh(x) - x) / (-z * x);
}

double specific_energy(const OrbitalState& state, double mu) {
    return 0.5 * state.velocity.squaredNorm() - mu / state.position.norm();
}

Eigen::Vector3d angular_momentum(const OrbitalState& state) {
    return state.position.cross(state.velocity);
}

double orbital_period(const OrbitalState& state, double mu) {
    const double alpha = 2.0 / state.position.norm() - state.velocity.squaredNorm() / mu;
    if (!(alpha > 0.0)) return std::numeric_limits<double>::infinity();
    return 2.0 * std::numbers::pi / std::sqrt(mu * alpha * alpha * alpha);
}

OrbitalState kepler_propagate(const OrbitalState& state, double dt, double mu) {
    const Eigen::Vector3d& r0v = state.position;
    const Eigen::Vector3d& v0v = state.velocity;
    const double r0 = r0v.norm();
    if (!(r0 > 0.0) || !r0v.allFinite() || !v0v.allFinite() || !std::isfinite(dt) || !(mu > 0.0))
        throw std::invalid_argument("kepler_propagate: degenerate state");
    if (dt == 0.0) return state;

    const double sqrt_mu = std::sqrt(mu);
    const double alpha = 2.0 / r0 - v0v.squaredNorm() / mu;  // 1/a
    const double rdotv = r0v.dot(v0v);

    double tof = dt;
    if (alpha > 0.0) {
        tof = std::remainder(dt, orbital_period(state, mu));
        if (tof == 0.0) {
            OrbitalState out = state;
            out.epoch += dt;
            return out;
        }
    }

    // F(chi) = sqrt(mu) * (t(chi) - tof); F'(chi) = r(chi) > 0, so F is
    // increasing and a sign bracket always exists.
    auto residual = [&](double chi, double* radius) {
        const double z = alpha * chi * chi;
        const double c2 = stumpff_c2(z), c3 = stumpff_c3(z);
        const double chi2 = chi * chi;
        const double f = rdotv / sqrt_mu * chi2 * c2 + (1.0 - alpha * r0) * chi2 * chi * c3 + r0 * chi -
                         sqrt_mu * tof;
        *radius = chi2 * c2 + rdotv / sqrt_mu * chi * (1.0 - z * c3) + r0 * (1.0 - z * c2);
        return f;
    };

    double chi = alpha > 0.0 ? sqrt_mu * alpha * tof : std::copysign(std::sqrt(std::abs(tof) * sqrt_mu / r0) , tof) ;
    double lo = tof > 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    double hi = tof > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    const double scale = std::sqrt(r0);

    bool converged = false;
    double radius = r0;
    for (int it = 0; it < kMaxIterations; ++it) {
        const double f = residual(chi, &radius);
        if (f < 0.0) lo = std::max(lo, chi);
        if (f > 0.0) hi = std::min(hi, chi);
        double next = chi - f / radius;
        if (!(next > lo && next < hi)) {
            if (std::isfinite(lo) && std::isfinite(hi)) {
                next = 0.5 * (lo + hi);
            } else {
                // expand toward the open side of the bracket
                const double span = std::max(std::abs(chi), scale);
                next = std::isfinite(hi) ? chi - 2.0 * span : chi + 2.0 * span;
            }
        }
        const double step = std::abs(next - chi);
        chi = next;
        if (step <= 1e-15 * std::max(std::abs(chi), scale)) {
            converged = true;
            break;
        }
    }
    // Newton stalls at the rounding floor without meeting the tight step test;
    // accept anything within 1e-10 of the anomaly scale.
    if (!converged) {
        const double f = residual(chi, &radius);
        if (!(std::abs(f / radius) / scale <= 1e-10))
            throw NoConvergence("kepler_propagate: universal Kepler equation did not converge");
    }

    const double z = alpha * chi * chi;
    const double c2 = stumpff_c2(z), c3 = stumpff_c3(z);
    const double chi2 = chi * chi;
    const double f = 1.0 - chi2 / r0 * c2;
    const double g = tof - chi2 * chi * c3 / sqrt_mu;
    OrbitalState out;
    out.position = f * r0v + g * v0v;
    const double r = out.position.norm();
    const double fdot = sqrt_mu / (r * r0) * chi * (z * c3 - 1.0);
    const double gdot = 1.0 - chi2 / r * c2;
    out.velocity = fdot * r0v + gdot * v0v;
    out.epoch = state.epoch + dt;
    return out;
}

}  // namespace cepmc
