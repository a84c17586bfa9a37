#include "cepmc/problems.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cepmc/errors.hpp"

namespace cepmc {

Vector RareEventProblem::performances(const SampleMatrix& samples) const {
    Vector out(samples.cols());
    for (Eigen::Index k = 0; k < samples.cols(); ++k) out(k) = performance(samples.col(k));
    return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double limit_state_s1(const Eigen::Ref<const Vector>& x, LimitStateForm form) {
    const double u = x(0) - 0.1;
    return 5.0 - x(1) - 0.5 * (form == LimitStateForm::Squared ? u * u : u);
}

double limit_state_s2(const Eigen::Ref<const Vector>& x, LimitStateForm form) {
    return 5.0 - x(1) - 0.1 * (form == LimitStateForm::Squared ? x(0) * x(0) : x(0));
}

double limit_state_s3(const Eigen::Ref<const Vector>& x) {
    const double sum = (x(0) + x(1)) / std::numbers::sqrt2;
    const double diff = x(0) - x(1);
    const double base = 3.0 + diff * diff / 10.0;
    const double offset = 7.0 / std::numbers::sqrt2;
    return std::min({base + sum, base - sum, diff + offset, -diff + offset});
}

namespace {

GaussianParams standard_normal(int dim) { return GaussianParams::isotropic(Vector::Zero(dim), 1.0); }

const char* form_name(LimitStateForm form) { return form == LimitStateForm::Squared ? "squared" : "linear"; }

}  // namespace

RareEventProblem make_s1(LimitStateForm form) {
    return {"s1", std::string("S1 parabolic limit state (") + form_name(form) + ")", standard_normal(2),
            [form](const Eigen::Ref<const Vector>& x) { return -limit_state_s1(x, form); },
            0.0, std::nullopt, kReferenceS1};
}

RareEventProblem make_s2(LimitStateForm form) {
    return {"s2", std::string("S2 limit state (") + form_name(form) + ")", standard_normal(2),
            [form](const Eigen::Ref<const Vector>& x) { return -limit_state_s2(x, form); },
            0.0, std::nullopt, kReferenceS2};
}

RareEventProblem make_s3() {
    return {"s3", "S3 four-branch series system", standard_normal(2),
            [](const Eigen::Ref<const Vector>& x) { return -limit_state_s3(x); },
            0.0, std::nullopt, kReferenceS3};
}

RareEventProblem make_s4(double beta, int dim) {
    if (dim < 1) throw std::invalid_argument("make_s4: dim must be at least 1");
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
    std::ostringstream desc;
    desc << "S4 linear limit state, beta = " << beta << ", D = " << dim;
    return {"s4", desc.str(), standard_normal(dim),
            [inv_sqrt_d](const Eigen::Ref<const Vector>& x) { return x.sum() * inv_sqrt_d; },
            beta, normal_cdf(-beta), std::nullopt};
}

void ConjunctionScenario::validate() const {
    auto finite = [](const OrbitalState& s) {
        return s.position.allFinite() && s.velocity.allFinite() && s.position.norm() > 0.0;
    };
    if (!finite(rogue_mean) || !finite(assets[0]) || !finite(assets[1]))
        throw std::invalid_argument("ConjunctionScenario: degenerate orbital state");
    if (!(rogue_pos_sigma > 0.0) || !(rogue_vel_sigma > 0.0) || !(miss_threshold > 0.0) || !(mu_grav > 0.0))
        throw std::invalid_argument("ConjunctionScenario: sigmas, threshold and mu must be positive");
    const Eigen::Vector3d h0 = angular_momentum(assets[0]);
    const Eigen::Vector3d h1 = angular_momentum(assets[1]);
    if (h0.cross(h1).norm() > 1e-9 * h0.norm() * h1.norm())
        throw std::invalid_argument("ConjunctionScenario: assets are not coplanar");
}

ConjunctionScenario default_conjunction_scenario(double miss_offset, double radius, double separation,
                                                 double crossing_angle) {
    ConjunctionScenario sc;
    const double mu = sc.mu_grav;
    const double speed = std::sqrt(mu / radius);
    const double lag = separation / radius;
    sc.assets[0].position = {radius, 0.0, 0.0};
    sc.assets[0].velocity = {0.0, speed, 0.0};
    sc.assets[1].position = radius * Eigen::Vector3d(std::cos(lag), -std::sin(lag), 0.0);
    sc.assets[1].velocity = speed * Eigen::Vector3d(std::sin(lag), std::cos(lag), 0.0);

    // Rogue state at t1: offset radially from asset 1, moving on a circular
    // orbit tilted about the radial direction, then propagated back to t0.
    const OrbitalState a1 = kepler_propagate(sc.assets[0], sc.horizon, mu);
    const Eigen::Vector3d radial = a1.position.normalized();
    const Eigen::AngleAxisd tilt(crossing_angle, radial);
    OrbitalState rogue_t1;
    rogue_t1.position = a1.position + miss_offset * radial;
    rogue_t1.velocity = std::sqrt(mu / rogue_t1.position.norm()) * (tilt * a1.velocity.normalized());
    rogue_t1.epoch = sc.horizon;
    sc.rogue_mean = kepler_propagate(rogue_t1, -sc.horizon, mu);
    sc.rogue_mean.epoch = 0.0;
    return sc;
}

Eigen::Vector3d rogue_position_at_horizon(const ConjunctionScenario& scenario,
                                          const Eigen::Ref<const Vector>& perturbation) {
    OrbitalState s = scenario.rogue_mean;
    s.position += perturbation.head<3>();
    s.velocity += perturbation.tail<3>();
    return kepler_propagate(s, scenario.horizon, scenario.mu_grav).position;
}

RareEventProblem make_conjunction(const ConjunctionScenario& scenario) {
    scenario.validate();
    const std::array<Eigen::Vector3d, 2> targets{
        kepler_propagate(scenario.assets[0], scenario.horizon, scenario.mu_grav).position,
        kepler_propagate(scenario.assets[1], scenario.horizon, scenario.mu_grav).position};
    Vector var(6);
    var << Eigen::Vector3d::Constant(scenario.rogue_pos_sigma * scenario.rogue_pos_sigma),
        Eigen::Vector3d::Constant(scenario.rogue_vel_sigma * scenario.rogue_vel_sigma);
    RareEventProblem p{"conjunction", "rogue object within miss threshold of either asset at t1",
                       GaussianParams(Vector::Zero(6), var.asDiagonal()),
                       [scenario, targets](const Eigen::Ref<const Vector>& x) {
                           const Eigen::Vector3d r = rogue_position_at_horizon(scenario, x);
                           return -std::min((r - targets[0]).norm(), (r - targets[1]).norm());
                       },
                       -scenario.miss_threshold, std::nullopt, std::nullopt};
    return p;
}

std::vector<std::string> problem_ids() { return {"s1", "s2", "s3", "s4", "conjunction"}; }

RareEventProblem make_problem(const std::string& id, const ProblemParams& params) {
    if (id == "s1") return make_s1(params.form);
    if (id == "s2") return make_s2(params.form);
    if (id == "s3") return make_s3();
    if (id == "s4") return make_s4(params.beta, params.dim);
    if (id == "conjunction") return make_conjunction(params.scenario);
    throw ConfigError("unknown problem id '" + id + "'");
}

}  // namespace cepmc
