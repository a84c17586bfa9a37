#pragma once

#include <Eigen/Dense>

namespace cepmc {

/// Earth's gravitational parameter, m^3/s^2.
inline constexpr double kMuEarth = 3.986004418e14;

struct OrbitalState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();  // m
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // m/s
    double epoch = 0.0;                                   // s
};

/// Stumpff functions c2(z) = (1 - cos sqrt z)/z and c3(z) = (sqrt z - sin sqrt z)/z^1.5,
/// continued analytically for z <= 0.
double stumpff_c2(double z);
double stumpff_c3(double z);

/// Two-body propagation by `dt` seconds using the universal-variable
/// formulation. Elliptic transfers are first reduced modulo the period.
/// Throws NoConvergence if the universal Kepler equation does not converge
/// within 50 Newton/bisection steps, std::invalid_argument for a degenerate
/// state.
OrbitalState kepler_propagate(const OrbitalState& state, double dt, double mu = kMuEarth);

double specific_energy(const OrbitalState& state, double mu = kMuEarth);
Eigen::Vector3d angular_momentum(const OrbitalState& state);
/// Orbital period; infinity for unbound orbits.
double orbital_period(const OrbitalState& state, double mu = kMuEarth);

}  // namespace cepmc
