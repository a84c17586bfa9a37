#pragma once

#include <array>
#include <string>
#include <vector>

#include "cepmc/kepler.hpp"
#include "cepmc/problem.hpp"

namespace cepmc {

/// Literature reference probabilities for the structural problems.
inline constexpr double kReferenceS1 = 3.01e-3;
inline constexpr double kReferenceS2 = 8.67e-7;
inline constexpr double kReferenceS3 = 2.22e-3;

/// Functional form of the S1/S2 limit states. `Squared` uses
/// 0.5 (x1 - 0.1)^2 and 0.1 x1^2; `Linear` uses the same terms without the
/// square. Only the squared forms are consistent with the reference values.
enum class LimitStateForm { Squared, Linear };

/// Phi(z) via erfc.
double normal_cdf(double z);

/// S1(x) = 5 - x2 - 0.5 (x1 - 0.1)^k, k = 2 (Squared) or 1 (Linear).
double limit_state_s1(const Eigen::Ref<const Vector>& x, LimitStateForm form);
/// S2(x) = 5 - x2 - 0.1 x1^k.
double limit_state_s2(const Eigen::Ref<const Vector>& x, LimitStateForm form);
/// Four-branch series system.
double limit_state_s3(const Eigen::Ref<const Vector>& x);

/// Structural problems: x ~ N(0, I_2), failure {S_i <= 0}, stored as
/// performance -S_i with gamma = 0.
RareEventProblem make_s1(LimitStateForm form = LimitStateForm::Squared);
RareEventProblem make_s2(LimitStateForm form = LimitStateForm::Squared);
RareEventProblem make_s3();

/// Linear limit state in `dim` dimensions: event {sum x_i / sqrt(D) >= beta},
/// probability Phi(-beta) for every D.
RareEventProblem make_s4(double beta, int dim);

struct ConjunctionScenario {
    OrbitalState rogue_mean;          // at t0
    double rogue_pos_sigma = 5.0;     // m
    double rogue_vel_sigma = 0.1;     // m/s
    std::array<OrbitalState, 2> assets;
    double horizon = 9893.34;         // t1 - t0, s
    double miss_threshold = 50.0;     // m
    double mu_grav = kMuEarth;

    /// Throws std::invalid_argument when the assets are not coplanar or the
    /// states are degenerate.
    void validate() const;
};

/// Circular orbit of radius `radius`; the assets lead/trail each other by
/// `separation` metres of arc. The rogue is on an orbit inclined by
/// `crossing_angle` radians relative to the assets, constructed backwards
/// from t1 so that its unperturbed position is `miss_offset` metres (radially)
/// from asset 1 at t1.
ConjunctionScenario default_conjunction_scenario(double miss_offset = 40.0, double radius = 7.0e6,
                                                 double separation = 10000.0,
                                                 double crossing_angle = 0.5);

/// Rogue position at t1 for a 6-D perturbation (dr, dv) of rogue_mean.
Eigen::Vector3d rogue_position_at_horizon(const ConjunctionScenario& scenario,
                                          const Eigen::Ref<const Vector>& perturbation);

/// Problem over the 6-D rogue perturbation at t0 with base density
/// N(0, diag(pos_sigma^2 x3, vel_sigma^2 x3)); performance is the negated
/// miss distance min_i |r(t1) - a_i(t1)| and gamma = -miss_threshold.
RareEventProblem make_conjunction(const ConjunctionScenario& scenario);

/// Ids accepted by make_problem().
std::vector<std::string> problem_ids();

struct ProblemParams {
    LimitStateForm form = LimitStateForm::Squared;
    double beta = 5.0;
    int dim = 2;
    ConjunctionScenario scenario = default_conjunction_scenario();
};

/// Registry lookup: s1, s2, s3, s4, conjunction. Throws ConfigError on an
/// unknown id.
RareEventProblem make_problem(const std::string& id, const ProblemParams& params);

}  // namespace cepmc
