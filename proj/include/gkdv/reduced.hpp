#pragma once

#include "gkdv/ansatz.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gkdv {

// Constants entering the leading-order modulation flow.
struct ReducedConstants {
    double alpha = 0, a1 = 0, a2 = 0;

    static ReducedConstants from(const ProfileSet& profiles) { return {profiles.alpha, profiles.a1, profiles.a2}; }
};

struct ReducedState {
    double t = 0;
    ModParams gamma;
};

// mu1' = -alpha e^{-z}, mu2' = alpha e^{-z}, z1' = mu1 + a1 e^{-z}, z2' = mu2 - a2 e^{-z}.
ModRates reduced_vector_field(const ModParams& gamma, const ReducedConstants& constants);

struct LogLaw {
    double z = 0, mu = 0;
};

// z = 2 log(sqrt(alpha) t), mu = 2 / t; exact for a1 = a2 = 0.
LogLaw log_law_exact(double t, double alpha);
// The symmetric state (mubar = zbar = 0) on the exact law.
ModParams log_law_state(double t, double alpha);

// mu^2 - 4 alpha e^{-z}; conserved when a1 = a2 = 0.
double first_integral(const ModParams& gamma, double alpha);

struct IntegratorTolerance {
    double absolute = 1e-15;
    double relative = 1e-13;
};

class CollisionError : public std::runtime_error {
public:
    CollisionError(double time, double separation);
    double time;
    double separation;
};

// Adaptive Bulirsch-Stoer (extrapolated modified midpoint) with dense output. `output_times` must be monotone (either
// direction) and start at or after/before start.t in the direction of travel. Throws
// CollisionError when z reaches 0 before the last output time.
std::vector<ReducedState> integrate_reduced(const ReducedState& start, std::span<const double> output_times,
                                            const ReducedConstants& constants,
                                            const IntegratorTolerance& tolerance = {});

// Evenly spaced times from `from` to `to` inclusive, with spacing at most `spacing`.
std::vector<double> time_grid(double from, double to, double spacing);

// zeta = e^{z/2} / sqrt(alpha), xi = (zeta - t)^2 t^{-15/8}.
double zeta_of(double z, double alpha);
double xi_of(double t, double zeta);

// Bootstrap tube. boot3 bounds the remainder and only applies when a norm is supplied.
struct TubeCheck {
    bool boot1 = true;  // |mubar| <= t^{-9/8}
    bool boot2 = true;  // |zbar| <= t^{-1/16}
    bool boot3 = true;  // |eps|_{H^1} <= t^{-9/8}
    bool boot4 = true;  // |zeta - t| <= t^{15/16}
    bool boot5 = true;  // t^{-1}/2 <= mu <= 2 t^{-1}
    // +1 when zeta - t > 0, else -1. For a boot5-only exit: +1 when mu is too small.
    int side = 0;

    bool inside() const { return boot1 && boot2 && boot3 && boot4 && boot5; }
    std::string flags() const;  // five 0/1 characters in boot order
};

// `slack` is a relative allowance on each bound; the mu band touches the exact law.
TubeCheck check_tube(double t, const ModParams& gamma, double alpha, std::optional<double> eps_h1 = std::nullopt,
                     double slack = 1e-9);

struct ShootingConfig {
    double t_in = 1000;
    double t0 = 20;
    double window_exponent = 15.0 / 16.0;
    double output_spacing = 0.25;      // tube checks happen at this resolution
    double bisection_tolerance = 1e-10; // relative to the window width
    double slack = 1e-9;
    IntegratorTolerance tolerance;

    void validate() const;  // t_in >= 10 t0, t0 >= 10
};

// One backward run from t_in with a given zeta_sharp in [-1, 1].
struct TubeRun {
    double zeta_sharp = 0;
    double zeta_in = 0;
    bool survived = false;
    double exit_time = 0;  // t* (t0 when survived)
    int side = 0;          // Phi(zeta_sharp); 0 when survived
    std::string exit_flags;
    double xi_dot_at_exit = 0;  // NaN unless the exit is through boot4
    bool transversal = true;    // xi_dot(t*) < -1/t* for boot4 exits
    std::vector<ReducedState> trajectory;
};

// Symmetric data mu1 = -mu2 = sqrt(alpha) e^{-z/2}, z1 = -z2 = z/2 with e^{z/2} = sqrt(alpha) zeta_in.
ModParams shooting_data(double zeta_in, double alpha);
TubeRun run_tube(const ShootingConfig& config, const ReducedConstants& constants, double zeta_sharp);

struct ShootingResult {
    double zeta_in = 0;
    double zeta_sharp = 0;
    double window_low = 0, window_high = 0;
    bool found = false;
    int bisection_steps = 0;
    std::vector<TubeRun> exit_map;  // every evaluation, trajectories dropped
    TubeRun accepted;               // the final run, with trajectory
};

// Bisection on zeta_sharp. Throws std::runtime_error if Phi(-1) and Phi(1) agree.
ShootingResult shoot_zeta(const ShootingConfig& config, const ReducedConstants& constants);

// Model for the unstable/stable projections:
//   a+' = e0 a+ + forcing,  a-' = -e0 a- + forcing,  |forcing| = C t^{-9/4}.
struct DichotomyConfig {
    double e0 = 1;
    double forcing_constant = 1;
    double t_in = 1000;
    double t0 = 20;
    double output_spacing = 0.25;
    // The a- shooting amplifies errors by e^{e0 (t_in - t0)}; its start time is capped at
    // t0 + minus_horizon / e0 so double precision can resolve the surviving data.
    double minus_horizon = 30;
    double forcing_frequency = 0.5;  // direction of the a- forcing rotates at this rate
    int boundary_directions = 16;
    IntegratorTolerance tolerance{1e-20, 1e-10};  // a+- live at t^{-3/2} and below

    void validate() const;  // throws std::domain_error if e0 t0 < 6
};

struct DichotomySample {
    double t = 0;
    Eigen::Vector2d a_plus = Eigen::Vector2d::Zero();
    double bound = 0;  // t^{-9/4} / e0
};

struct DichotomyResult {
    // a+ with a+(t_in) = 0 and forcing chosen to grow |a+| along the backward run.
    std::vector<DichotomySample> plus;
    double plus_worst_ratio = 0;  // max |a+| / (t^{-9/4}/e0)
    double plus_vs_tube = 0;      // max |a+| / (t^{-3/2}/2)
    // a- shooting over a_in = a_sharp t_in^{-3/2}, |a_sharp| <= 1.
    double minus_t_in = 0;
    Eigen::Vector2d minus_a_sharp = Eigen::Vector2d::Zero();
    bool minus_survived = false;
    int minus_iterations = 0;
    double minus_max_n = 0;  // max N(t) = t^3 |a-|^2 over [t0, minus_t_in]
    // N' at t_in for |a_sharp| = 1 with the forcing aligned against the boundary.
    double boundary_n_dot_max = 0;
    // max over boundary directions of N' - (-3/2 e0 N + C t^{-3/4} sqrt N)
    double boundary_lyapunov_gap = 0;
};

DichotomyResult supercritical_dichotomy(const DichotomyConfig& config);

}  // namespace gkdv
