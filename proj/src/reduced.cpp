#include "gkdv/reduced.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <limits>

namespace gkdv {

namespace odeint = boost::numeric::odeint;

namespace {

// Largest gap between consecutive output times; dense steppers may overshoot the last output
// by one step, so this also caps the step to keep the overshoot inside the model's domain.
// Signed with the direction of travel, as odeint expects.
double max_gap(double t_start, std::span<const double> times)
{
    if (times.empty()) return 0;
    double gap = std::abs(times.front() - t_start);
    for (std::size_t i = 1; i < times.size(); ++i) gap = std::max(gap, std::abs(times[i] - times[i - 1]));
    return times.back() >= t_start ? gap : -gap;
}

// Drives a dense-output stepper through `times` (monotone, any direction), calling
// visit(t, state) at each; visit returns false to stop early.
// `guard(t, state)` runs after every accepted step and may throw.
template <class Stepper, class State, class System, class Visit, class Guard>
void integrate_dense(Stepper stepper, System&& system, State x, double t_start, std::span<const double> times,
                     Visit&& visit, Guard&& guard)
{
    if (times.empty()) return;
    const double direction = times.back() >= t_start ? 1.0 : -1.0;
    const double span = std::abs(times.back() - t_start);
    std::size_t next = 0;
    while (next < times.size() && times[next] == t_start) {
        if (!visit(times[next], x)) return;
        ++next;
    }
    if (next == times.size()) return;

    stepper.initialize(x, t_start, direction * std::min(1e-3, 1e-4 * span));
    State sample;
    constexpr long max_steps = 50'000'000;
    for (long steps = 0; next < times.size(); ++steps) {
        if (steps > max_steps) throw std::runtime_error("integrator step budget exhausted");
        stepper.do_step(system);
        guard(stepper.current_time(), stepper.current_state());
        while (next < times.size() && direction * (times[next] - stepper.current_time()) <= 0) {
            stepper.calc_state(times[next], sample);
            if (!visit(times[next], sample)) return;
            ++next;
        }
    }
}

template <class Stepper, class State, class System, class Visit>
void integrate_dense(Stepper stepper, System&& system, State x, double t_start, std::span<const double> times,
                     Visit&& visit)
{
    integrate_dense(stepper, system, x, t_start, times, visit, [](double, const State&) {});
}

using Quad = std::array<double, 4>;  // mu1, mu2, z1, z2
using Pair = std::array<double, 2>;

// Extrapolation keeps the log-law runs at 1e-9 over 1e4 time units; it cannot start from an
// identically zero state, so the linear a+- models use Dormand-Prince.
auto flow_stepper(const IntegratorTolerance& tol, double max_dt)
{
    return odeint::bulirsch_stoer_dense_out<Quad>(tol.absolute, tol.relative, 1.0, 1.0, max_dt);
}

auto linear_stepper(const IntegratorTolerance& tol, double max_dt)
{
    return odeint::make_dense_output(tol.absolute, tol.relative, max_dt, odeint::runge_kutta_dopri5<Pair>());
}

Quad pack(const ModParams& g) { return {g.mu1, g.mu2, g.z1, g.z2}; }
ModParams unpack(const Quad& x) { return {x[0], x[1], x[2], x[3]}; }

void collision_guard(double t, const Quad& x)
{
    const double z = x[2] - x[3];
    if (!(z > 0)) throw CollisionError(t, z);
}

double sign_of(double v) { return v >= 0 ? 1.0 : -1.0; }

}  // namespace

ModRates reduced_vector_field(const ModParams& g, const ReducedConstants& c)
{
    const double ez = std::exp(-g.z());
    return {-c.alpha * ez, c.alpha * ez, g.mu1 + c.a1 * ez, g.mu2 - c.a2 * ez};
}

LogLaw log_law_exact(double t, double alpha)
{
    return {2 * std::log(std::sqrt(alpha) * t), 2 / t};
}

ModParams log_law_state(double t, double alpha)
{
    const LogLaw law = log_law_exact(t, alpha);
    return {law.mu / 2, -law.mu / 2, law.z / 2, -law.z / 2};
}

double first_integral(const ModParams& g, double alpha)
{
    return g.mu() * g.mu() - 4 * alpha * std::exp(-g.z());
}

CollisionError::CollisionError(double t, double z)
    : std::runtime_error("separation reached " + std::to_string(z) + " at t = " + std::to_string(t)),
      time(t), separation(z)
{
}

std::vector<ReducedState> integrate_reduced(const ReducedState& start, std::span<const double> output_times,
                                            const ReducedConstants& constants,
                                            const IntegratorTolerance& tolerance)
{
    if (start.gamma.z() <= 0) throw std::invalid_argument("integrate_reduced: z must be positive");
    auto system = [&](const Quad& x, Quad& dxdt, double) {
        const ModRates r = reduced_vector_field(unpack(x), constants);
        dxdt = {r.mu1, r.mu2, r.z1, r.z2};
    };
    std::vector<ReducedState> series;
    series.reserve(output_times.size());
    integrate_dense(flow_stepper(tolerance, max_gap(start.t, output_times)), system, pack(start.gamma), start.t, output_times, [&](double t, const Quad& x) {
        series.push_back({t, unpack(x)});
        return true;
    }, collision_guard);
    return series;
}

std::vector<double> time_grid(double from, double to, double spacing)
{
    if (!(spacing > 0)) throw std::invalid_argument("time_grid: spacing must be positive");
    const auto intervals = static_cast<std::size_t>(std::ceil(std::abs(to - from) / spacing - 1e-12));
    std::vector<double> times(std::max<std::size_t>(intervals, 1) + 1);
    for (std::size_t i = 0; i < times.size(); ++i)
        times[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(times.size() - 1);
    times.back() = to;
    return times;
}

double zeta_of(double z, double alpha) { return std::exp(z / 2) / std::sqrt(alpha); }

double xi_of(double t, double zeta) { return (zeta - t) * (zeta - t) * std::pow(t, -15.0 / 8.0); }

std::string TubeCheck::flags() const
{
    std::string s;
    for (bool b : {boot1, boot2, boot3, boot4, boot5}) s += b ? '1' : '0';
    return s;
}

TubeCheck check_tube(double t, const ModParams& g, double alpha, std::optional<double> eps_h1, double slack)
{
    const double allow = 1 + slack;
    TubeCheck check;
    check.boot1 = std::abs(g.mubar()) <= std::pow(t, -9.0 / 8.0) * allow;
    check.boot2 = std::abs(g.zbar()) <= std::pow(t, -1.0 / 16.0) * allow;
    if (eps_h1) check.boot3 = *eps_h1 <= std::pow(t, -9.0 / 8.0) * allow;
    const double zeta = zeta_of(g.z(), alpha);
    check.boot4 = std::abs(zeta - t) <= std::pow(t, 15.0 / 16.0) * allow;
    const double mu = g.mu();
    const bool too_small = mu < 0.5 / t / allow;
    const bool too_large = mu > 2.0 / t * allow;
    check.boot5 = !too_small && !too_large;
    if (check.boot4 && !check.boot5)
        check.side = too_small ? 1 : -1;
    else
        check.side = static_cast<int>(sign_of(zeta - t));
    return check;
}

void ShootingConfig::validate() const
{
    if (!(t0 >= 10)) throw std::invalid_argument("shooting: t0 must be at least 10");
    if (!(t_in >= 10 * t0)) throw std::invalid_argument("shooting: t_in must be at least 10 t0");
    if (!(output_spacing > 0) || !(bisection_tolerance > 0))
        throw std::invalid_argument("shooting: spacing and tolerance must be positive");
}

ModParams shooting_data(double zeta_in, double alpha)
{
    const double z = 2 * std::log(std::sqrt(alpha) * zeta_in);
    const double mu_half = std::sqrt(alpha) * std::exp(-z / 2);
    return {mu_half, -mu_half, z / 2, -z / 2};
}

TubeRun run_tube(const ShootingConfig& config, const ReducedConstants& constants, double zeta_sharp)
{
    TubeRun run;
    run.zeta_sharp = zeta_sharp;
    run.zeta_in = config.t_in + std::pow(config.t_in, config.window_exponent) * zeta_sharp;
    run.survived = true;
    run.exit_time = config.t0;
    run.xi_dot_at_exit = std::numeric_limits<double>::quiet_NaN();

    const std::vector<double> times = time_grid(config.t_in, config.t0, config.output_spacing);
    const ReducedState start{config.t_in, shooting_data(run.zeta_in, constants.alpha)};
    auto system = [&](const Quad& x, Quad& dxdt, double) {
        const ModRates r = reduced_vector_field(unpack(x), constants);
        dxdt = {r.mu1, r.mu2, r.z1, r.z2};
    };
    integrate_dense(flow_stepper(config.tolerance, max_gap(start.t, times)), system, pack(start.gamma), start.t, times, [&](double t, const Quad& x) {
        const ModParams g = unpack(x);
        run.trajectory.push_back({t, g});
        const TubeCheck check = check_tube(t, g, constants.alpha, std::nullopt, config.slack);
        if (check.inside()) return true;
        run.survived = false;
        run.exit_time = t;
        run.side = check.side;
        run.exit_flags = check.flags();
        if (!check.boot4) {
            const double zeta = zeta_of(g.z(), constants.alpha);
            const ModRates r = reduced_vector_field(g, constants);
            const double zeta_dot = 0.5 * zeta * (r.z1 - r.z2);
            const double gap = zeta - t;
            run.xi_dot_at_exit = 2 * gap * (zeta_dot - 1) * std::pow(t, -15.0 / 8.0) -
                                 15.0 / 8.0 * gap * gap * std::pow(t, -23.0 / 8.0);
            run.transversal = run.xi_dot_at_exit < -1 / t;
        }
        return false;
    }, collision_guard);
    return run;
}

ShootingResult shoot_zeta(const ShootingConfig& config, const ReducedConstants& constants)
{
    config.validate();
    ShootingResult result;
    const double half_window = std::pow(config.t_in, config.window_exponent);
    result.window_low = config.t_in - half_window;
    result.window_high = config.t_in + half_window;

    auto evaluate = [&](double sharp) {
        TubeRun run = run_tube(config, constants, sharp);
        TubeRun summary = run;
        summary.trajectory.clear();
        result.exit_map.push_back(std::move(summary));
        return run;
    };
    auto accept = [&](TubeRun run) {
        result.found = run.survived;
        result.zeta_sharp = run.zeta_sharp;
        result.zeta_in = run.zeta_in;
        result.accepted = std::move(run);
        return result;
    };

    TubeRun low = evaluate(-1), high = evaluate(1);
    if (low.survived) return accept(std::move(low));
    if (high.survived) return accept(std::move(high));
    if (low.side == high.side)
        throw std::runtime_error("shoot_zeta: exit side does not change sign across the window");

    double lo = -1, hi = 1;
    const int lo_side = low.side;
    TubeRun mid_run;
    while (true) {
        const double mid = 0.5 * (lo + hi);
        mid_run = evaluate(mid);
        ++result.bisection_steps;
        if (mid_run.survived || 0.5 * (hi - lo) < config.bisection_tolerance) break;
        (mid_run.side == lo_side ? lo : hi) = mid;
    }
    return accept(std::move(mid_run));
}

void DichotomyConfig::validate() const
{
    if (!(e0 > 0)) throw std::invalid_argument("dichotomy: e0 must be positive");
    if (!(t_in > t0) || !(t0 > 0)) throw std::invalid_argument("dichotomy: need t_in > t0 > 0");
    if (e0 * t0 < 6) throw std::domain_error("dichotomy: e0 t0 < 6 violates 3/t0 < e0/2");
    if (!(minus_horizon > 0) || !(output_spacing > 0) || boundary_directions < 1)
        throw std::invalid_argument("dichotomy: bad horizon, spacing or direction count");
}

DichotomyResult supercritical_dichotomy(const DichotomyConfig& config)
{
    config.validate();
    DichotomyResult result;
    const double e0 = config.e0, C = config.forcing_constant;
    auto beta = [C](double t) { return C * std::pow(t, -9.0 / 4.0); };

    // a+: the forcing pushes |a+| outward while integrating backward.
    {
        auto system = [&](const Pair& a, Pair& dadt, double t) {
            const double norm = std::hypot(a[0], a[1]);
            const Pair unit = norm > 0 ? Pair{a[0] / norm, a[1] / norm} : Pair{1, 0};
            dadt = {e0 * a[0] - beta(t) * unit[0], e0 * a[1] - beta(t) * unit[1]};
        };
        const std::vector<double> times = time_grid(config.t_in, config.t0, config.output_spacing);
        integrate_dense(linear_stepper(config.tolerance, max_gap(config.t_in, times)), system, Pair{0, 0}, config.t_in, times, [&](double t, const Pair& a) {
            DichotomySample s{t, {a[0], a[1]}, std::pow(t, -9.0 / 4.0) / e0};
            result.plus_worst_ratio = std::max(result.plus_worst_ratio, s.a_plus.norm() / s.bound);
            result.plus_vs_tube = std::max(result.plus_vs_tube, s.a_plus.norm() / (0.5 * std::pow(t, -1.5)));
            result.plus.push_back(s);
            return true;
        });
    }

    // a-: prescribed rotating forcing; solve a-(t0) = 0 by Newton on a_in, then check the tube.
    {
        const double t_start = std::min(config.t_in, config.t0 + config.minus_horizon / e0);
        result.minus_t_in = t_start;
        const double omega = config.forcing_frequency;
        auto system = [&](const Pair& a, Pair& dadt, double t) {
            const double b = beta(t);
            dadt = {-e0 * a[0] + b * std::cos(omega * t), -e0 * a[1] + b * std::sin(omega * t)};
        };
        const double scale = std::pow(t_start, -1.5);
        const std::array<double, 2> ends{t_start, config.t0};
        auto endpoint = [&](const Eigen::Vector2d& sharp) {
            Eigen::Vector2d out;
            integrate_dense(linear_stepper(config.tolerance, -config.output_spacing), system,
                            Pair{sharp[0] * scale, sharp[1] * scale}, t_start, std::span<const double>(ends).subspan(1), [&](double, const Pair& a) {
                                out = {a[0], a[1]};
                                return true;
                            });
            return out;
        };
        Eigen::Vector2d sharp = Eigen::Vector2d::Zero();
        for (int it = 0; it < 4; ++it) {
            const Eigen::Vector2d base = endpoint(sharp);
            Eigen::Matrix2d jac;
            for (int k = 0; k < 2; ++k) {
                Eigen::Vector2d probe = sharp;
                probe[k] += 1e-3;
                jac.col(k) = (endpoint(probe) - base) / 1e-3;
            }
            sharp -= jac.fullPivLu().solve(base);
            ++result.minus_iterations;
        }
        result.minus_a_sharp = sharp;

        result.minus_survived = sharp.norm() <= 1;
        const std::vector<double> times = time_grid(t_start, config.t0, config.output_spacing);
        integrate_dense(linear_stepper(config.tolerance, -config.output_spacing), system,
                        Pair{sharp[0] * scale, sharp[1] * scale}, t_start, times, [&](double t, const Pair& a) {
                            const double n = t * t * t * (a[0] * a[0] + a[1] * a[1]);
                            result.minus_max_n = std::max(result.minus_max_n, n);
                            return true;
                        });
        if (result.minus_max_n > 1) result.minus_survived = false;
    }

    // Transversality on the boundary |a_sharp| = 1 at t_in, worst-case forcing along a-.
    {
        const double t = config.t_in;
        result.boundary_n_dot_max = -std::numeric_limits<double>::infinity();
        result.boundary_lyapunov_gap = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < config.boundary_directions; ++j) {
            const double angle = 2 * M_PI * j / config.boundary_directions;
            const Eigen::Vector2d a = std::pow(t, -1.5) * Eigen::Vector2d(std::cos(angle), std::sin(angle));
            const Eigen::Vector2d a_dot = -e0 * a + beta(t) * a.normalized();
            const double n = t * t * t * a.squaredNorm();
            const double n_dot = 3 * t * t * a.squaredNorm() + 2 * t * t * t * a.dot(a_dot);
            const double bound = -1.5 * e0 * n + 2 * C * std::pow(t, -0.75) * std::sqrt(n);
            result.boundary_n_dot_max = std::max(result.boundary_n_dot_max, n_dot);
            result.boundary_lyapunov_gap = std::max(result.boundary_lyapunov_gap, n_dot - bound);
        }
    }
    return result;
}

}  // namespace gkdv
