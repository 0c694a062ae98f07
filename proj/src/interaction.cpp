#include "gkdv/interaction.hpp"

#include "gkdv/fitting.hpp"
#include "gkdv/spectral.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace gkdv {

ModParams mass_balanced_pair(double z, double shot, const ProfileSet& profiles, const PeriodicGrid& grid,
                             const AnsatzOptions& options)
{
    if (!(z > 0)) throw std::invalid_argument("mass_balanced_pair: z must be positive");
    const double mu = (1 + shot) * 2 * std::sqrt(profiles.alpha) * std::exp(-z / 2);
    const double target = 2 * soliton_integrals(profiles.p).mass;
    auto gap = [&](double mubar) {
        const ModParams g{(mubar + mu) / 2, (mubar - mu) / 2, z / 2, -z / 2};
        const Eigen::VectorXd V = build_V(g, profiles, grid, options).V;
        return grid.dot(V, V) - target;
    };
    // Mass is nearly linear in mubar (slope 2 M(Q)(2/(p-1) - 1/2) / 2); a few secant steps suffice.
    double a = 0, fa = gap(a);
    double b = 1e-3, fb = gap(b);
    for (int it = 0; it < 30 && std::abs(fb) > 1e-14 * target; ++it) {
        if (fb == fa) throw std::runtime_error("mass_balanced_pair: mass does not depend on mubar");
        const double c = b - fb * (b - a) / (fb - fa);
        a = b;
        fa = fb;
        b = c;
        fb = gap(b);
    }
    if (std::abs(fb) > 1e-12 * target) throw std::runtime_error("mass_balanced_pair: secant did not converge");
    return {(b + mu) / 2, (b - mu) / 2, z / 2, -z / 2};
}

Eigen::VectorXd target_shape(const PeriodicGrid& grid, double t, int p, double alpha)
{
    if (!(t > 0) || !(alpha > 0)) throw std::invalid_argument("target_shape: t and alpha must be positive");
    const Power power(p);
    const GroundState<double> Q(power);
    const double shift = std::log(std::sqrt(alpha) * t);
    const int sigma = power.sigma();
    return grid.sample([&](double y) { return Q.value(y - shift) + sigma * Q.value(y + shift); });
}

double target_shape_deviation(const FieldState& state, int p, double alpha)
{
    const FieldState frame = to_frame(state, Frame::renormalized);
    const SpectralDifferentiator d(frame.grid);
    return d.h1_norm(frame.w - target_shape(frame.grid, frame.t, p, alpha));
}

ShapeTrend compare_to_target_shape(std::span<const double> t, std::span<const double> deviation)
{
    if (t.size() != deviation.size() || t.size() < 2)
        throw std::invalid_argument("compare_to_target_shape: need at least two paired samples");
    ShapeTrend trend;
    trend.t.assign(t.begin(), t.end());
    trend.deviation.assign(deviation.begin(), deviation.end());
    std::vector<double> log_t, log_d;
    trend.decreasing = true;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i > 0 && !(deviation[i] < deviation[i - 1])) trend.decreasing = false;
        if (t[i] > 0 && deviation[i] > 0) {
            log_t.push_back(std::log(t[i]));
            log_d.push_back(std::log(deviation[i]));
        }
    }
    trend.decay_exponent = log_t.size() >= 2 ? -fit_line(log_t, log_d).slope : 0.0;
    return trend;
}

void InteractionConfig::validate() const
{
    Power power(p);
    if (power.criticality() != Criticality::subcritical)
        throw std::invalid_argument("interaction: only subcritical powers (p = 3, 4) are evolved");
    if (!(t0 > 0 && t_end > t0)) throw std::invalid_argument("interaction: need 0 < t0 < t_end");
    if (!(z0 > 0)) throw std::invalid_argument("interaction: z0 must be positive");
    if (!(track_every > 0)) throw std::invalid_argument("interaction: track_every must be positive");
    if (!(shot_bracket > 0) || !(shot_tolerance > 0) || max_shots < 2)
        throw std::invalid_argument("interaction: bad shooting parameters");
    if (!(half_length > 0) || n < 16) throw std::invalid_argument("interaction: bad grid");
}

namespace {

struct ShotRun {
    ShotRecord record;
    ModParams initial;
    std::vector<TrackRow> rows;
    std::vector<double> shape;
    EvolveSummary evolve;
};

ShotRun run_shot(const InteractionConfig& config, const ProfileSet& profiles, double shot)
{
    const PeriodicGrid grid = PeriodicGrid::make(config.half_length, config.n);
    TrackerOptions tracking;
    tracking.decompose.ansatz.cutoff_scale_limit = 0.6 * grid.half_length;
    tracking.stop_on_tube_exit = false;

    ShotRun run;
    run.record.shot = shot;
    run.initial = mass_balanced_pair(config.z0, shot, profiles, grid, tracking.decompose.ansatz);

    FieldState state;
    state.grid = grid;
    state.t = config.t0;
    state.w = build_V(run.initial, profiles, grid, tracking.decompose.ansatz).V;

    SolverConfig solver;
    solver.p = config.p;
    solver.dt = config.dt;
    solver.wrap_limit = config.wrap_limit;
    solver.callback_every = config.track_every;

    Tracker tracker(profiles, tracking);
    tracker.seed(run.initial);
    run.evolve = evolve(state, config.t_end, solver, [&](const FieldState& s) {
        tracker.observe(s);
        run.shape.push_back(target_shape_deviation(s, config.p, profiles.alpha));
    });
    run.rows = tracker.rows();
    const ModParams& last = run.rows.back().gamma;
    run.record.offset = last.mu() / (2 * std::sqrt(profiles.alpha) * std::exp(-last.z() / 2)) - 1;
    return run;
}

}  // namespace

InteractionResult run_interaction(const InteractionConfig& config, const ProfileSet& profiles,
                                  const ShotObserver& observer)
{
    config.validate();
    if (profiles.p != config.p) throw std::invalid_argument("interaction: profiles built for another power");

    std::vector<ShotRecord> shots;
    std::optional<ShotRun> best;
    auto evaluate = [&](double shot) {
        ShotRun run = run_shot(config, profiles, shot);
        shots.push_back(run.record);
        if (observer) observer(run.record);
        const double offset = run.record.offset;
        if (!best || std::abs(offset) < std::abs(best->record.offset)) best = std::move(run);
        return offset;
    };

    if (config.shoot) {
        double low = -config.shot_bracket, high = config.shot_bracket;
        double f_low = evaluate(low), f_high = evaluate(high);
        while (f_low * f_high > 0 && high < 0.32 && static_cast<int>(shots.size()) + 2 <= config.max_shots) {
            low *= 2;
            high *= 2;
            f_low = evaluate(low);
            f_high = evaluate(high);
        }
        if (f_low * f_high > 0)
            throw std::runtime_error("interaction: speed offset keeps one sign over the shooting bracket");
        if (std::abs(best->record.offset) > config.shot_tolerance) {
            // An exact zero ends the bracketing solve, so offsets inside the tolerance report as zero.
            auto target = [&](double shot) {
                const double offset = evaluate(shot);
                return std::abs(offset) <= config.shot_tolerance ? 0.0 : offset;
            };
            std::uintmax_t budget = static_cast<std::uintmax_t>(std::max(1, config.max_shots - int(shots.size())));
            boost::math::tools::toms748_solve(
                target, low, high, f_low, f_high, [](double a, double b) { return std::abs(b - a) < 1e-7; },
                budget);
        }
    } else {
        evaluate(config.shot);
    }

    InteractionResult result;
    result.shots = std::move(shots);
    result.shot = best->record.shot;
    result.initial = best->initial;
    result.rows = std::move(best->rows);
    result.shape_deviation = std::move(best->shape);
    result.evolve = best->evolve;

    std::vector<double> t, z;
    result.mu_in_band = true;
    result.worst_band_ratio = 0;
    result.least_band_ratio = std::numeric_limits<double>::infinity();
    for (const TrackRow& row : result.rows) {
        t.push_back(row.t);
        z.push_back(row.gamma.z());
        const double ratio = row.gamma.mu() * row.t / 2;
        result.worst_band_ratio = std::max(result.worst_band_ratio, ratio);
        result.least_band_ratio = std::min(result.least_band_ratio, ratio);
        if (!(ratio >= 0.25 && ratio <= 1)) result.mu_in_band = false;
    }
    result.fit = fit_log_law(t, z, config.t0, config.t_end, profiles.alpha);
    return result;
}

}  // namespace gkdv
