#include "experiments.hpp"

#include "gkdv/fitting.hpp"
#include "gkdv/interaction.hpp"
#include "gkdv/profile_io.hpp"
#include "gkdv/snapshot_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <span>
#include <sstream>

namespace gkdv::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string number(double value)
{
    std::array<char, 64> buffer{};
    const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return ec == std::errc{} ? std::string(buffer.data(), end) : std::string("nan");
}

// Plain CSV with shortest round-trip numbers, so reruns are byte-identical.
class CsvWriter {
public:
    CsvWriter(const fs::path& path, std::initializer_list<std::string_view> header) : out_(path)
    {
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        bool first = true;
        for (std::string_view column : header) {
            out_ << (first ? "" : ",") << column;
            first = false;
        }
        out_ << '\n';
    }

    void row(std::initializer_list<double> values)
    {
        bool first = true;
        for (double v : values) {
            out_ << (first ? "" : ",") << number(v);
            first = false;
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void log(const std::string& message)
{
    std::cerr << "[gkdv] " << message << std::endl;
}

Check at_most(std::string name, double value, double limit)
{
    return {std::move(name), value, limit, 0, "<=", value <= limit};
}

Check within(std::string name, double value, double target, double band)
{
    return {std::move(name), value, band, target, "band", std::abs(value - target) <= band};
}

Check holds(std::string name, bool value)
{
    return {std::move(name), value ? 1.0 : 0.0, 0, 1, "true", value};
}

double tolerance(const ExperimentConfig& config, const std::string& name)
{
    const auto it = config.tolerances.find(name);
    if (it == config.tolerances.end()) throw ConfigError(0, "tolerance." + name, "not set");
    return it->second;
}

ProfileSet profiles_for(const ExperimentConfig& config, bool with_edge)
{
    log("building interaction profiles for p = " + std::to_string(config.p));
    return build_profiles(config.p, LineGrid::make(config.profile_half_width, config.profile_n), with_edge);
}

json gamma_json(const ModParams& g)
{
    return {{"mu1", g.mu1}, {"mu2", g.mu2}, {"z1", g.z1}, {"z2", g.z2}};
}

// ---------------------------------------------------------------------------------------

RunReport ground_state(const ExperimentConfig& config, const fs::path& dir)
{
    const int p = config.p;
    const GroundState<double> Q{Power(p)};
    RunReport report;
    double ode = 0, first = 0;
    for (double x = -40; x <= 40; x += 1.0 / 64) {
        const double q = Q.value(x), q1 = Q.d1(x), q2 = Q.d2(x);
        ode = std::max(ode, std::abs(q2 + std::pow(q, p) - q));
        first = std::max(first, std::abs(q1 * q1 + 2 * std::pow(q, p + 1) / (p + 1) - q * q) / (q * q));
    }
    {
        CsvWriter csv(dir / "ground_state.csv", {"x", "Q", "dQ", "d2Q", "LambdaQ"});
        for (int j = -640; j <= 640; ++j) {
            const double x = j / 16.0;
            csv.row({x, Q.value(x), Q.d1(x), Q.d2(x), Q.lambda(x)});
        }
        report.files.push_back("ground_state.csv");
    }
    const SolitonIntegrals I = soliton_integrals(p);
    const AlphaConstant A = alpha_constant(p);
    report.metrics = {{"mass", I.mass},
                      {"integral_q", I.integral_q},
                      {"tail_constant", Q.tail_constant()},
                      {"q_lambda_q", I.q_lambda_q},
                      {"exp_moment", I.exp_moment},
                      {"alpha", A.alpha},
                      {"alpha_closed", A.alpha_closed},
                      {"alpha_ratio", A.alpha_ratio},
                      {"log_law_speed", A.speed},
                      {"ode_residual", ode},
                      {"first_integral_residual", first}};
    report.checks.push_back(at_most("ode_residual", ode, tolerance(config, "ode_residual")));
    report.checks.push_back(at_most("first_integral", first, tolerance(config, "first_integral")));
    report.checks.push_back(at_most("q_lambda_q", std::abs(I.q_lambda_q / I.q_lambda_q_identity - 1),
                                    tolerance(config, "q_lambda_q")));
    report.checks.push_back(
        at_most("exp_moment", std::abs(I.exp_moment / I.exp_moment_identity - 1), tolerance(config, "exp_moment")));
    report.checks.push_back(at_most("alpha_ratio", A.relative_mismatch, tolerance(config, "alpha_ratio")));
    if (config.tolerances.contains("log_law_speed"))
        report.checks.push_back(at_most("log_law_speed", std::abs(A.speed - 4), tolerance(config, "log_law_speed")));
    return report;
}

RunReport profiles(const ExperimentConfig& config, const fs::path& dir)
{
    const bool supercritical = Power(config.p).criticality() == Criticality::supercritical;
    const ProfileSet P = profiles_for(config, supercritical);
    const ProfileResidual R = profile_residual(P);
    write_profiles(P, dir / "profiles.gkdvprof");
    write_profiles_csv(P, dir / "profiles.csv");

    RunReport report;
    report.files = {"profiles.gkdvprof", "profiles.csv"};
    report.metrics = {{"alpha", P.alpha}, {"theta", P.theta}, {"a1", P.a1}, {"a2", P.a2},
                      {"sigma", P.sigma}, {"equation_residual_1", R.eq1}, {"equation_residual_2", R.eq2},
                      {"far_field", {{"A1_left", R.left1}, {"A2_left", R.left2}, {"A1_right", R.right1}, {"A2_right", R.right2}}}};
    if (P.edge) report.metrics["e0"] = P.edge->e0;
    const double orthogonality = std::max({std::abs(R.ortho1_kernel), std::abs(R.ortho1_q), std::abs(R.ortho2_kernel),
                                           std::abs(R.ortho2_q)});
    const double far = std::max({std::abs(R.right1), std::abs(R.right2), std::abs(R.left1 - 2 * P.theta),
                                 std::abs(R.left2 + 2 * P.sigma * P.theta)});
    report.checks.push_back(at_most("equation", std::max(R.eq1, R.eq2), tolerance(config, "equation")));
    report.checks.push_back(at_most("orthogonality", orthogonality, tolerance(config, "orthogonality")));
    report.checks.push_back(at_most("far_field", far, tolerance(config, "far_field")));
    if (config.tolerances.contains("theta"))
        report.checks.push_back(at_most("theta", std::abs(P.theta), tolerance(config, "theta")));
    return report;
}

RunReport residual(const ExperimentConfig& config, const fs::path& dir)
{
    const ProfileSet P = profiles_for(config, false);
    const double h = config.p > 5 ? 1.0 / 32 : 1.0 / 16;
    std::vector<double> zs, with_r, without_r;
    CsvWriter csv(dir / "residual.csv", {"z", "E_h1", "E_h1_without_r"});
    for (double z = config.z_from; z <= config.z_to + 1e-9; z += config.z_step) {
        const ModParams g = symmetric_params(z, P.alpha);
        const PeriodicGrid grid = residual_grid(g, h);
        const double e = flow_residual(g, formal_flow(g, P), P, grid).norm_E_h1;
        const double bare = flow_residual(g, formal_flow(g, P), P, grid, AnsatzOptions{false}).norm_E_h1;
        csv.row({z, e, bare});
        zs.push_back(z);
        with_r.push_back(std::log(e));
        without_r.push_back(std::log(bare));
    }
    const double rate = -fit_line(zs, with_r).slope, rate_bare = -fit_line(zs, without_r).slope;
    RunReport report;
    report.files = {"residual.csv"};
    report.metrics = {{"rate_with_r", rate}, {"rate_without_r", rate_bare}, {"samples", zs.size()}};
    const double band = tolerance(config, "rate_band");
    report.checks.push_back(within("rate_with_r", rate, tolerance(config, "rate_with_r"), band));
    report.checks.push_back(within("rate_without_r", rate_bare, tolerance(config, "rate_without_r"), band));
    return report;
}

RunReport ode(const ExperimentConfig& config, const fs::path& dir)
{
    ReducedConstants constants;
    if (config.exact_law) {
        constants.alpha = alpha_constant(config.p).alpha;
    } else {
        constants = ReducedConstants::from(profiles_for(config, false));
    }
    const ReducedState start{config.t0, log_law_state(config.t0, constants.alpha)};
    const auto times = time_grid(config.t0, config.t_end, config.sample_every);
    const auto states = integrate_reduced(start, times, constants);

    const double f0 = first_integral(start.gamma, constants.alpha);
    double law = 0, drift = 0;
    CsvWriter csv(dir / "ode.csv", {"t", "mu1", "mu2", "z1", "z2", "z", "mu", "law_z", "law_mu", "first_integral"});
    for (const ReducedState& s : states) {
        const LogLaw exact = log_law_exact(s.t, constants.alpha);
        const double f = first_integral(s.gamma, constants.alpha);
        law = std::max({law, std::abs(s.gamma.z() - exact.z), std::abs(s.gamma.mu() - exact.mu)});
        drift = std::max(drift, std::abs(f - f0));
        csv.row({s.t, s.gamma.mu1, s.gamma.mu2, s.gamma.z1, s.gamma.z2, s.gamma.z(), s.gamma.mu(), exact.z, exact.mu, f});
    }
    RunReport report;
    report.files = {"ode.csv"};
    report.metrics = {{"alpha", constants.alpha}, {"a1", constants.a1}, {"a2", constants.a2},
                      {"law_deviation", law}, {"first_integral_drift", drift}, {"samples", states.size()}};
    if (config.exact_law) {
        report.checks.push_back(at_most("law_deviation", law, tolerance(config, "law_deviation")));
        report.checks.push_back(at_most("first_integral_drift", drift, tolerance(config, "first_integral_drift")));
    } else {
        report.notes.push_back("drift terms a1, a2 are on: the log law is not exact, deviations are reported only");
    }
    return report;
}

RunReport shoot(const ExperimentConfig& config, const fs::path& dir)
{
    const ProfileSet P = profiles_for(config, false);
    ShootingConfig shooting;
    shooting.t_in = config.t_in;
    shooting.t0 = config.t0;
    shooting.output_spacing = config.sample_every;
    const ShootingResult result = shoot_zeta(shooting, ReducedConstants::from(P));
    {
        CsvWriter csv(dir / "shoot_exit_map.csv",
                      {"zeta_sharp", "zeta_in", "survived", "exit_time", "side", "xi_dot_at_exit", "transversal"});
        for (const TubeRun& run : result.exit_map)
            csv.row({run.zeta_sharp, run.zeta_in, double(run.survived), run.exit_time, double(run.side),
                     run.xi_dot_at_exit, double(run.transversal)});
        CsvWriter traj(dir / "shoot_trajectory.csv", {"t", "mu1", "mu2", "z1", "z2", "z", "mu", "zeta"});
        for (const ReducedState& s : result.accepted.trajectory)
            traj.row({s.t, s.gamma.mu1, s.gamma.mu2, s.gamma.z1, s.gamma.z2, s.gamma.z(), s.gamma.mu(),
                      zeta_of(s.gamma.z(), P.alpha)});
    }
    RunReport report;
    report.files = {"shoot_exit_map.csv", "shoot_trajectory.csv"};
    const double half_window = std::pow(config.t_in, shooting.window_exponent);
    report.metrics = {{"zeta_in", result.zeta_in},
                      {"zeta_sharp", result.zeta_sharp},
                      {"window", {result.window_low, result.window_high}},
                      {"bisection_steps", result.bisection_steps},
                      {"evaluations", result.exit_map.size()}};
    report.checks.push_back(holds("found", result.found));
    report.checks.push_back(holds("survived_to_t0", result.accepted.survived));
    report.checks.push_back(at_most("zeta_in_window", std::abs(result.zeta_in - config.t_in), half_window));
    return report;
}

// "soliton[:v=..,x=..]", "pair[:z=..,shot=..]", or a snapshot path (optionally "file:" prefixed).
FieldState initial_state(const ExperimentConfig& config, const PeriodicGrid& grid, const Frame frame)
{
    std::string_view spec = config.initial;
    const auto colon = spec.find(':');
    const std::string_view kind = spec.substr(0, colon);
    std::map<std::string, double> args;
    if (colon != std::string_view::npos && (kind == "soliton" || kind == "pair")) {
        std::stringstream in{std::string(spec.substr(colon + 1))};
        std::string item;
        while (std::getline(in, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError(0, "initial", "expected key=value in '" + item + "'");
            try {
                args[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw ConfigError(0, "initial", "bad number in '" + item + "'");
            }
        }
    }
    auto arg = [&](const std::string& key, double fallback) {
        const auto it = args.find(key);
        return it == args.end() ? fallback : it->second;
    };

    FieldState state;
    state.grid = grid;
    state.t = config.t0;
    if (kind == "soliton") {
        const double v = arg("v", 1), x = arg("x", 0);
        const GroundState<double> Q{Power(config.p)};
        // x is the position at t0 in the chosen frame.
        state.frame = frame;
        state.w = grid.sample([&](double y) { return Q.value(y - x, v); });
        return state;
    }
    if (kind == "pair") {
        const ProfileSet P = profiles_for(config, false);
        AnsatzOptions options;
        options.cutoff_scale_limit = 0.6 * grid.half_length;
        const ModParams g = mass_balanced_pair(arg("z", config.z0), arg("shot", config.shot), P, grid, options);
        state.frame = Frame::renormalized;
        state.w = build_V(g, P, grid, options).V;
        return to_frame(state, frame);
    }
    const std::string path = kind == "file" ? std::string(spec.substr(colon + 1)) : std::string(spec);
    Snapshot snapshot = read_snapshot(path);
    if (snapshot.p != config.p) throw ConfigError(0, "initial", "snapshot was written for p = " + std::to_string(snapshot.p));
    return to_frame(snapshot.state, frame);
}

RunReport evolve_run(const ExperimentConfig& config, const fs::path& dir)
{
    const Frame frame = frame_from_string(config.frame);
    const bool from_file = !(config.initial.starts_with("soliton") || config.initial.starts_with("pair"));
    FieldState state = initial_state(config, PeriodicGrid::make(config.half_length, config.n), frame);
    if (from_file) log("initial data read from " + config.initial);

    SolverConfig solver;
    solver.p = config.p;
    solver.dt = config.dt;
    solver.wrap_limit = config.wrap_limit;
    solver.callback_every = config.sample_every;
    // Narrow domains cannot host the default 40-unit monitor strip.
    if (state.grid.half_length <= 2 * solver.wrap_strip) solver.wrap_monitor = false;
    const int snapshot_stride =
        config.snapshots_every > 0 ? static_cast<int>(std::lround(config.snapshots_every / config.sample_every)) : 0;

    RunReport report;
    if (!solver.wrap_monitor) report.notes.push_back("wrap monitor off: half_length is at most twice the strip");
    CsvWriter csv(dir / "invariants.csv", {"t", "mass", "energy", "max_abs"});
    report.files.push_back("invariants.csv");
    fs::create_directories(dir / "snapshots");
    const Invariants initial = invariants(state, config.p);
    double mass_drift = 0, energy_drift = 0;
    int index = 0;
    const double t_end = config.t_end;
    const EvolveSummary summary = evolve(state, t_end, solver, [&](const FieldState& s) {
        const Invariants inv = invariants(s, config.p);
        mass_drift = std::max(mass_drift, std::abs(inv.mass - initial.mass) / std::abs(initial.mass));
        energy_drift = std::max(energy_drift, std::abs(inv.energy - initial.energy) / std::abs(initial.energy));
        csv.row({s.t, inv.mass, inv.energy, s.w.cwiseAbs().maxCoeff()});
        const bool last = std::abs(s.t - t_end) < 1e-9;
        if (snapshot_stride > 0 && (index % snapshot_stride == 0 || last)) {
            char name[48];
            std::snprintf(name, sizeof name, "snapshots/snap_%06d.gkdvsnap", index);
            write_snapshot(s, config.p, dir / name);
            report.files.push_back(name);
        }
        ++index;
    });
    report.metrics = {{"frame", to_string(frame)},
                      {"steps", summary.steps},
                      {"dt_used", summary.dt_used},
                      {"callbacks", summary.callbacks},
                      {"mass_initial", initial.mass},
                      {"energy_initial", initial.energy},
                      {"mass_drift", mass_drift},
                      {"energy_drift", energy_drift},
                      {"max_amplitude", summary.max_amplitude},
                      {"max_tail_fraction", summary.max_tail_fraction},
                      {"max_wrap_ratio", summary.max_wrap_ratio}};
    report.checks.push_back(at_most("mass_drift", mass_drift, tolerance(config, "mass_drift")));
    report.checks.push_back(at_most("energy_drift", energy_drift, tolerance(config, "energy_drift")));
    return report;
}

void write_shape(const fs::path& path, std::span<const double> t, std::span<const double> deviation)
{
    CsvWriter csv(path, {"t", "deviation_h1"});
    for (std::size_t i = 0; i < t.size(); ++i) csv.row({t[i], deviation[i]});
}

json fit_json(const LogLawFit& fit, double alpha)
{
    return {{"t_from", fit.t_from},
            {"t_to", fit.t_to},
            {"samples", fit.samples},
            {"c_fit", fit.c_fit},
            {"intercept", fit.intercept},
            {"c_through_origin", fit.c_through_origin},
            {"sqrt_alpha", std::sqrt(alpha)},
            {"relative_error", fit.relative_error},
            {"relative_error_through_origin", fit.relative_error_through_origin},
            {"rms_residual", fit.rms_residual}};
}

RunReport track(const ExperimentConfig& config, const fs::path& dir)
{
    std::vector<Snapshot> snapshots;
    for (const auto& entry : fs::directory_iterator(config.input))
        if (entry.path().extension() == ".gkdvsnap") snapshots.push_back(read_snapshot(entry.path()));
    if (snapshots.empty()) throw ConfigError(0, "input", "no .gkdvsnap files in " + config.input);
    std::sort(snapshots.begin(), snapshots.end(), [](const Snapshot& a, const Snapshot& b) { return a.state.t < b.state.t; });
    for (const Snapshot& s : snapshots)
        if (s.p != config.p) throw ConfigError(0, "input", "snapshot written for p = " + std::to_string(s.p));
    log("tracking " + std::to_string(snapshots.size()) + " snapshots");

    const ProfileSet P = profiles_for(config, false);
    TrackerOptions options;
    options.decompose.ansatz.cutoff_scale_limit = 0.6 * snapshots.front().state.grid.half_length;
    options.stop_on_tube_exit = false;
    Tracker tracker(P, options);
    std::vector<double> t, deviation, z;
    for (const Snapshot& s : snapshots) {
        const TrackRow& row = tracker.observe(s.state);
        t.push_back(row.t);
        z.push_back(row.gamma.z());
        deviation.push_back(target_shape_deviation(s.state, config.p, P.alpha));
    }
    write_track_csv(tracker.rows(), dir / "track.csv");
    write_shape(dir / "shape.csv", t, deviation);

    RunReport report;
    report.files = {"track.csv", "shape.csv"};
    report.metrics["samples"] = t.size();
    if (t.size() >= 2) {
        const ShapeTrend trend = compare_to_target_shape(t, deviation);
        report.metrics["shape"] = {{"decreasing", trend.decreasing},
                                   {"decay_exponent", trend.decay_exponent},
                                   {"proof_rate", trend.proof_rate}};
        if (config.p == 3) report.checks.push_back(holds("shape_decreasing", trend.decreasing));
    }
    try {
        report.metrics["log_law"] = fit_json(fit_log_law(t, z, config.t0, config.t_end, P.alpha), P.alpha);
    } catch (const std::invalid_argument& error) {
        report.notes.push_back(std::string("no log-law fit: ") + error.what());
    }
    return report;
}

RunReport interaction(const ExperimentConfig& config, const fs::path& dir)
{
    const ProfileSet P = profiles_for(config, false);
    InteractionConfig ic;
    ic.p = config.p;
    ic.half_length = config.half_length;
    ic.n = config.n;
    ic.dt = config.dt;
    ic.wrap_limit = config.wrap_limit;
    ic.t0 = config.t0;
    ic.t_end = config.t_end;
    ic.z0 = config.z0;
    ic.track_every = config.sample_every;
    ic.shoot = config.shoot;
    ic.shot = config.shot;
    ic.shot_tolerance = tolerance(config, "shot_offset");
    const InteractionResult result = run_interaction(ic, P, [](const ShotRecord& shot) {
        log("shot " + number(shot.shot) + ": speed offset at t_end " + number(shot.offset));
    });

    write_track_csv(result.rows, dir / "track.csv");
    std::vector<double> t;
    for (const TrackRow& row : result.rows) t.push_back(row.t);
    write_shape(dir / "shape.csv", t, result.shape_deviation);
    {
        CsvWriter csv(dir / "shots.csv", {"shot", "offset"});
        for (const ShotRecord& s : result.shots) csv.row({s.shot, s.offset});
    }
    const ShapeTrend trend = compare_to_target_shape(t, result.shape_deviation);

    RunReport report;
    report.files = {"track.csv", "shape.csv", "shots.csv"};
    report.metrics = {{"log_law", fit_json(result.fit, P.alpha)},
                      {"shot", result.shot},
                      {"shots", result.shots.size()},
                      {"initial", gamma_json(result.initial)},
                      {"mu_t_over_2", {{"min", result.least_band_ratio}, {"max", result.worst_band_ratio}}},
                      {"max_wrap_ratio", result.evolve.max_wrap_ratio},
                      {"max_eps_h1", std::max_element(result.rows.begin(), result.rows.end(),
                                                      [](const TrackRow& a, const TrackRow& b) { return a.eps_h1 < b.eps_h1; })->eps_h1},
                      {"shape", {{"decreasing", trend.decreasing}, {"decay_exponent", trend.decay_exponent}, {"proof_rate", trend.proof_rate}}}};
    report.checks.push_back(at_most("c_fit_relative", result.fit.relative_error, tolerance(config, "c_fit_relative")));
    report.checks.push_back(holds("mu_band", result.mu_in_band));
    if (config.shoot) {
        const double offset = std::abs(std::min_element(result.shots.begin(), result.shots.end(), [](auto& a, auto& b) {
                                          return std::abs(a.offset) < std::abs(b.offset);
                                      })->offset);
        report.checks.push_back(at_most("shot_offset", offset, tolerance(config, "shot_offset")));
    }
    return report;
}

RunReport fit(const ExperimentConfig& config, const fs::path& dir)
{
    const std::vector<TrackRow> rows = read_track_csv(config.input);
    const double alpha = alpha_constant(config.p).alpha;
    std::vector<double> t, z;
    for (const TrackRow& row : rows) {
        t.push_back(row.t);
        z.push_back(row.gamma.z());
    }
    const LogLawFit result = fit_log_law(t, z, config.t0, config.t_end, alpha);
    {
        CsvWriter csv(dir / "fit_residuals.csv", {"t", "exp_half_z", "residual"});
        std::size_t k = 0;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] >= config.t0 && t[i] <= config.t_end) csv.row({t[i], std::exp(z[i] / 2), result.residuals[k++]});
    }
    RunReport report;
    report.files = {"fit_residuals.csv"};
    report.metrics = {{"log_law", fit_json(result, alpha)}};
    report.checks.push_back(at_most("c_fit_relative", result.relative_error, tolerance(config, "c_fit_relative")));
    return report;
}

}  // namespace

bool RunReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void validate(const ExperimentConfig& config)
{
    try {
        Power(config.p).require_noncritical("experiment");
    } catch (const std::invalid_argument& error) {
        throw ConfigError(0, "p", error.what());
    }
    auto require = [](bool ok, const char* field, const std::string& message) {
        if (!ok) throw ConfigError(0, field, message);
    };
    require(config.profile_half_width > 0 && config.profile_n >= 64, "profile_n", "profile grid too small");
    require(config.half_length > 0 && config.n >= 16 && config.n % 2 == 0, "n", "need an even n >= 16");
    require(config.dt > 0, "dt", "must be positive");
    require(config.sample_every > 0, "sample_every", "must be positive");
    require(config.snapshots_every >= 0, "snapshots_every", "must be non-negative");
    if (config.snapshots_every > 0) {
        const double ratio = config.snapshots_every / config.sample_every;
        require(ratio >= 1 - 1e-12 && std::abs(ratio - std::round(ratio)) < 1e-9, "snapshots_every",
                "must be a whole multiple of sample_every");
    }
    require(!config.output_dir.empty(), "output_dir", "empty");
    try {
        frame_from_string(config.frame);
    } catch (const std::exception& error) {
        throw ConfigError(0, "frame", error.what());
    }
    const bool evolving = config.experiment == Experiment::evolve || config.experiment == Experiment::interaction;
    if (evolving || config.experiment == Experiment::track) {
        require(Power(config.p).criticality() == Criticality::subcritical, "p",
                "PDE runs are limited to subcritical powers (p = 3, 4)");
    }
    if (evolving) require(config.t_end > config.t0, "t_end", "must exceed t0");
    switch (config.experiment) {
    case Experiment::residual:
        require(config.z_step > 0 && config.z_to > config.z_from, "z_step", "need z_from < z_to and z_step > 0");
        break;
    case Experiment::ode:
        require(config.t0 > 0 && config.t_end > config.t0, "t_end", "need 0 < t0 < t_end");
        break;
    case Experiment::shoot:
        require(config.t_in >= 10 * config.t0 && config.t0 >= 10, "t_in", "need t_in >= 10 t0 and t0 >= 10");
        break;
    case Experiment::track:
        require(fs::is_directory(config.input), "input", "snapshot directory '" + config.input + "' not found");
        break;
    case Experiment::fit:
        require(fs::is_regular_file(config.input), "input", "track CSV '" + config.input + "' not found");
        break;
    case Experiment::interaction:
        require(config.z0 > 0, "z0", "must be positive");
        break;
    case Experiment::evolve: {
        const bool builtin = config.initial.starts_with("soliton") || config.initial.starts_with("pair");
        if (!builtin) {
            const std::string path = config.initial.starts_with("file:") ? config.initial.substr(5) : config.initial;
            require(fs::is_regular_file(path), "initial", "neither soliton/pair data nor a snapshot file: '" + config.initial + "'");
        }
        break;
    }
    default:
        break;
    }
}

std::vector<std::string> plan(const ExperimentConfig& config)
{
    switch (config.experiment) {
    case Experiment::ground_state:
        return {"GroundState<double>(p): ODE and first-integral residuals on [-40, 40], h = 1/64",
                "soliton_integrals(p)", "alpha_constant(p)", "write ground_state.csv"};
    case Experiment::profiles:
        return {"build_profiles(p, LineGrid(profile_half_width, profile_n))", "profile_residual",
                "write_profiles -> profiles.gkdvprof", "write_profiles_csv -> profiles.csv"};
    case Experiment::residual:
        return {"build_profiles(p)", "for z in [z_from, z_to] step z_step: flow_residual with and without r",
                "fit_line(z, log |E|_H1)", "write residual.csv"};
    case Experiment::ode:
        return {config.exact_law ? "constants alpha_constant(p), a1 = a2 = 0" : "build_profiles(p) for alpha, a1, a2",
                "log_law_state(t0)", "integrate_reduced over time_grid(t0, t_end, sample_every)", "write ode.csv"};
    case Experiment::shoot:
        return {"build_profiles(p)", "shoot_zeta(t_in, t0)", "write shoot_exit_map.csv, shoot_trajectory.csv"};
    case Experiment::evolve:
        return {"initial state from '" + config.initial + "'", "evolve(state, t_end) with ETDRK4, frame " + config.frame,
                "invariants every sample_every -> invariants.csv",
                config.snapshots_every > 0 ? "write_snapshot every snapshots_every -> snapshots/" : "no snapshots"};
    case Experiment::track:
        return {"read_snapshot for every .gkdvsnap in input", "build_profiles(p)", "Tracker::observe per snapshot",
                "target_shape_deviation per snapshot", "write track.csv, shape.csv", "fit_log_law when possible"};
    case Experiment::interaction:
        return {"build_profiles(p)",
                config.shoot ? "run_interaction: shoot the speed offset (TOMS748), one evolve + track per shot"
                             : "run_interaction: single evolve + track at the given shot",
                "fit_log_law over [t0, t_end]", "write track.csv, shape.csv, shots.csv"};
    case Experiment::fit:
        return {"read_track_csv(input)", "fit_log_law over [t0, t_end]", "write fit_residuals.csv"};
    }
    return {};
}

fs::path run_directory(const ExperimentConfig& config)
{
    return fs::path(config.output_dir) / (to_string(config.experiment) + "-" + run_id_hex(config));
}

RunReport run_experiment(const ExperimentConfig& config, const fs::path& dir)
{
    validate(config);
    fs::create_directories(dir);
    switch (config.experiment) {
    case Experiment::ground_state: return ground_state(config, dir);
    case Experiment::profiles: return profiles(config, dir);
    case Experiment::residual: return residual(config, dir);
    case Experiment::ode: return ode(config, dir);
    case Experiment::shoot: return shoot(config, dir);
    case Experiment::evolve: return evolve_run(config, dir);
    case Experiment::track: return track(config, dir);
    case Experiment::interaction: return interaction(config, dir);
    case Experiment::fit: return fit(config, dir);
    }
    throw std::logic_error("unhandled experiment");
}

json summary_json(const ExperimentConfig& config, const RunReport& report, double seconds)
{
    json checks = json::array();
    for (const Check& c : report.checks) {
        json entry = {{"name", c.name}, {"value", c.value}, {"relation", c.relation}};
        if (c.relation == "band") {
            entry["target"] = c.target;
            entry["band"] = c.limit;
        } else if (c.relation == "<=") {
            entry["limit"] = c.limit;
        }
        entry["pass"] = c.pass;
        checks.push_back(std::move(entry));
    }
    json echo = json::object();
    std::istringstream lines(serialize(config));
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find(" = ");
        echo[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return {{"schema", "gkdv-run-summary"},
            {"schema_version", kSummarySchemaVersion},
            {"run_id", run_id_hex(config)},
            {"experiment", to_string(config.experiment)},
            {"p", config.p},
            {"config", echo},
            {"metrics", report.metrics},
            {"checks", checks},
            {"passed", report.passed()},
            {"files", report.files},
            {"notes", report.notes},
            {"wall_clock_seconds", seconds}};
}

}  // namespace gkdv::cli
