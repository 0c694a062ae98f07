#include "experiments.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace gkdv;
namespace fs = std::filesystem;

enum ExitCode { kPassed = 0, kChecksFailed = 1, kConfigError = 2, kRunError = 3 };

// Values given on the command line; unset ones leave the configuration alone.
struct Overrides {
    std::optional<int> p, n, profile_n;
    std::optional<double> half_length, dt, t0, t_end, t_in, wrap_limit, z0, z_from, z_to, z_step;
    std::optional<double> snapshots_every, sample_every, shot, profile_half_width;
    std::optional<std::string> frame, initial, input, output;
    bool exact_law = false, no_shoot = false;
    std::vector<std::string> tolerances;  // name=value

    void apply(ExperimentConfig& c) const
    {
        auto set = [](auto& target, const auto& value) {
            if (value) target = *value;
        };
        set(c.n, n);
        set(c.profile_n, profile_n);
        set(c.half_length, half_length);
        set(c.profile_half_width, profile_half_width);
        set(c.dt, dt);
        set(c.t0, t0);
        set(c.t_end, t_end);
        set(c.t_in, t_in);
        set(c.wrap_limit, wrap_limit);
        set(c.z0, z0);
        set(c.z_from, z_from);
        set(c.z_to, z_to);
        set(c.z_step, z_step);
        set(c.snapshots_every, snapshots_every);
        set(c.sample_every, sample_every);
        set(c.shot, shot);
        set(c.frame, frame);
        set(c.initial, initial);
        set(c.input, input);
        if (exact_law) c.exact_law = true;
        if (no_shoot) c.shoot = false;
        for (const std::string& item : tolerances) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError(0, "--tol", "expected name=value, got '" + item + "'");
            const std::string name = item.substr(0, eq);
            if (!c.tolerances.contains(name))
                throw ConfigError(0, "--tol", "tolerance '" + name + "' is not declared for " + to_string(c.experiment));
            try {
                c.tolerances[name] = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw ConfigError(0, "--tol", "bad value in '" + item + "'");
            }
        }
    }
};

struct Subcommand {
    Experiment experiment;
    CLI::App* app = nullptr;
};

void add_flags(CLI::App* app, Experiment e, Overrides& o)
{
    app->add_option("--p", o.p, "nonlinearity power");
    app->add_option("--tol", o.tolerances, "override a declared tolerance, name=value")->take_all();
    auto profile_grid = [&] {
        app->add_option("--profile-half-width", o.profile_half_width, "line grid half width for profiles");
        app->add_option("--profile-n", o.profile_n, "line grid points for profiles");
    };
    auto pde_grid = [&] {
        app->add_option("--L", o.half_length, "periodic half-length; domain [-L, L)");
        app->add_option("--N", o.n, "periodic grid points");
        app->add_option("--dt", o.dt, "time step");
        app->add_option("--wrap-limit", o.wrap_limit, "wrapped-tail ratio limit");
    };
    switch (e) {
    case Experiment::ground_state:
        break;
    case Experiment::profiles:
        profile_grid();
        break;
    case Experiment::residual:
        profile_grid();
        app->add_option("--z-from", o.z_from);
        app->add_option("--z-to", o.z_to);
        app->add_option("--z-step", o.z_step);
        break;
    case Experiment::ode:
        profile_grid();
        app->add_flag("--exact-law", o.exact_law, "drop the a1, a2 drift terms");
        app->add_option("--t0", o.t0);
        app->add_option("--t-end", o.t_end);
        app->add_option("--sample-every", o.sample_every);
        break;
    case Experiment::shoot:
        profile_grid();
        app->add_option("--t0", o.t0);
        app->add_option("--t-in", o.t_in);
        app->add_option("--sample-every", o.sample_every);
        break;
    case Experiment::evolve:
        profile_grid();
        pde_grid();
        app->add_option("--t0", o.t0, "initial time");
        app->add_option("--t-end", o.t_end, "final time");
        app->add_option("--frame", o.frame, "renormalized or lab");
        app->add_option("--initial", o.initial, "soliton[:v=..,x=..], pair[:z=..,shot=..] or a snapshot file");
        app->add_option("--snapshots-every", o.snapshots_every, "snapshot interval (0: none)");
        app->add_option("--sample-every", o.sample_every, "invariants CSV interval");
        app->add_option("--shot", o.shot, "speed offset for pair data");
        app->add_option("--z0", o.z0, "separation for pair data");
        break;
    case Experiment::track:
        profile_grid();
        app->add_option("--input", o.input, "directory of snapshot files")->required();
        app->add_option("--t0", o.t0, "log-law fit window start");
        app->add_option("--t-end", o.t_end, "log-law fit window end");
        break;
    case Experiment::interaction:
        profile_grid();
        pde_grid();
        app->add_option("--t0", o.t0);
        app->add_option("--t-end", o.t_end);
        app->add_option("--z0", o.z0, "initial separation");
        app->add_option("--sample-every", o.sample_every, "tracking interval");
        app->add_flag("--no-shoot", o.no_shoot, "single run at --shot");
        app->add_option("--shot", o.shot, "speed offset when not shooting");
        break;
    case Experiment::fit:
        app->add_option("--input", o.input, "track CSV")->required();
        app->add_option("--t0", o.t0, "fit window start");
        app->add_option("--t-end", o.t_end, "fit window end");
        break;
    }
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "--config", "cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"gKdV two-soliton experiments"};
    app.require_subcommand(1);
    Overrides overrides;
    std::optional<std::string> config_path;
    bool dry_run = false;
    std::vector<Subcommand> subcommands;
    for (Experiment e : all_experiments()) {
        CLI::App* sub = app.add_subcommand(to_string(e));
        sub->add_option("--config", config_path, "configuration file (key = value lines)");
        sub->add_option("--output", overrides.output, "output directory (overrides OUTPUT_DIR)");
        sub->add_flag("--dry-run", dry_run, "validate and print the planned module calls");
        add_flags(sub, e, overrides);
        subcommands.push_back({e, sub});
    }
    CLI11_PARSE(app, argc, argv);

    Experiment experiment = Experiment::ground_state;
    for (const Subcommand& s : subcommands)
        if (s.app->parsed()) experiment = s.experiment;

    ExperimentConfig config;
    try {
        if (config_path) {
            config = parse_config(read_file(*config_path));
            if (config.experiment != experiment)
                throw ConfigError(0, "experiment", "file is for '" + to_string(config.experiment) + "'");
            if (overrides.p && *overrides.p != config.p) throw ConfigError(0, "p", "--p disagrees with the file");
        } else {
            config = ExperimentConfig::defaults(experiment, overrides.p.value_or(3));
        }
        if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) config.output_dir = env;
        if (overrides.output) config.output_dir = *overrides.output;
        overrides.apply(config);
        cli::validate(config);
    } catch (const ConfigError& error) {
        std::cerr << "configuration error: " << error.what() << '\n';
        return kConfigError;
    }

    const fs::path dir = cli::run_directory(config);
    if (dry_run) {
        std::cout << "run id " << run_id_hex(config) << "\noutput " << dir.string() << "\nplan:\n";
        for (const std::string& step : cli::plan(config)) std::cout << "  - " << step << '\n';
        std::cout << "config:\n" << serialize(config);
        return kPassed;
    }

    const auto start = std::chrono::steady_clock::now();
    cli::RunReport report;
    try {
        report = cli::run_experiment(config, dir);
    } catch (const ConfigError& error) {
        std::cerr << "configuration error: " << error.what() << '\n';
        return kConfigError;
    } catch (const std::exception& error) {
        std::cerr << to_string(experiment) << " failed: " << error.what() << '\n';
        return kRunError;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ofstream(dir / "config.txt") << serialize(config);
    std::ofstream(dir / "summary.json") << cli::summary_json(config, report, seconds).dump(2) << '\n';

    for (const cli::Check& c : report.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value;
        if (c.relation == "band") std::cout << " (target " << c.target << " +- " << c.limit << ")";
        if (c.relation == "<=") std::cout << " (limit " << c.limit << ")";
        std::cout << '\n';
    }
    for (const std::string& note : report.notes) std::cout << "note: " << note << '\n';
    std::cout << "summary " << (dir / "summary.json").string() << '\n';
    return report.passed() ? kPassed : kChecksFailed;
}
