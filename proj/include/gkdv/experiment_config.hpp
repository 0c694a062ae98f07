#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gkdv {

enum class Experiment { ground_state, profiles, residual, ode, shoot, evolve, track, interaction, fit };

std::string to_string(Experiment experiment);
Experiment experiment_from_string(std::string_view name);  // std::invalid_argument on unknown names
const std::vector<Experiment>& all_experiments();

// Everything one run needs. Fields an experiment does not read are still serialized, so the run
// id covers the whole configuration.
struct ExperimentConfig {
    Experiment experiment = Experiment::ground_state;
    int p = 3;

    // Line grid for ground-state quantities and interaction profiles.
    double profile_half_width = 48;
    int profile_n = 8192;
    // Periodic grid for PDE runs; domain [-half_length, half_length).
    double half_length = 512;
    int n = 16384;

    double t0 = 20;
    double t_end = 200;
    double t_in = 1000;
    double dt = 0.005;
    double wrap_limit = 1e-6;

    double z0 = 10;
    double z_from = 8, z_to = 16, z_step = 0.5;

    std::string frame = "renormalized";
    std::string initial = "pair";  // soliton[:..], pair[:..] or a snapshot path, see FORMATS.md
    double snapshots_every = 0;    // 0 writes no snapshots
    double sample_every = 1;       // time-series CSV and tracking cadence

    bool exact_law = false;
    bool shoot = true;
    double shot = 0;

    std::string input;  // track: snapshot directory; fit: track CSV
    std::string output_dir = "gkdv-runs";

    std::map<std::string, double> tolerances;

    // Defaults for one experiment and power, tolerances included.
    static ExperimentConfig defaults(Experiment experiment, int p);
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, std::string field, const std::string& message);
    int line;  // 1-based; 0 when the error is not tied to a line
    std::string field;
};

// "key = value" lines in a fixed order; doubles use the shortest round-trip form.
std::string serialize(const ExperimentConfig& config);
// Unknown keys, malformed values, duplicates and tolerance names the experiment does not declare
// throw ConfigError. Absent keys keep the defaults of the experiment and power named in the text.
ExperimentConfig parse_config(std::string_view text);

// FNV-1a (64 bit) of the serialized configuration without output_dir.
std::uint64_t run_id(const ExperimentConfig& config);
std::string run_id_hex(const ExperimentConfig& config);

}  // namespace gkdv
