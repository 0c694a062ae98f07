#pragma once

#include "gkdv/experiment_config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace gkdv::cli {

inline constexpr int kSummarySchemaVersion = 1;

// One declared tolerance against its measured value. `relation` is "<=", "band" (|value - target|
// <= limit) or "true" (value is 1 when the property holds).
struct Check {
    std::string name;
    double value = 0;
    double limit = 0;
    double target = 0;
    std::string relation = "<=";
    bool pass = false;
};

struct RunReport {
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    std::vector<Check> checks;
    std::vector<std::string> files;  // relative to the run directory
    std::vector<std::string> notes;

    bool passed() const;
};

// Experiment-specific checks beyond parse_config; throws ConfigError.
void validate(const ExperimentConfig& config);
// Module calls the run would make, in order.
std::vector<std::string> plan(const ExperimentConfig& config);
std::filesystem::path run_directory(const ExperimentConfig& config);

// Runs the experiment and writes its files into `directory` (created if needed).
RunReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& directory);

nlohmann::ordered_json summary_json(const ExperimentConfig& config, const RunReport& report, double seconds);

}  // namespace gkdv::cli
