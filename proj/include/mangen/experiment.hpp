#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace mangen {

using Json = nlohmann::ordered_json;

struct ExperimentInfo {
    std::string name;
    std::string description;
    std::string certifies;
};

/// The five experiments in a fixed order.
const std::vector<ExperimentInfo>& list_experiments();
std::string list_experiments_text();

/// Fills defaults and validates. Throws SchemaError listing every offending
/// key (unknown keys, wrong types, out-of-range values).
Json normalize_config(const Json& raw);

/// Default configuration of an experiment.
Json default_config(const std::string& experiment);

struct ExperimentReport {
    /// Keys: experiment, config (normalized echo), metrics, targets, pass, timings.
    /// Only "timings" varies between identical runs.
    Json document;
    bool pass = false;
    std::string output_dir;
    std::vector<std::string> artifacts;
};

struct RunOptions {
    std::optional<std::string> out_dir;  // overrides the environment and the config
    bool write_artifacts = true;
};

/// Output directory: RunOptions::out_dir, else $MANGEN_OUT_DIR, else the
/// config's output_dir, else "out/<experiment>".
std::string resolve_output_dir(const Json& normalized, const RunOptions& options);

ExperimentReport run_experiment(const Json& config, const RunOptions& options = {});
ExperimentReport run_experiment_file(const std::string& path, const RunOptions& options = {});

/// Reads a JSON document; IoError or SchemaError on failure.
Json load_json(const std::string& path);

} // namespace mangen
