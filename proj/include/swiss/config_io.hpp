#pragma once

#include <filesystem>

#include <json.hpp>

#include "swiss/datasets.hpp"
#include "swiss/experiment_config.hpp"

namespace swiss {

/// JSON (de)serialization of configs. Unknown keys raise ConfigError naming
/// the offending key path; missing keys keep their defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticSpec& spec);

/// Reads and parses a JSON file; ConfigError on I/O or syntax problems.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace swiss
