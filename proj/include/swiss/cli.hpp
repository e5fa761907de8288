#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swiss/datasets.hpp"
#include "swiss/experiment_config.hpp"

namespace swiss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Experiment config plus the optional dataset spec and output directory
/// that may share the same file.
struct CliConfig {
  ExperimentConfig experiment;
  std::optional<SyntheticSpec> dataset;
  std::optional<std::string> output_dir;
};

CliConfig cli_config_from_json(const nlohmann::json& j);

/// File-name-safe task label, e.g. "source_to_target".
std::string task_slug(const std::string& source, const std::string& target);

/// Entry point shared by the executable and the tests. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace swiss::cli
