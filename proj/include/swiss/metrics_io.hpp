#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "swiss/experiment_config.hpp"
#include "swiss/pipeline.hpp"

namespace swiss {

struct RunInfo {
  std::string task;    // e.g. "source->target"
  std::string method;  // "swiss_single", "swiss_multi", ...
  std::uint64_t seed = 0;
};

/// Config echo, per-iteration losses, accuracy series and final accuracy.
/// Wall-clock time is left out so that equal runs give equal documents.
nlohmann::json metrics_to_json(const ExperimentConfig& config, const RunInfo& info,
                               const RunMetrics& metrics);

void write_metrics_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// iteration,ce,im,all,sw
void write_loss_csv(const std::filesystem::path& path, const RunMetrics& metrics);

}  // namespace swiss
