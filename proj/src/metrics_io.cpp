#include "swiss/metrics_io.hpp"

#include <cstdio>
#include <fstream>

#include "swiss/config_io.hpp"
#include "swiss/error.hpp"

namespace swiss {

using nlohmann::json;

json metrics_to_json(const ExperimentConfig& config, const RunInfo& info, const RunMetrics& m) {
  json acc = json::array();
  for (const auto& p : m.accuracy_series) acc.push_back({{"iteration", p.iteration}, {"accuracy", p.accuracy}});
  json doc{{"task", info.task},
           {"method", info.method},
           {"seed", info.seed},
           {"config", to_json(config)},
           {"losses", {{"ce", m.loss_ce}, {"im", m.loss_im}, {"all", m.loss_all}, {"sw", m.loss_sw}}},
           {"accuracy_series", acc}};
  doc["final_accuracy"] = m.final_accuracy ? json(*m.final_accuracy) : json(nullptr);
  return doc;
}

void write_metrics_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(1) << '\n';
}

void write_loss_csv(const std::filesystem::path& path, const RunMetrics& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open '" + path.string() + "' for writing");
  out << "iteration,ce,im,all,sw\n";
  char buf[128];
  for (std::size_t i = 0; i < m.loss_ce.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i + 1, m.loss_ce[i],
                  i < m.loss_im.size() ? m.loss_im[i] : 0.0, i < m.loss_all.size() ? m.loss_all[i] : 0.0,
                  i < m.loss_sw.size() ? m.loss_sw[i] : 0.0);
    out << buf;
  }
}

}  // namespace swiss
