#include "swiss/config_io.hpp"

#include <fstream>
#include <set>
#include <string>

#include "swiss/error.hpp"

namespace swiss {

using nlohmann::json;

namespace {

// Reads keys from one JSON object and rejects any key it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!it->is_number_unsigned()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError("");
      }
      out = it->template get<T>();
    } catch (const std::exception&) {
      throw ConfigError("invalid value for key '" + qualified(key) + "'");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + qualified(key) + "'");
    }
  }

 private:
  std::string label() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

DomainTransform transform_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  DomainTransform t;
  r.get("name", t.name);
  r.get("rotation_deg", t.rotation_deg);
  std::vector<std::size_t> plane{t.rotation_plane_a, t.rotation_plane_b};
  r.get("rotation_plane", plane);
  if (plane.size() != 2) throw ConfigError("'" + r.qualified("rotation_plane") + "' needs 2 axes");
  t.rotation_plane_a = plane[0];
  t.rotation_plane_b = plane[1];
  r.get("translation", t.translation);
  r.get("noise_scale", t.noise_scale);
  r.get("class_skew", t.class_skew);
  r.get("blend", t.blend);
  r.finish();
  if (t.name.empty()) throw ConfigError("'" + r.qualified("name") + "' is required");
  return t;
}

json transform_to_json(const DomainTransform& t) {
  return json{{"name", t.name},
              {"rotation_deg", t.rotation_deg},
              {"rotation_plane", {t.rotation_plane_a, t.rotation_plane_b}},
              {"translation", t.translation},
              {"noise_scale", t.noise_scale},
              {"class_skew", t.class_skew},
              {"blend", t.blend}};
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  ObjectReader r(j, "");
  if (const json* n = r.child("network")) {
    ObjectReader nr(*n, "network");
    nr.get("input_dim", c.network.input_dim);
    nr.get("generator_hidden_dims", c.network.generator_hidden_dims);
    nr.get("bottleneck_dim", c.network.bottleneck_dim);
    nr.get("num_classes", c.network.num_classes);
    nr.get("tau", c.network.tau);
    nr.finish();
  }
  if (const json* w = r.child("weights")) {
    ObjectReader wr(*w, "weights");
    wr.get("k1", c.weights.k1);
    wr.get("k2", c.weights.k2);
    wr.get("k3", c.weights.k3);
    wr.get("lambda", c.weights.lambda);
    wr.finish();
  }
  if (const json* s = r.child("schedule")) {
    ObjectReader sr(*s, "schedule");
    sr.get("a", c.schedule.a);
    sr.get("b", c.schedule.b);
    sr.get("eta0_generator", c.schedule.eta0_generator);
    sr.get("eta0_head", c.schedule.eta0_head);
    sr.get("momentum", c.schedule.momentum);
    sr.finish();
  }
  if (const json* s = r.child("source_only")) {
    ObjectReader sr(*s, "source_only");
    sr.get("max_iterations", c.source_only.max_iterations);
    sr.get("eval_every", c.source_only.eval_every);
    sr.get("patience", c.source_only.patience);
    sr.finish();
  }
  r.get("batch_size", c.batch_size);
  r.get("max_iterations", c.max_iterations);
  r.get("strong_refresh_period", c.strong_refresh_period);
  r.get("seed", c.seed);
  r.get("num_runs", c.num_runs);
  r.get("eval_every", c.eval_every);
  r.get("pseudo_pool_cap", c.pseudo_pool_cap);
  r.get("part3_seed_offset", c.part3_seed_offset);
  r.get("peer_replacement", c.peer_replacement);
  r.finish();
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  return json{
      {"network",
       {{"input_dim", c.network.input_dim},
        {"generator_hidden_dims", c.network.generator_hidden_dims},
        {"bottleneck_dim", c.network.bottleneck_dim},
        {"num_classes", c.network.num_classes},
        {"tau", c.network.tau}}},
      {"weights", {{"k1", c.weights.k1}, {"k2", c.weights.k2}, {"k3", c.weights.k3}, {"lambda", c.weights.lambda}}},
      {"schedule",
       {{"a", c.schedule.a},
        {"b", c.schedule.b},
        {"eta0_generator", c.schedule.eta0_generator},
        {"eta0_head", c.schedule.eta0_head},
        {"momentum", c.schedule.momentum}}},
      {"source_only",
       {{"max_iterations", c.source_only.max_iterations},
        {"eval_every", c.source_only.eval_every},
        {"patience", c.source_only.patience}}},
      {"batch_size", c.batch_size},
      {"max_iterations", c.max_iterations},
      {"strong_refresh_period", c.strong_refresh_period},
      {"seed", c.seed},
      {"num_runs", c.num_runs},
      {"eval_every", c.eval_every},
      {"pseudo_pool_cap", c.pseudo_pool_cap},
      {"part3_seed_offset", c.part3_seed_offset},
      {"peer_replacement", c.peer_replacement}};
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  SyntheticSpec s;
  ObjectReader r(j, "");
  r.get("num_classes", s.num_classes);
  r.get("input_dim", s.input_dim);
  r.get("samples_per_class", s.samples_per_class);
  r.get("center_radius", s.center_radius);
  r.get("blob_std", s.blob_std);
  r.get("seed", s.seed);
  if (const json* d = r.child("domains")) {
    if (!d->is_array()) throw ConfigError("'domains' must be an array");
    for (std::size_t i = 0; i < d->size(); ++i) {
      s.domains.push_back(transform_from_json((*d)[i], "domains[" + std::to_string(i) + "]"));
    }
  }
  r.finish();
  try {
    s.validate();
  } catch (const InvalidInputError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

json to_json(const SyntheticSpec& s) {
  json domains = json::array();
  for (const auto& t : s.domains) domains.push_back(transform_to_json(t));
  return json{{"num_classes", s.num_classes},   {"input_dim", s.input_dim},
              {"samples_per_class", s.samples_per_class}, {"center_radius", s.center_radius},
              {"blob_std", s.blob_std},         {"seed", s.seed},
              {"domains", domains}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace swiss
