#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "swiss/core_math.hpp"
#include "swiss/network.hpp"
#include "swiss/repsets.hpp"
#include "swiss/scaffolding.hpp"

namespace swiss {

/// Named tensors plus string metadata, stored as text. Numbers are written
/// as hexadecimal floats, so save/load is bit-exact.
///
///   swiss-checkpoint 1
///   meta <key> <value>
///   tensor <key> <rows> <cols>
///   <row 0 values>
///   ...
///   end
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::map<std::string, Matrix> tensors;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
  std::string to_string() const;
  static Checkpoint parse(const std::string& text);

  const Matrix& tensor(const std::string& key) const;
  const std::string& meta_value(const std::string& key) const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void store_network(Checkpoint& ckpt, const NetworkConfig& config, const NetworkParams& params);
std::pair<NetworkConfig, NetworkParams> load_network(const Checkpoint& ckpt);

void store_repsets(Checkpoint& ckpt, const StrongSet& strong, const WeakSet& weak,
                   const PseudoStrongSet& pseudo);
void load_repsets(const Checkpoint& ckpt, StrongSet& strong, WeakSet& weak, PseudoStrongSet& pseudo);

void store_distance_graph(Checkpoint& ckpt, const DistanceGraph& graph,
                          const std::vector<std::string>& domain_names);
DistanceGraph load_distance_graph(const Checkpoint& ckpt);

}  // namespace swiss
