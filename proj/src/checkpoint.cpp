#include "swiss/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "swiss/error.hpp"

namespace swiss {

namespace {

constexpr const char* kMagic = "swiss-checkpoint 1";

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_number(const std::string& token, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw ParseError("checkpoint line " + std::to_string(line) + ": bad number '" + token + "'");
  }
  return v;
}

Matrix row_matrix(const Vector& v) { return Matrix(1, v.size(), v); }

}  // namespace

std::string Checkpoint::to_string() const {
  std::ostringstream os;
  os << kMagic << '\n';
  for (const auto& [key, value] : meta) os << "meta " << key << ' ' << value << '\n';
  for (const auto& [key, m] : tensors) {
    os << "tensor " << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) os << (c ? " " : "") << hex(m(r, c));
      os << '\n';
    }
  }
  os << "end\n";
  return os.str();
}

Checkpoint Checkpoint::parse(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(is, line) || line != kMagic) throw ParseError("checkpoint: missing header");
  Checkpoint ckpt;
  bool ended = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string kind, key;
    ls >> kind >> key;
    if (kind == "meta") {
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      ckpt.meta[key] = value;
    } else if (kind == "tensor") {
      std::size_t rows = 0, cols = 0;
      if (!(ls >> rows >> cols)) {
        throw ParseError("checkpoint line " + std::to_string(line_no) + ": bad tensor header");
      }
      Matrix m(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        if (!std::getline(is, line)) throw ParseError("checkpoint: truncated tensor '" + key + "'");
        ++line_no;
        std::istringstream rs(line);
        std::string token;
        std::size_t c = 0;
        while (rs >> token) {
          if (c == cols) {
            throw ParseError("checkpoint line " + std::to_string(line_no) + ": too many values");
          }
          m(r, c++) = parse_number(token, line_no);
        }
        if (c != cols) throw ParseError("checkpoint line " + std::to_string(line_no) + ": too few values");
      }
      ckpt.tensors[key] = std::move(m);
    } else {
      throw ParseError("checkpoint line " + std::to_string(line_no) + ": unknown record '" + kind + "'");
    }
  }
  if (!ended) throw ParseError("checkpoint: missing 'end'");
  return ckpt;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open '" + path.string() + "' for writing");
  out << to_string();
  if (!out) throw InvalidInputError("write failed for '" + path.string() + "'");
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Matrix& Checkpoint::tensor(const std::string& key) const {
  auto it = tensors.find(key);
  if (it == tensors.end()) throw ParseError("checkpoint: missing tensor '" + key + "'");
  return it->second;
}

const std::string& Checkpoint::meta_value(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw ParseError("checkpoint: missing meta '" + key + "'");
  return it->second;
}

void store_network(Checkpoint& ckpt, const NetworkConfig& config, const NetworkParams& params) {
  ckpt.meta["network.input_dim"] = std::to_string(config.input_dim);
  std::string hidden;
  for (std::size_t h : config.generator_hidden_dims) hidden += (hidden.empty() ? "" : ",") + std::to_string(h);
  ckpt.meta["network.generator_hidden_dims"] = hidden;
  ckpt.meta["network.bottleneck_dim"] = std::to_string(config.bottleneck_dim);
  ckpt.meta["network.num_classes"] = std::to_string(config.num_classes);
  ckpt.meta["network.tau"] = hex(config.tau);
  for (std::size_t l = 0; l < params.generator.size(); ++l) {
    const std::string p = "generator." + std::to_string(l);
    ckpt.tensors[p + ".weight"] = params.generator[l].weight;
    ckpt.tensors[p + ".bias"] = row_matrix(params.generator[l].bias);
  }
  ckpt.tensors["bottleneck.weight"] = params.bottleneck.weight;
  ckpt.tensors["bottleneck.bias"] = row_matrix(params.bottleneck.bias);
  ckpt.tensors["classifier.prototypes"] = params.prototypes;
}

std::pair<NetworkConfig, NetworkParams> load_network(const Checkpoint& ckpt) {
  NetworkConfig config;
  try {
    config.input_dim = std::stoul(ckpt.meta_value("network.input_dim"));
    config.bottleneck_dim = std::stoul(ckpt.meta_value("network.bottleneck_dim"));
    config.num_classes = std::stoul(ckpt.meta_value("network.num_classes"));
    config.tau = parse_number(ckpt.meta_value("network.tau"), 0);
    config.generator_hidden_dims.clear();
    std::istringstream hs(ckpt.meta_value("network.generator_hidden_dims"));
    std::string tok;
    while (std::getline(hs, tok, ',')) {
      if (!tok.empty()) config.generator_hidden_dims.push_back(std::stoul(tok));
    }
  } catch (const std::logic_error&) {
    throw ParseError("checkpoint: malformed network metadata");
  }

  NetworkParams params;
  for (std::size_t l = 0; l < config.generator_hidden_dims.size(); ++l) {
    const std::string p = "generator." + std::to_string(l);
    params.generator.push_back({ckpt.tensor(p + ".weight"), ckpt.tensor(p + ".bias").data()});
  }
  params.bottleneck = {ckpt.tensor("bottleneck.weight"), ckpt.tensor("bottleneck.bias").data()};
  params.prototypes = ckpt.tensor("classifier.prototypes");

  const NetworkParams expected = init_params(config, 0);
  if (!params.same_shape(expected)) throw ParseError("checkpoint: tensor shapes disagree with metadata");
  return {config, params};
}

void store_repsets(Checkpoint& ckpt, const StrongSet& strong, const WeakSet& weak,
                   const PseudoStrongSet& pseudo) {
  ckpt.meta["repsets.num_classes"] = std::to_string(strong.num_classes());
  for (std::size_t j = 0; j < strong.num_classes(); ++j) {
    const std::string c = std::to_string(j);
    if (const auto& e = strong.entries[j]) {
      ckpt.tensors["strong." + c] = row_matrix(e->input);
      ckpt.meta["strong." + c + ".domain"] =
          e->source_domain == kOwnDomain ? "own" : std::to_string(e->source_domain);
    }
    if (j < weak.entries.size() && weak.entries[j]) {
      ckpt.tensors["weak." + c] = row_matrix(weak.entries[j]->input);
      ckpt.meta["weak." + c + ".probability"] = hex(weak.entries[j]->probability);
    }
    if (j < pseudo.pools.size() && !pseudo.pools[j].empty()) {
      Matrix pool;
      for (const auto& v : pseudo.pools[j]) pool.append_row(v);
      ckpt.tensors["pseudo." + c] = std::move(pool);
    }
  }
}

void load_repsets(const Checkpoint& ckpt, StrongSet& strong, WeakSet& weak, PseudoStrongSet& pseudo) {
  const std::size_t k = std::stoul(ckpt.meta_value("repsets.num_classes"));
  strong = StrongSet(k);
  weak = WeakSet(k);
  pseudo = PseudoStrongSet(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::string c = std::to_string(j);
    if (auto it = ckpt.tensors.find("strong." + c); it != ckpt.tensors.end()) {
      const std::string& tag = ckpt.meta_value("strong." + c + ".domain");
      strong.entries[j] = StrongEntry{it->second.data(), tag == "own" ? kOwnDomain : std::stoul(tag)};
    }
    if (auto it = ckpt.tensors.find("weak." + c); it != ckpt.tensors.end()) {
      weak.entries[j] = WeakEntry{it->second.data(), parse_number(ckpt.meta_value("weak." + c + ".probability"), 0)};
    }
    if (auto it = ckpt.tensors.find("pseudo." + c); it != ckpt.tensors.end()) {
      for (std::size_t r = 0; r < it->second.rows(); ++r) pseudo.pools[j].push_back(it->second.row_vector(r));
    }
  }
}

void store_distance_graph(Checkpoint& ckpt, const DistanceGraph& graph,
                          const std::vector<std::string>& domain_names) {
  ckpt.meta["graph.num_domains"] = std::to_string(graph.num_domains());
  ckpt.meta["graph.num_classes"] = std::to_string(graph.num_classes());
  std::string names;
  for (const auto& n : domain_names) names += (names.empty() ? "" : ",") + n;
  ckpt.meta["graph.domains"] = names;
  for (std::size_t l = 0; l < graph.num_classes(); ++l) {
    Matrix values(graph.num_domains(), graph.num_domains());
    Matrix valid(graph.num_domains(), graph.num_domains());
    for (std::size_t a = 0; a < graph.num_domains(); ++a) {
      for (std::size_t b = 0; b < graph.num_domains(); ++b) {
        values(a, b) = graph.at(a, b, l);
        valid(a, b) = graph.usable(a, b, l) ? 1.0 : 0.0;
      }
    }
    ckpt.tensors["graph.class." + std::to_string(l)] = std::move(values);
    ckpt.tensors["graph.valid." + std::to_string(l)] = std::move(valid);
  }
}

DistanceGraph load_distance_graph(const Checkpoint& ckpt) {
  const std::size_t n = std::stoul(ckpt.meta_value("graph.num_domains"));
  const std::size_t k = std::stoul(ckpt.meta_value("graph.num_classes"));
  DistanceGraph graph(n, k);
  for (std::size_t l = 0; l < k; ++l) {
    const Matrix& values = ckpt.tensor("graph.class." + std::to_string(l));
    const Matrix& valid = ckpt.tensor("graph.valid." + std::to_string(l));
    if (values.rows() != n || values.cols() != n || !valid.same_shape(values)) {
      throw ParseError("checkpoint: distance graph slice has the wrong shape");
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) graph.set(a, b, l, values(a, b), valid(a, b) != 0.0);
    }
  }
  return graph;
}

}  // namespace swiss
