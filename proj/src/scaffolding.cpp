#include "swiss/scaffolding.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <sstream>

#include "swiss/error.hpp"
#include "swiss/losses.hpp"
#include "swiss/pipeline.hpp"

namespace swiss {

DistanceGraph::DistanceGraph(std::size_t num_domains, std::size_t num_classes)
    : num_domains_(num_domains),
      num_classes_(num_classes),
      values_(num_domains * num_domains * num_classes, 0.0),
      valid_(num_domains * num_domains * num_classes, 1) {}

void DistanceGraph::set(std::size_t a, std::size_t b, std::size_t cls, double value, bool ok) {
  values_[index(a, b, cls)] = value;
  valid_[index(a, b, cls)] = ok ? 1 : 0;
}

Matrix DistanceGraph::class_slice(std::size_t cls) const {
  Matrix m(num_domains_, num_domains_);
  for (std::size_t a = 0; a < num_domains_; ++a) {
    for (std::size_t b = 0; b < num_domains_; ++b) {
      m(a, b) = usable(a, b, cls) ? at(a, b, cls) : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return m;
}

Matrix DistanceGraph::class_average() const {
  Matrix m(num_domains_, num_domains_);
  for (std::size_t a = 0; a < num_domains_; ++a) {
    for (std::size_t b = 0; b < num_domains_; ++b) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t l = 0; l < num_classes_; ++l) {
        if (!usable(a, b, l)) continue;
        sum += at(a, b, l);
        ++count;
      }
      m(a, b) = count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return m;
}

SourceOnlyResult train_source_only(const ExperimentConfig& raw_config, const Domain& source) {
  if (!source.labels) throw InvalidDatasetError("source domain '" + source.name + "' is unlabeled");
  const std::size_t k = raw_config.network.num_classes ? raw_config.network.num_classes
                                                       : source.num_classes();
  const ExperimentConfig config = raw_config.resolved(source.input_dim(), k);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t y : *source.labels) {
    if (y >= k) throw InvalidDatasetError("source label out of range");
    ++counts[y];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      throw InvalidDatasetError("class " + std::to_string(c) + " absent from source '" +
                                source.name + "'");
    }
  }

  const double tau = config.network.tau;
  const auto& so = config.source_only;
  // Same stream layout as the adaptation trainer: init, then source sampling.
  NetworkParams params = init_params(config.network, derive_seed(config.seed, 0));
  OptimizerState optimizer(params, config.schedule.momentum);
  BatchSampler sampler(source.size(), derive_seed(config.seed, 1));

  SourceOnlyResult result{params, evaluate(params, tau, source), 0};
  std::size_t drops = 0;
  for (std::size_t it = 0; it < so.max_iterations; ++it) {
    const double q = static_cast<double>(it) / static_cast<double>(so.max_iterations);
    const auto idx = sampler.next(config.batch_size);
    Labels y;
    y.reserve(idx.size());
    for (std::size_t i : idx) y.push_back((*source.labels)[i]);
    const ForwardResult fwd = forward(params, gather_rows(source.samples, idx), tau);
    const LossOutput ce = cross_entropy(fwd.probs, y);
    sgd_step(params, backward(params, fwd, ce.grad_wrt_logits, false, tau), optimizer,
             config.schedule.at(q));
    result.iterations_run = it + 1;

    if ((it + 1) % so.eval_every != 0) continue;
    const double acc = evaluate(params, tau, source);
    if (acc > result.best_accuracy) {
      result.best_accuracy = acc;
      result.params = params;
      drops = 0;
    } else if (acc < result.best_accuracy) {
      if (++drops >= so.patience) break;
    } else {
      drops = 0;
    }
  }
  return result;
}

DomainCentroids compute_domain_centroids(const NetworkParams& params, double tau,
                                         const Matrix& samples) {
  if (samples.rows() == 0) throw InvalidInputError("compute_domain_centroids: empty domain");
  const ForwardResult fwd = forward(params, samples, tau);
  const std::size_t k = fwd.probs.cols();
  DomainCentroids out{Matrix(k, fwd.norm_features.cols()), std::vector<bool>(k, true)};
  const Matrix weighted = transposed_matmul(fwd.probs, fwd.norm_features);
  for (std::size_t j = 0; j < k; ++j) {
    double mass = 0.0;
    for (std::size_t i = 0; i < fwd.probs.rows(); ++i) mass += fwd.probs(i, j);
    if (!(mass > 0.0)) {
      std::clog << "warning: " << EmptyClassError(j).what() << "; class marked unusable\n";
      out.class_valid[j] = false;
      continue;
    }
    for (std::size_t c = 0; c < weighted.cols(); ++c) out.centroids(j, c) = weighted(j, c) / mass;
  }
  return out;
}

DistanceGraph build_distance_graph(const std::vector<DomainCentroids>& centroids) {
  if (centroids.size() < 2) throw InvalidInputError("build_distance_graph: need >= 2 domains");
  const std::size_t k = centroids.front().centroids.rows();
  for (const auto& c : centroids) {
    if (!c.centroids.same_shape(centroids.front().centroids) || c.class_valid.size() != k) {
      throw InvalidInputError("build_distance_graph: centroid shapes differ across domains");
    }
  }
  const std::size_t n = centroids.size();
  DistanceGraph graph(n, k);
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t a = 0; a < n; ++a) {
      const bool a_ok = centroids[a].class_valid[l] && norm(centroids[a].centroids.row(l)) > 0.0;
      graph.set(a, a, l, 0.0, a_ok);
      for (std::size_t b = a + 1; b < n; ++b) {
        const bool b_ok = centroids[b].class_valid[l] && norm(centroids[b].centroids.row(l)) > 0.0;
        double d = 0.0;
        if (a_ok && b_ok) d = cosine_distance(centroids[a].centroids.row(l), centroids[b].centroids.row(l));
        graph.set(a, b, l, d, a_ok && b_ok);
        graph.set(b, a, l, d, a_ok && b_ok);
      }
    }
  }
  return graph;
}

bool peer_qualifies(const DistanceGraph& graph, std::size_t i, std::size_t j, std::size_t cls) {
  if (i == j) throw InvalidInputError("peer_qualifies: a domain cannot be its own peer");
  if (i == 0 || j == 0 || i >= graph.num_domains() || j >= graph.num_domains()) {
    throw InvalidInputError("peer_qualifies: target slots must lie in [1, N]");
  }
  if (cls >= graph.num_classes()) throw InvalidInputError("peer_qualifies: class out of range");
  if (!graph.usable(0, i, cls) || !graph.usable(0, j, cls) || !graph.usable(i, j, cls)) {
    std::clog << "note: peer " << j << " for target " << i << " class " << cls
              << " skipped: distance entry unusable\n";
    return false;
  }
  const double own = graph.at(0, i, cls);
  const bool closer_to_source = graph.at(0, j, cls) < own;
  const bool in_between = graph.at(i, j, cls) < own;
  return closer_to_source && in_between;
}

StrongSet replace_with_peers(const StrongSet& own, const std::vector<PseudoStrongSet>& pseudo_sets,
                             const DistanceGraph& graph, std::size_t i, Rng& rng) {
  StrongSet out = own;
  for (std::size_t l = 0; l < own.num_classes(); ++l) {
    std::vector<std::pair<std::size_t, const Vector*>> candidates;
    for (std::size_t j = 1; j < pseudo_sets.size() && j < graph.num_domains(); ++j) {
      if (j == i || l >= pseudo_sets[j].pools.size() || pseudo_sets[j].pools[l].empty()) continue;
      if (!peer_qualifies(graph, i, j, l)) continue;
      for (const auto& v : pseudo_sets[j].pools[l]) candidates.emplace_back(j, &v);
    }
    if (candidates.empty()) continue;
    const auto& [slot, sample] = candidates[rng.index(candidates.size())];
    out.entries[l] = StrongEntry{*sample, slot};
  }
  return out;
}

namespace {

void write_matrix(std::ostringstream& os, const Matrix& m, const std::vector<std::string>& names) {
  char buf[32];
  os << std::string(12, ' ');
  for (const auto& n : names) {
    std::snprintf(buf, sizeof buf, " %12.12s", n.c_str());
    os << buf;
  }
  os << '\n';
  for (std::size_t a = 0; a < m.rows(); ++a) {
    std::snprintf(buf, sizeof buf, "%-12.12s", names[a].c_str());
    os << buf;
    for (std::size_t b = 0; b < m.cols(); ++b) {
      if (std::isnan(m(a, b))) {
        os << "          nan";
      } else {
        std::snprintf(buf, sizeof buf, " %12.6f", m(a, b));
        os << buf;
      }
    }
    os << '\n';
  }
}

}  // namespace

std::string distance_graph_report(const DistanceGraph& graph,
                                  const std::vector<std::string>& domain_names) {
  std::vector<std::string> names = domain_names;
  for (std::size_t a = names.size(); a < graph.num_domains(); ++a) names.push_back("domain" + std::to_string(a));
  std::ostringstream os;
  os << "# class-wise cosine distance between domain centroids\n";
  os << "domains " << graph.num_domains() << "\nclasses " << graph.num_classes() << "\n";
  for (std::size_t l = 0; l < graph.num_classes(); ++l) {
    os << "\n[class " << l << "]\n";
    write_matrix(os, graph.class_slice(l), names);
  }
  os << "\n[average]\n";
  write_matrix(os, graph.class_average(), names);
  return os.str();
}

}  // namespace swiss
