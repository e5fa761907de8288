#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "swiss/datasets.hpp"
#include "swiss/experiment_config.hpp"
#include "swiss/network.hpp"
#include "swiss/repsets.hpp"
#include "swiss/rng.hpp"

namespace swiss {

/// Class centroids of one domain under a trained network. Classes whose
/// probability mass vanished are flagged unusable instead of aborting.
struct DomainCentroids {
  Matrix centroids;              // k x d
  std::vector<bool> class_valid; // k
};

/// (N+1) x (N+1) x k cosine distances between per-class centroids. Slot 0 is
/// the source; slots 1..N are the targets.
class DistanceGraph {
 public:
  DistanceGraph() = default;
  DistanceGraph(std::size_t num_domains, std::size_t num_classes);

  std::size_t num_domains() const { return num_domains_; }
  std::size_t num_classes() const { return num_classes_; }

  double at(std::size_t a, std::size_t b, std::size_t cls) const { return values_[index(a, b, cls)]; }
  bool usable(std::size_t a, std::size_t b, std::size_t cls) const { return valid_[index(a, b, cls)] != 0; }
  void set(std::size_t a, std::size_t b, std::size_t cls, double value, bool usable);

  /// (N+1) x (N+1) distances for one class.
  Matrix class_slice(std::size_t cls) const;
  /// Mean over usable classes per domain pair (NaN when none are usable).
  Matrix class_average() const;

  friend bool operator==(const DistanceGraph&, const DistanceGraph&) = default;

 private:
  std::size_t index(std::size_t a, std::size_t b, std::size_t cls) const {
    return (a * num_domains_ + b) * num_classes_ + cls;
  }

  std::size_t num_domains_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<double> values_;
  std::vector<unsigned char> valid_;
};

struct SourceOnlyResult {
  NetworkParams params;
  double best_accuracy = 0.0;
  std::size_t iterations_run = 0;
};

/// Cross-entropy training on the labeled source with early stopping on
/// source accuracy; returns the best-accuracy parameters.
SourceOnlyResult train_source_only(const ExperimentConfig& config, const Domain& source);

DomainCentroids compute_domain_centroids(const NetworkParams& params, double tau,
                                         const Matrix& samples);

DistanceGraph build_distance_graph(const std::vector<DomainCentroids>& centroids);

/// True when target slot j is closer to the source than target slot i for
/// class l, and also closer to i than the source is (both strict).
bool peer_qualifies(const DistanceGraph& graph, std::size_t i, std::size_t j, std::size_t cls);

/// Per class, swaps the own strong sample for a uniformly chosen sample from
/// the union of the qualifying peers' pseudo-strong pools. pseudo_sets is
/// indexed by domain slot; the source and own slots are ignored.
StrongSet replace_with_peers(const StrongSet& own, const std::vector<PseudoStrongSet>& pseudo_sets,
                             const DistanceGraph& graph, std::size_t i, Rng& rng);

/// Plain-text report: one matrix per class and the class-averaged matrix.
std::string distance_graph_report(const DistanceGraph& graph,
                                  const std::vector<std::string>& domain_names);

}  // namespace swiss
