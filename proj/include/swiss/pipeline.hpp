#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "swiss/datasets.hpp"
#include "swiss/experiment_config.hpp"
#include "swiss/losses.hpp"
#include "swiss/network.hpp"
#include "swiss/repsets.hpp"
#include "swiss/rng.hpp"
#include "swiss/scaffolding.hpp"

namespace swiss {

struct AccuracyPoint {
  std::size_t iteration = 0;
  double accuracy = 0.0;
  friend bool operator==(const AccuracyPoint&, const AccuracyPoint&) = default;
};

struct RunMetrics {
  std::vector<double> loss_ce;
  std::vector<double> loss_im;
  std::vector<double> loss_all;
  std::vector<double> loss_sw;
  std::vector<AccuracyPoint> accuracy_series;  // only when target labels are known
  std::optional<double> final_accuracy;
  double wall_clock_seconds = 0.0;
};

/// Fraction of samples whose top prediction matches the label.
/// Throws InvalidInputError for an empty or unlabeled domain.
double evaluate(const NetworkParams& params, double tau, const Domain& domain);

/// Shuffled epoch cycling over [0, n).
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::uint64_t seed);
  std::vector<std::size_t> next(std::size_t batch_size);

 private:
  void reshuffle();

  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows);
Labels predicted_labels(const Matrix& probs);

/// Peer information used by the multi-target re-training stage.
struct PeerContext {
  const DistanceGraph* graph = nullptr;
  const std::vector<PseudoStrongSet>* pseudo_sets = nullptr;  // indexed by domain slot
  std::size_t own_slot = 0;
};

struct SingleTargetResult {
  NetworkParams params;
  RunMetrics metrics;
  PseudoStrongSet pseudo_strong;
  StrongSet strong;
  WeakSet weak;
};

/// The single-target training loop, one iteration per step(). Exposed as a
/// class so that callers can inspect state between iterations.
class TargetTrainer {
 public:
  /// source must be labeled; target labels, if present, are only used for
  /// the accuracy series.
  TargetTrainer(const ExperimentConfig& config, const Domain& source, const Domain& target,
                std::optional<PeerContext> peers = std::nullopt);

  void step();
  bool done() const { return iteration_ >= config_.max_iterations; }
  std::size_t iteration() const { return iteration_; }
  const NetworkParams& params() const { return params_; }
  const StrongSet& strong_set() const { return strong_; }
  const WeakSet& weak_set() const { return weak_; }
  const RunMetrics& metrics() const { return metrics_; }
  const ExperimentConfig& config() const { return config_; }

  SingleTargetResult finish();

 private:
  void refresh_strong_set();

  ExperimentConfig config_;
  const Domain& source_;
  const Domain& target_;
  std::optional<PeerContext> peers_;

  NetworkParams params_;
  OptimizerState optimizer_;
  BatchSampler source_sampler_;
  BatchSampler target_sampler_;
  Rng fusion_rng_;
  Rng peer_rng_;

  StrongSet strong_;
  WeakSet weak_;
  RunMetrics metrics_;
  std::size_t iteration_ = 0;
};

SingleTargetResult train_single_target(const ExperimentConfig& config, const Domain& source,
                                       const Domain& target);

/// Cross-entropy-only training for max_iterations with the same schedule and
/// seeds as the adaptation trainer; the no-adaptation baseline.
NetworkParams train_source_baseline(const ExperimentConfig& config, const Domain& source);

struct MultiTargetResult {
  std::vector<SingleTargetResult> part1;  // per target
  SourceOnlyResult source_only;
  std::vector<DomainCentroids> centroids;  // slot 0 = source
  DistanceGraph graph;
  std::vector<SingleTargetResult> part3;   // per target
};

/// Peer-scaffolded multi-target adaptation: per-target single-target runs
/// harvest pseudo-strong sets, a source-only network yields the class-wise
/// distance graph, then every target is re-trained with peer replacement
/// after each strong-set refresh. `jobs` bounds per-target concurrency.
MultiTargetResult train_multi_target(const ExperimentConfig& config, const Domain& source,
                                     const std::vector<Domain>& targets, std::size_t jobs = 1);

}  // namespace swiss
