#pragma once

#include <cstddef>
#include <cstdint>

#include "swiss/losses.hpp"
#include "swiss/network.hpp"

namespace swiss {

struct ScheduleConfig {
  double a = 10.0;
  double b = 0.75;
  double eta0_generator = 0.001;
  double eta0_head = 0.01;  // bottleneck and classifier
  double momentum = 0.9;

  LearningRates at(double q) const;
};

struct SourceOnlyConfig {
  std::size_t max_iterations = 1000;
  std::size_t eval_every = 50;
  std::size_t patience = 2;
};

/// Every hyper-parameter of one experiment. network.input_dim and
/// network.num_classes left at 0 are inferred from the source domain.
struct ExperimentConfig {
  NetworkConfig network;
  LossWeights weights;
  std::size_t batch_size = 48;
  std::size_t max_iterations = 1500;
  std::size_t strong_refresh_period = 200;
  ScheduleConfig schedule;
  std::uint64_t seed = 0;
  std::size_t num_runs = 3;
  std::size_t eval_every = 100;
  std::size_t pseudo_pool_cap = 16;
  SourceOnlyConfig source_only;
  std::uint64_t part3_seed_offset = 7919;
  bool peer_replacement = true;

  void validate() const;
  /// Copy with input_dim / num_classes filled in from the data when unset.
  ExperimentConfig resolved(std::size_t input_dim, std::size_t num_classes) const;
};

}  // namespace swiss
