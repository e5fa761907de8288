#include "swiss/experiment_config.hpp"

#include "swiss/error.hpp"

namespace swiss {

LearningRates ScheduleConfig::at(double q) const {
  return {lr_schedule(q, eta0_generator, a, b), lr_schedule(q, eta0_head, a, b)};
}

void ExperimentConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (strong_refresh_period < 1) throw ConfigError("strong_refresh_period must be >= 1");
  if (num_runs < 1) throw ConfigError("num_runs must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (source_only.eval_every < 1) throw ConfigError("source_only.eval_every must be >= 1");
  if (source_only.patience < 1) throw ConfigError("source_only.patience must be >= 1");
  if (!(schedule.eta0_generator > 0.0 && schedule.eta0_head > 0.0)) {
    throw ConfigError("learning rates must be > 0");
  }
  if (!(schedule.momentum >= 0.0 && schedule.momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  try {
    weights.validate();
  } catch (const InvalidInputError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig ExperimentConfig::resolved(std::size_t input_dim, std::size_t num_classes) const {
  ExperimentConfig c = *this;
  if (c.network.input_dim == 0) c.network.input_dim = input_dim;
  if (c.network.num_classes == 0) c.network.num_classes = num_classes;
  if (c.network.input_dim != input_dim) {
    throw ConfigError("network.input_dim " + std::to_string(c.network.input_dim) +
                      " does not match data width " + std::to_string(input_dim));
  }
  if (c.network.num_classes < num_classes) {
    throw ConfigError("network.num_classes is smaller than the number of source classes");
  }
  c.validate();
  c.network.validate();
  return c;
}

}  // namespace swiss
