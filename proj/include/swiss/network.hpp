#pragma once

#include <cstdint>
#include <vector>

#include "swiss/core_math.hpp"

namespace swiss {

/// Generator MLP (tanh) -> linear bottleneck -> L2 normalization to norm tau
/// -> bias-free prototype classifier.
struct NetworkConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> generator_hidden_dims{64};
  std::size_t bottleneck_dim = 32;
  std::size_t num_classes = 0;
  double tau = 20.0;

  void validate() const;
  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct NetworkParams {
  std::vector<DenseLayer> generator;
  DenseLayer bottleneck;
  Matrix prototypes;  // k x d

  /// Visits every parameter array: generator layers, bottleneck, classifier.
  template <typename F>
  void for_each_array(F&& f) {
    visit_arrays(*this, f);
  }
  template <typename F>
  void for_each_array(F&& f) const {
    visit_arrays(*this, f);
  }

  template <typename Self, typename F>
  static void visit_arrays(Self& self, F& f) {
    for (auto& layer : self.generator) {
      f(layer.weight.data());
      f(layer.bias);
    }
    f(self.bottleneck.weight.data());
    f(self.bottleneck.bias);
    f(self.prototypes.data());
  }

  std::size_t parameter_count() const;
  Vector flatten() const;
  void assign_flat(const Vector& flat);
  bool same_shape(const NetworkParams& other) const;
  bool all_finite() const;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Gradients share the shape tree of the parameters they apply to.
using Gradients = NetworkParams;

Gradients zeros_like(const NetworkParams& params);
/// acc += scale * g
void accumulate(Gradients& acc, const Gradients& g, double scale);

struct ForwardResult {
  std::vector<Matrix> activations;  // activations[0] = inputs, then each tanh layer
  Matrix raw_features;              // n x d, bottleneck output
  Vector raw_norms;                 // n, ||raw_features row||
  Matrix norm_features;             // n x d, each row of norm tau
  Matrix logits;                    // n x k
  Matrix probs;                     // n x k
};

NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed);

/// Throws InvalidInputError on a width mismatch and DegenerateInputError
/// when a bottleneck row is exactly zero.
ForwardResult forward(const NetworkParams& params, const Matrix& inputs, double tau);

/// Exact backpropagation from dL/dlogits. With reverse_below_classifier the
/// gradient entering the feature path from the classifier is negated; the
/// classifier's own gradient is untouched.
Gradients backward(const NetworkParams& params, const ForwardResult& fwd,
                   const Matrix& loss_grad_wrt_logits, bool reverse_below_classifier, double tau);

struct LearningRates {
  double generator = 0.0;
  double head = 0.0;  // bottleneck + classifier
};

struct OptimizerState {
  explicit OptimizerState(const NetworkParams& params, double momentum = 0.9)
      : buffers(zeros_like(params)), momentum(momentum) {}

  Gradients buffers;
  double momentum;
  std::uint64_t steps = 0;
};

/// buffer <- momentum * buffer + grad ; param <- param - lr * buffer
void sgd_step(NetworkParams& params, const Gradients& grads, OptimizerState& state,
              const LearningRates& lr);
void sgd_step(NetworkParams& params, const Gradients& grads, OptimizerState& state, double lr);

/// eta0 / (1 + a q)^b for training progress q in [0, 1].
double lr_schedule(double q, double eta0, double a = 10.0, double b = 0.75);

}  // namespace swiss
