#include "swiss/network.hpp"

#include <cmath>
#include <string>

#include "swiss/error.hpp"
#include "swiss/rng.hpp"

namespace swiss {

void NetworkConfig::validate() const {
  if (input_dim < 1) throw InvalidInputError("network: input_dim must be >= 1");
  if (bottleneck_dim < 1) throw InvalidInputError("network: bottleneck_dim must be >= 1");
  if (num_classes < 1) throw InvalidInputError("network: num_classes must be >= 1");
  for (std::size_t h : generator_hidden_dims) {
    if (h < 1) throw InvalidInputError("network: hidden dims must be >= 1");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInputError("network: tau must be > 0");
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for_each_array([&](const std::vector<double>& a) { n += a.size(); });
  return n;
}

Vector NetworkParams::flatten() const {
  Vector flat;
  flat.reserve(parameter_count());
  for_each_array([&](const std::vector<double>& a) { flat.insert(flat.end(), a.begin(), a.end()); });
  return flat;
}

void NetworkParams::assign_flat(const Vector& flat) {
  if (flat.size() != parameter_count()) throw InvalidInputError("assign_flat: length mismatch");
  std::size_t offset = 0;
  for_each_array([&](std::vector<double>& a) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
              flat.begin() + static_cast<std::ptrdiff_t>(offset + a.size()), a.begin());
    offset += a.size();
  });
}

bool NetworkParams::same_shape(const NetworkParams& other) const {
  if (generator.size() != other.generator.size()) return false;
  for (std::size_t l = 0; l < generator.size(); ++l) {
    if (!generator[l].weight.same_shape(other.generator[l].weight) ||
        generator[l].bias.size() != other.generator[l].bias.size()) {
      return false;
    }
  }
  return bottleneck.weight.same_shape(other.bottleneck.weight) &&
         bottleneck.bias.size() == other.bottleneck.bias.size() &&
         prototypes.same_shape(other.prototypes);
}

bool NetworkParams::all_finite() const {
  bool ok = true;
  for_each_array([&](const std::vector<double>& a) {
    for (double x : a) ok = ok && std::isfinite(x);
  });
  return ok;
}

Gradients zeros_like(const NetworkParams& params) {
  Gradients g = params;
  g.for_each_array([](std::vector<double>& a) { std::fill(a.begin(), a.end(), 0.0); });
  return g;
}

void accumulate(Gradients& acc, const Gradients& g, double scale) {
  if (!acc.same_shape(g)) throw InvalidInputError("accumulate: gradient shape mismatch");
  std::vector<const std::vector<double>*> src;
  g.for_each_array([&](const std::vector<double>& a) { src.push_back(&a); });
  std::size_t idx = 0;
  acc.for_each_array([&](std::vector<double>& a) {
    const auto& b = *src[idx++];
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
  });
}

namespace {

DenseLayer make_layer(std::size_t in, std::size_t out, Rng& rng) {
  DenseLayer layer{Matrix(out, in), Vector(out, 0.0)};
  const double bound = std::sqrt(3.0 / static_cast<double>(in));
  for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
  return layer;
}

// rows of x times layer weights, plus bias
Matrix affine(const Matrix& x, const DenseLayer& layer) {
  Matrix out = matmul_transposed(x, layer.weight);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += layer.bias[j];
  }
  return out;
}

void affine_backward(const Matrix& input, const Matrix& grad_out, DenseLayer& grad_layer) {
  grad_layer.weight = transposed_matmul(grad_out, input);
  std::fill(grad_layer.bias.begin(), grad_layer.bias.end(), 0.0);
  for (std::size_t i = 0; i < grad_out.rows(); ++i) {
    auto r = grad_out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) grad_layer.bias[j] += r[j];
  }
}

}  // namespace

NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  NetworkParams params;
  std::size_t in = config.input_dim;
  for (std::size_t h : config.generator_hidden_dims) {
    params.generator.push_back(make_layer(in, h, rng));
    in = h;
  }
  params.bottleneck = make_layer(in, config.bottleneck_dim, rng);
  // Prototypes are a bias-free linear map from the d-dim feature.
  DenseLayer cls = make_layer(config.bottleneck_dim, config.num_classes, rng);
  params.prototypes = std::move(cls.weight);
  return params;
}

ForwardResult forward(const NetworkParams& params, const Matrix& inputs, double tau) {
  const std::size_t expected_in =
      params.generator.empty() ? params.bottleneck.weight.cols() : params.generator.front().weight.cols();
  if (inputs.cols() != expected_in) {
    throw InvalidInputError("forward: input width " + std::to_string(inputs.cols()) +
                            " != " + std::to_string(expected_in));
  }
  if (!inputs.all_finite()) throw InvalidInputError("forward: non-finite input");

  ForwardResult fwd;
  fwd.activations.reserve(params.generator.size() + 1);
  fwd.activations.push_back(inputs);
  for (const auto& layer : params.generator) {
    Matrix h = affine(fwd.activations.back(), layer);
    for (double& x : h.data()) x = std::tanh(x);
    fwd.activations.push_back(std::move(h));
  }
  fwd.raw_features = affine(fwd.activations.back(), params.bottleneck);

  const std::size_t n = inputs.rows();
  fwd.raw_norms.resize(n);
  fwd.norm_features = Matrix(n, fwd.raw_features.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const double r = norm(fwd.raw_features.row(i));
    if (r == 0.0) {
      throw DegenerateInputError("forward: zero bottleneck feature at row " + std::to_string(i));
    }
    fwd.raw_norms[i] = r;
    fwd.norm_features.set_row(i, l2_normalize(fwd.raw_features.row(i), tau));
  }
  fwd.logits = matmul_transposed(fwd.norm_features, params.prototypes);
  fwd.probs = softmax_rows(fwd.logits);
  return fwd;
}

Gradients backward(const NetworkParams& params, const ForwardResult& fwd,
                   const Matrix& loss_grad_wrt_logits, bool reverse_below_classifier, double tau) {
  const Matrix& g = loss_grad_wrt_logits;
  if (!g.same_shape(fwd.logits)) {
    throw InvalidInputError("backward: loss gradient shape " + std::to_string(g.rows()) + "x" +
                            std::to_string(g.cols()) + " != logits shape");
  }
  Gradients grads = zeros_like(params);

  grads.prototypes = transposed_matmul(g, fwd.norm_features);
  Matrix d_norm = matmul(g, params.prototypes);
  if (reverse_below_classifier) {
    for (double& x : d_norm.data()) x = -x;
  }

  // v = tau z / |z|  =>  dz = (tau / |z|) (dv - u (u . dv)),  u = v / tau
  Matrix d_raw(d_norm.rows(), d_norm.cols());
  for (std::size_t i = 0; i < d_norm.rows(); ++i) {
    auto v = fwd.norm_features.row(i);
    auto dv = d_norm.row(i);
    const double proj = dot(v, dv) / (tau * tau);
    const double scale = tau / fwd.raw_norms[i];
    auto dz = d_raw.row(i);
    for (std::size_t j = 0; j < dz.size(); ++j) dz[j] = scale * (dv[j] - v[j] * proj);
  }

  affine_backward(fwd.activations.back(), d_raw, grads.bottleneck);
  Matrix d_act = matmul(d_raw, params.bottleneck.weight);

  for (std::size_t l = params.generator.size(); l-- > 0;) {
    const Matrix& h = fwd.activations[l + 1];
    for (std::size_t i = 0; i < d_act.size(); ++i) {
      d_act.data()[i] *= 1.0 - h.data()[i] * h.data()[i];
    }
    affine_backward(fwd.activations[l], d_act, grads.generator[l]);
    if (l > 0) d_act = matmul(d_act, params.generator[l].weight);
  }
  return grads;
}

namespace {

void momentum_update(std::vector<double>& param, const std::vector<double>& grad,
                     std::vector<double>& buffer, double momentum, double lr) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    buffer[i] = momentum * buffer[i] + grad[i];
    param[i] -= lr * buffer[i];
  }
}

}  // namespace

void sgd_step(NetworkParams& params, const Gradients& grads, OptimizerState& state,
              const LearningRates& lr) {
  if (!params.same_shape(grads) || !params.same_shape(state.buffers)) {
    throw InvalidInputError("sgd_step: shape mismatch");
  }
  const double mu = state.momentum;
  for (std::size_t l = 0; l < params.generator.size(); ++l) {
    momentum_update(params.generator[l].weight.data(), grads.generator[l].weight.data(),
                    state.buffers.generator[l].weight.data(), mu, lr.generator);
    momentum_update(params.generator[l].bias, grads.generator[l].bias,
                    state.buffers.generator[l].bias, mu, lr.generator);
  }
  momentum_update(params.bottleneck.weight.data(), grads.bottleneck.weight.data(),
                  state.buffers.bottleneck.weight.data(), mu, lr.head);
  momentum_update(params.bottleneck.bias, grads.bottleneck.bias, state.buffers.bottleneck.bias,
                  mu, lr.head);
  momentum_update(params.prototypes.data(), grads.prototypes.data(),
                  state.buffers.prototypes.data(), mu, lr.head);
  ++state.steps;
}

void sgd_step(NetworkParams& params, const Gradients& grads, OptimizerState& state, double lr) {
  sgd_step(params, grads, state, LearningRates{lr, lr});
}

double lr_schedule(double q, double eta0, double a, double b) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInputError("lr_schedule: q must lie in [0, 1]");
  return eta0 / std::pow(1.0 + a * q, b);
}

}  // namespace swiss
