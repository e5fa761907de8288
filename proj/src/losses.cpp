#include "swiss/losses.hpp"

#include <atomic>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "swiss/error.hpp"

namespace swiss {

void LossWeights::validate() const {
  if (k1 < 0.0 || k2 < 0.0 || k3 < 0.0) throw InvalidInputError("loss weights must be >= 0");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidInputError("lambda must lie in (0, 1]");
}

namespace {

void check_labels(const Matrix& probs, const Labels& labels, const char* who) {
  if (labels.size() != probs.rows()) {
    throw InvalidInputError(std::string(who) + ": label count != batch size");
  }
  for (std::size_t y : labels) {
    if (y >= probs.cols()) throw InvalidInputError(std::string(who) + ": label out of range");
  }
}

double safe_log(double p) { return std::log(std::max(p, kProbClamp)); }

}  // namespace

Matrix softmax_backward(const Matrix& probs, const Matrix& grad_wrt_probs) {
  if (!probs.same_shape(grad_wrt_probs)) throw InvalidInputError("softmax_backward: shape mismatch");
  Matrix out(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    auto p = probs.row(i);
    auto g = grad_wrt_probs.row(i);
    const double inner = dot(p, g);
    auto o = out.row(i);
    for (std::size_t j = 0; j < o.size(); ++j) o[j] = p[j] * (g[j] - inner);
  }
  return out;
}

LossOutput cross_entropy(const Matrix& probs, const Labels& labels) {
  check_labels(probs, labels, "cross_entropy");
  LossOutput out;
  const std::size_t n = probs.rows();
  out.grad_wrt_logits = Matrix(n, probs.cols());
  out.grad_wrt_probs = Matrix(n, probs.cols());
  if (n == 0) return out;
  const double inv_b = 1.0 / static_cast<double>(n);
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = probs(i, labels[i]);
    clamped += p < kProbClamp ? 1 : 0;
    out.value -= safe_log(p) * inv_b;
    out.grad_wrt_probs(i, labels[i]) = -inv_b / std::max(p, kProbClamp);
    // softmax + NLL composite: (p - onehot) / b
    for (std::size_t j = 0; j < probs.cols(); ++j) {
      out.grad_wrt_logits(i, j) = (probs(i, j) - (j == labels[i] ? 1.0 : 0.0)) * inv_b;
    }
  }
  static std::atomic<bool> warned{false};
  if (clamped > 0 && !warned.exchange(true)) {
    std::clog << "warning: cross_entropy clamped " << clamped << " label probabilities at " << kProbClamp
              << " (reported once per process)\n";
  }
  return out;
}

LossOutput info_max_loss(const Matrix& probs) {
  LossOutput out;
  const std::size_t n = probs.rows();
  const std::size_t k = probs.cols();
  out.grad_wrt_logits = Matrix(n, k);
  out.grad_wrt_probs = Matrix(n, k);
  if (n == 0) return out;
  const double inv_b = 1.0 / static_cast<double>(n);

  Vector mean(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) mean[j] += probs(i, j) * inv_b;
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (mean[j] > 0.0) out.value += mean[j] * std::log(mean[j]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double p = probs(i, j);
      if (p > 0.0) out.value -= inv_b * p * std::log(p);
      // d/dp_ij of the two terms: (log pbar_j + 1)/b - (log p_ij + 1)/b
      out.grad_wrt_probs(i, j) = inv_b * (safe_log(mean[j]) - safe_log(p));
    }
  }
  out.grad_wrt_logits = softmax_backward(probs, out.grad_wrt_probs);
  return out;
}

LossOutput adversarial_logit_loss(const Matrix& logits, const Matrix& probs, double lambda) {
  if (!logits.same_shape(probs)) throw InvalidInputError("adversarial_logit_loss: shape mismatch");
  LossOutput out;
  out.reverse_below_classifier = true;
  const std::size_t n = logits.rows();
  out.grad_wrt_logits = Matrix(n, logits.cols());
  if (n == 0) return out;
  const double inv_b = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t top_p = argmax(probs.row(i));
    if (!(probs(i, top_p) > lambda)) continue;
    const std::size_t top_l = argmax(logits.row(i));
    out.value += logits(i, top_l) * inv_b;
    out.grad_wrt_logits(i, top_l) = inv_b;
  }
  return out;
}

LossOutput strong_weak_loss(const Matrix& probs, const Labels& pseudo_labels) {
  LossOutput out;
  if (probs.rows() == 0) return out;
  check_labels(probs, pseudo_labels, "strong_weak_loss");
  const std::size_t n = probs.rows();
  const double inv_b = 1.0 / static_cast<double>(n);
  out.grad_wrt_probs = Matrix(n, probs.cols());
  for (std::size_t i = 0; i < n; ++i) {
    out.value += (1.0 - probs(i, pseudo_labels[i])) * inv_b;
    out.grad_wrt_probs(i, pseudo_labels[i]) = -inv_b;
  }
  out.grad_wrt_logits = softmax_backward(probs, out.grad_wrt_probs);
  return out;
}

double target_composite(const LossOutput& im, const LossOutput& all, const LossOutput& sw,
                        const LossWeights& w) {
  return w.k1 * im.value + w.k2 * all.value + w.k3 * sw.value;
}

}  // namespace swiss
