#pragma once

#include <cstddef>
#include <vector>

#include "swiss/core_math.hpp"

namespace swiss {

using Labels = std::vector<std::size_t>;

/// Scalar loss plus its gradient with respect to the logits that produced
/// the probabilities. grad_wrt_probs is filled for losses defined on
/// probabilities; it is empty for the logit-based adversarial loss.
struct LossOutput {
  double value = 0.0;
  Matrix grad_wrt_logits;
  Matrix grad_wrt_probs;
  bool reverse_below_classifier = false;
};

struct LossWeights {
  double k1 = 0.1;   // information maximization
  double k2 = 0.05;  // adversarial logit
  double k3 = 1.0;   // strong-weak
  double lambda = 0.8;

  void validate() const;
};

inline constexpr double kProbClamp = 1e-12;

/// Chain rule through a row-wise softmax: dL/dl_ij = p_ij (g_ij - sum_m p_im g_im).
Matrix softmax_backward(const Matrix& probs, const Matrix& grad_wrt_probs);

/// Mean negative log-likelihood of the labels.
LossOutput cross_entropy(const Matrix& probs, const Labels& labels);

/// Mean conditional entropy minus the entropy of the batch-mean prediction.
LossOutput info_max_loss(const Matrix& probs);

/// Batch mean of each sample's largest logit, counting only samples whose
/// top probability exceeds lambda. Carries the reversal flag: the classifier
/// descends on it while the feature path ascends.
LossOutput adversarial_logit_loss(const Matrix& logits, const Matrix& probs, double lambda);

/// Mean of (1 - p at the pseudo-label). Its derivative in that probability is
/// the constant -1/batch. An empty batch yields value 0 and an empty gradient.
LossOutput strong_weak_loss(const Matrix& probs, const Labels& pseudo_labels);

/// k1 * im + k2 * all + k3 * sw, for reporting. Gradients are applied per
/// component by the trainer.
double target_composite(const LossOutput& im, const LossOutput& all, const LossOutput& sw,
                        const LossWeights& w);

}  // namespace swiss
