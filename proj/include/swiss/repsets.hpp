#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "swiss/core_math.hpp"
#include "swiss/losses.hpp"
#include "swiss/rng.hpp"

namespace swiss {

/// Tag for samples that came from the trainer's own target domain.
inline constexpr std::size_t kOwnDomain = static_cast<std::size_t>(-1);

struct StrongEntry {
  Vector input;
  std::size_t source_domain = kOwnDomain;  // peer slot when replaced from a peer
  friend bool operator==(const StrongEntry&, const StrongEntry&) = default;
};

/// One target sample per class, nearest the refined class centroid.
struct StrongSet {
  std::vector<std::optional<StrongEntry>> entries;  // indexed by class

  StrongSet() = default;
  explicit StrongSet(std::size_t num_classes) : entries(num_classes) {}
  bool populated() const;
  std::size_t num_classes() const { return entries.size(); }
  friend bool operator==(const StrongSet&, const StrongSet&) = default;
};

struct WeakEntry {
  Vector input;
  double probability = 0.0;
  friend bool operator==(const WeakEntry&, const WeakEntry&) = default;
};

/// Most recent above-threshold, highest-confidence sample per class.
struct WeakSet {
  std::vector<std::optional<WeakEntry>> entries;

  WeakSet() = default;
  explicit WeakSet(std::size_t num_classes) : entries(num_classes) {}
  friend bool operator==(const WeakSet&, const WeakSet&) = default;
};

/// Per-class pools of confidently predicted samples harvested after training.
struct PseudoStrongSet {
  std::vector<std::vector<Vector>> pools;

  PseudoStrongSet() = default;
  explicit PseudoStrongSet(std::size_t num_classes) : pools(num_classes) {}
  friend bool operator==(const PseudoStrongSet&, const PseudoStrongSet&) = default;
};

struct FusedBatch {
  Matrix inputs;
  Labels pseudo_labels;
  bool empty() const { return pseudo_labels.empty(); }
};

/// c_j = P[:, j]^T V / sum_i P[i, j]. Throws EmptyClassError on a zero column sum.
Matrix compute_centroids(const Matrix& probs, const Matrix& features);

/// Nearest centroid under cosine distance, ties to the lowest class.
Labels assign_pseudo_labels(const Matrix& features, const Matrix& centroids);

/// Two-round centroid self-labeling over every target sample. probs and
/// features come from one forward pass over `inputs`. A class that receives
/// no round-1 assignment falls back to its highest-probability sample.
StrongSet update_strong_set(const Matrix& probs, const Matrix& features, const Matrix& inputs);

/// Replaces, per class, the entry with the batch's most confident sample for
/// that class when that confidence exceeds lambda.
void update_weak_set(WeakSet& set, const Matrix& inputs, const Matrix& probs, double lambda);

/// Keeps up to `cap` samples per class with top probability > lambda,
/// highest probability first.
PseudoStrongSet harvest_pseudo_strong_set(const Matrix& inputs, const Matrix& probs, double lambda,
                                          std::size_t cap);

/// Per-class fused inputs r * strong + (1 - r) * weak with a fresh r in (0, 1)
/// per class. Classes without a weak entry use the strong sample. Returns
/// std::nullopt when the strong set is not populated. `forced_r` pins r for
/// tests.
std::optional<std::vector<std::optional<Vector>>> fuse(const StrongSet& strong,
                                                       const WeakSet& weak, Rng& rng,
                                                       std::optional<double> forced_r = {});

/// One fused sample per predicted label; labels without a fused vector are dropped.
FusedBatch select_sw_batch(const std::vector<std::optional<Vector>>& fused,
                           const Labels& predicted);

}  // namespace swiss
