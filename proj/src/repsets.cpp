#include "swiss/repsets.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "swiss/error.hpp"

namespace swiss {

bool StrongSet::populated() const {
  return !entries.empty() &&
         std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.has_value(); });
}

Matrix compute_centroids(const Matrix& probs, const Matrix& features) {
  if (probs.rows() != features.rows()) {
    throw InvalidInputError("compute_centroids: probs and features disagree on sample count");
  }
  Matrix centroids = transposed_matmul(probs, features);
  for (std::size_t j = 0; j < probs.cols(); ++j) {
    double mass = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) mass += probs(i, j);
    if (!(mass > 0.0)) throw EmptyClassError(j);
    for (double& c : centroids.row(j)) c /= mass;
  }
  return centroids;
}

Labels assign_pseudo_labels(const Matrix& features, const Matrix& centroids) {
  if (features.cols() != centroids.cols()) {
    throw InvalidInputError("assign_pseudo_labels: feature and centroid dims differ");
  }
  Labels labels(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    if (norm(features.row(i)) == 0.0) {
      throw DegenerateInputError("assign_pseudo_labels: zero feature at row " + std::to_string(i));
    }
    std::size_t best = 0;
    double best_d = cosine_distance(features.row(i), centroids.row(0));
    for (std::size_t j = 1; j < centroids.rows(); ++j) {
      const double d = cosine_distance(features.row(i), centroids.row(j));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    labels[i] = best;
  }
  return labels;
}

StrongSet update_strong_set(const Matrix& probs, const Matrix& features, const Matrix& inputs) {
  const std::size_t n = probs.rows();
  const std::size_t k = probs.cols();
  if (n == 0) throw InvalidInputError("update_strong_set: no target samples");
  if (features.rows() != n || inputs.rows() != n) {
    throw InvalidInputError("update_strong_set: row counts disagree");
  }

  const Matrix initial = compute_centroids(probs, features);
  const Labels labels = assign_pseudo_labels(features, initial);

  StrongSet set(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) count += labels[i] == j ? 1 : 0;

    std::size_t chosen = 0;
    if (count == 0) {
      for (std::size_t i = 1; i < n; ++i) {
        if (probs(i, j) > probs(chosen, j)) chosen = i;
      }
    } else {
      // refined centroid: one-hot weights from the round-1 labels
      Vector centroid(features.cols(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != j) continue;
        auto v = features.row(i);
        for (std::size_t c = 0; c < centroid.size(); ++c) centroid[c] += v[c];
      }
      for (double& c : centroid) c /= static_cast<double>(count);
      double best_d = cosine_distance(features.row(0), centroid);
      for (std::size_t i = 1; i < n; ++i) {
        const double d = cosine_distance(features.row(i), centroid);
        if (d < best_d) {
          best_d = d;
          chosen = i;
        }
      }
    }
    set.entries[j] = StrongEntry{inputs.row_vector(chosen), kOwnDomain};
  }
  return set;
}

void update_weak_set(WeakSet& set, const Matrix& inputs, const Matrix& probs, double lambda) {
  if (inputs.rows() != probs.rows()) throw InvalidInputError("update_weak_set: row mismatch");
  if (set.entries.size() != probs.cols()) set.entries.resize(probs.cols());

  std::vector<std::optional<std::size_t>> best(probs.cols());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const std::size_t cls = argmax(probs.row(i));
    const double p = probs(i, cls);
    if (!(p > lambda)) continue;
    if (!best[cls] || p > probs(*best[cls], cls)) best[cls] = i;
  }
  for (std::size_t j = 0; j < best.size(); ++j) {
    if (best[j]) set.entries[j] = WeakEntry{inputs.row_vector(*best[j]), probs(*best[j], j)};
  }
}

PseudoStrongSet harvest_pseudo_strong_set(const Matrix& inputs, const Matrix& probs, double lambda,
                                          std::size_t cap) {
  if (inputs.rows() != probs.rows()) throw InvalidInputError("harvest: row mismatch");
  std::vector<std::vector<std::pair<double, std::size_t>>> ranked(probs.cols());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const std::size_t cls = argmax(probs.row(i));
    const double p = probs(i, cls);
    if (p > lambda) ranked[cls].emplace_back(p, i);
  }
  PseudoStrongSet set(probs.cols());
  for (std::size_t j = 0; j < ranked.size(); ++j) {
    auto& r = ranked[j];
    // descending probability, stable on sample index
    std::stable_sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (r.size() > cap) r.resize(cap);
    for (const auto& [p, i] : r) set.pools[j].push_back(inputs.row_vector(i));
  }
  return set;
}

std::optional<std::vector<std::optional<Vector>>> fuse(const StrongSet& strong,
                                                       const WeakSet& weak, Rng& rng,
                                                       std::optional<double> forced_r) {
  if (!strong.populated()) return std::nullopt;
  std::vector<std::optional<Vector>> fused(strong.num_classes());
  for (std::size_t j = 0; j < strong.num_classes(); ++j) {
    if (!strong.entries[j]) continue;
    const Vector& st = strong.entries[j]->input;
    const bool has_weak = j < weak.entries.size() && weak.entries[j].has_value();
    if (!has_weak) {
      fused[j] = st;
      continue;
    }
    const Vector& wk = weak.entries[j]->input;
    if (wk.size() != st.size()) throw InvalidInputError("fuse: strong/weak width mismatch");
    const double r = forced_r ? *forced_r : rng.uniform_open();
    Vector x(st.size());
    for (std::size_t c = 0; c < x.size(); ++c) x[c] = r * st[c] + (1.0 - r) * wk[c];
    fused[j] = std::move(x);
  }
  return fused;
}

FusedBatch select_sw_batch(const std::vector<std::optional<Vector>>& fused,
                           const Labels& predicted) {
  FusedBatch batch;
  for (std::size_t y : predicted) {
    if (y >= fused.size() || !fused[y]) continue;
    batch.inputs.append_row(*fused[y]);
    batch.pseudo_labels.push_back(y);
  }
  return batch;
}

}  // namespace swiss
