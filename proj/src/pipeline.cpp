#include "swiss/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <numeric>
#include <thread>

#include "swiss/error.hpp"

namespace swiss {

namespace {

// Independent random streams derived from the experiment seed.
enum Stream : std::uint64_t { kInit = 0, kSourceBatches = 1, kTargetBatches = 2, kFusion = 3, kPeers = 4 };

void require_labeled_source(const Domain& source, std::size_t num_classes) {
  if (!source.labels) throw InvalidDatasetError("source domain '" + source.name + "' is unlabeled");
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t y : *source.labels) {
    if (y >= num_classes) throw InvalidDatasetError("source label out of range");
    ++counts[y];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      throw InvalidDatasetError("class " + std::to_string(c) + " absent from source '" +
                                source.name + "'");
    }
  }
}

ExperimentConfig resolve_for(const ExperimentConfig& config, const Domain& source) {
  source.validate();
  const std::size_t k = config.network.num_classes ? config.network.num_classes : source.num_classes();
  ExperimentConfig c = config.resolved(source.input_dim(), k);
  require_labeled_source(source, c.network.num_classes);
  return c;
}

Labels gather_labels(const Labels& labels, const std::vector<std::size_t>& idx) {
  Labels out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(labels[i]);
  return out;
}

}  // namespace

double evaluate(const NetworkParams& params, double tau, const Domain& domain) {
  if (domain.size() == 0) throw InvalidInputError("evaluate: empty domain '" + domain.name + "'");
  if (!domain.labels) throw InvalidInputError("evaluate: domain '" + domain.name + "' has no labels");
  const ForwardResult fwd = forward(params, domain.samples, tau);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (argmax(fwd.probs.row(i)) == (*domain.labels)[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(domain.size());
}

BatchSampler::BatchSampler(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
  if (n == 0) throw InvalidInputError("BatchSampler: empty domain");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  reshuffle();
}

void BatchSampler::reshuffle() {
  rng_.shuffle(order_.begin(), order_.end());
  cursor_ = 0;
}

std::vector<std::size_t> BatchSampler::next(std::size_t batch_size) {
  std::vector<std::size_t> batch;
  batch.reserve(batch_size);
  while (batch.size() < batch_size) {
    if (cursor_ == order_.size()) reshuffle();
    batch.push_back(order_[cursor_++]);
  }
  return batch;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.set_row(r, m.row(rows[r]));
  return out;
}

Labels predicted_labels(const Matrix& probs) {
  Labels out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) out[i] = argmax(probs.row(i));
  return out;
}

TargetTrainer::TargetTrainer(const ExperimentConfig& config, const Domain& source,
                             const Domain& target, std::optional<PeerContext> peers)
    : config_(resolve_for(config, source)),
      source_(source),
      target_(target),
      peers_(peers),
      params_(init_params(config_.network, derive_seed(config_.seed, kInit))),
      optimizer_(params_, config_.schedule.momentum),
      source_sampler_(source.size(), derive_seed(config_.seed, kSourceBatches)),
      target_sampler_(std::max<std::size_t>(target.size(), 1), derive_seed(config_.seed, kTargetBatches)),
      fusion_rng_(derive_seed(config_.seed, kFusion)),
      peer_rng_(derive_seed(config_.seed, kPeers)),
      strong_(config_.network.num_classes),
      weak_(config_.network.num_classes) {
  if (target.size() == 0) throw InvalidInputError("target domain '" + target.name + "' is empty");
  target.validate();
  if (target.input_dim() != source.input_dim()) {
    throw InvalidInputError("source and target widths differ");
  }
  if (peers_ && (!peers_->graph || !peers_->pseudo_sets)) {
    throw InvalidInputError("peer context is incomplete");
  }
}

void TargetTrainer::step() {
  const double tau = config_.network.tau;
  const auto& w = config_.weights;
  const double q = static_cast<double>(iteration_) / static_cast<double>(config_.max_iterations);
  const LearningRates lr = config_.schedule.at(q);

  // Source step: cross-entropy on a labeled batch.
  {
    const auto idx = source_sampler_.next(config_.batch_size);
    const ForwardResult fwd = forward(params_, gather_rows(source_.samples, idx), tau);
    const LossOutput ce = cross_entropy(fwd.probs, gather_labels(*source_.labels, idx));
    sgd_step(params_, backward(params_, fwd, ce.grad_wrt_logits, false, tau), optimizer_, lr);
    metrics_.loss_ce.push_back(ce.value);
  }

  // Target step: k1 L_IM + k2 L_ALL (reversed below the classifier) + k3 L_SW.
  const auto idx = target_sampler_.next(config_.batch_size);
  const Matrix batch = gather_rows(target_.samples, idx);
  const ForwardResult fwd = forward(params_, batch, tau);
  const LossOutput im = info_max_loss(fwd.probs);
  const LossOutput adv = adversarial_logit_loss(fwd.logits, fwd.probs, w.lambda);

  Gradients grads = zeros_like(params_);
  accumulate(grads, backward(params_, fwd, im.grad_wrt_logits, false, tau), w.k1);
  accumulate(grads, backward(params_, fwd, adv.grad_wrt_logits, adv.reverse_below_classifier, tau), w.k2);

  double sw_value = 0.0;
  if (const auto fused = fuse(strong_, weak_, fusion_rng_)) {
    const FusedBatch sw_batch = select_sw_batch(*fused, predicted_labels(fwd.probs));
    if (!sw_batch.empty()) {
      const ForwardResult sw_fwd = forward(params_, sw_batch.inputs, tau);
      const LossOutput sw = strong_weak_loss(sw_fwd.probs, sw_batch.pseudo_labels);
      accumulate(grads, backward(params_, sw_fwd, sw.grad_wrt_logits, false, tau), w.k3);
      sw_value = sw.value;
    }
  }
  sgd_step(params_, grads, optimizer_, lr);

  metrics_.loss_im.push_back(im.value);
  metrics_.loss_all.push_back(adv.value);
  metrics_.loss_sw.push_back(sw_value);

  update_weak_set(weak_, batch, fwd.probs, w.lambda);

  ++iteration_;
  if (iteration_ % config_.strong_refresh_period == 0) refresh_strong_set();
  if (target_.labels && (iteration_ % config_.eval_every == 0 || done())) {
    metrics_.accuracy_series.push_back({iteration_, evaluate(params_, tau, target_)});
  }
}

void TargetTrainer::refresh_strong_set() {
  const ForwardResult all = forward(params_, target_.samples, config_.network.tau);
  strong_ = update_strong_set(all.probs, all.norm_features, target_.samples);
  if (peers_ && config_.peer_replacement) {
    strong_ = replace_with_peers(strong_, *peers_->pseudo_sets, *peers_->graph, peers_->own_slot,
                                 peer_rng_);
  }
}

SingleTargetResult TargetTrainer::finish() {
  while (!done()) step();
  const double tau = config_.network.tau;
  const ForwardResult all = forward(params_, target_.samples, tau);
  SingleTargetResult result;
  result.pseudo_strong = harvest_pseudo_strong_set(target_.samples, all.probs, config_.weights.lambda,
                                                   config_.pseudo_pool_cap);
  if (target_.labels) {
    metrics_.final_accuracy = metrics_.accuracy_series.empty()
                                  ? evaluate(params_, tau, target_)
                                  : metrics_.accuracy_series.back().accuracy;
  }
  result.params = params_;
  result.metrics = metrics_;
  result.strong = strong_;
  result.weak = weak_;
  return result;
}

SingleTargetResult train_single_target(const ExperimentConfig& config, const Domain& source,
                                       const Domain& target) {
  const auto start = std::chrono::steady_clock::now();
  TargetTrainer trainer(config, source, target);
  SingleTargetResult result = trainer.finish();
  result.metrics.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

NetworkParams train_source_baseline(const ExperimentConfig& raw_config, const Domain& source) {
  const ExperimentConfig config = resolve_for(raw_config, source);
  const double tau = config.network.tau;
  NetworkParams params = init_params(config.network, derive_seed(config.seed, kInit));
  OptimizerState optimizer(params, config.schedule.momentum);
  BatchSampler sampler(source.size(), derive_seed(config.seed, kSourceBatches));
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const double q = static_cast<double>(it) / static_cast<double>(config.max_iterations);
    const auto idx = sampler.next(config.batch_size);
    const ForwardResult fwd = forward(params, gather_rows(source.samples, idx), tau);
    const LossOutput ce = cross_entropy(fwd.probs, gather_labels(*source.labels, idx));
    sgd_step(params, backward(params, fwd, ce.grad_wrt_logits, false, tau), optimizer,
             config.schedule.at(q));
  }
  return params;
}

namespace {

// Runs fn(0..count-1) on up to `jobs` threads; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

MultiTargetResult train_multi_target(const ExperimentConfig& raw_config, const Domain& source,
                                     const std::vector<Domain>& targets, std::size_t jobs) {
  if (targets.empty()) throw InvalidInputError("train_multi_target: no target domains");
  const ExperimentConfig config = resolve_for(raw_config, source);
  const double tau = config.network.tau;
  const std::size_t n = targets.size();
  MultiTargetResult result;

  // Part 1: independent single-target runs harvest pseudo-strong sets.
  result.part1.resize(n);
  parallel_for(n, jobs, [&](std::size_t t) {
    result.part1[t] = train_single_target(config, source, targets[t]);
  });
  std::vector<PseudoStrongSet> pseudo_sets(n + 1);
  for (std::size_t t = 0; t < n; ++t) pseudo_sets[t + 1] = result.part1[t].pseudo_strong;

  // Part 2: source-only network -> class-wise distance graph, frozen.
  result.source_only = train_source_only(config, source);
  result.centroids.push_back(compute_domain_centroids(result.source_only.params, tau, source.samples));
  for (const auto& t : targets) {
    result.centroids.push_back(compute_domain_centroids(result.source_only.params, tau, t.samples));
  }
  result.graph = build_distance_graph(result.centroids);

  // Part 3: fresh re-training with peer replacement after each refresh.
  ExperimentConfig part3 = config;
  part3.seed = config.seed + config.part3_seed_offset;
  result.part3.resize(n);
  parallel_for(n, jobs, [&](std::size_t t) {
    const auto start = std::chrono::steady_clock::now();
    TargetTrainer trainer(part3, source, targets[t], PeerContext{&result.graph, &pseudo_sets, t + 1});
    result.part3[t] = trainer.finish();
    result.part3[t].metrics.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return result;
}

}  // namespace swiss
