#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "swiss/datasets.hpp"
#include "swiss/error.hpp"
#include "swiss/pipeline.hpp"

using namespace swiss;

namespace {

ExperimentConfig short_config(std::uint64_t seed = 0) {
  ExperimentConfig c;
  c.seed = seed;
  c.max_iterations = 300;
  c.strong_refresh_period = 60;
  c.eval_every = 50;
  c.source_only.max_iterations = 300;
  return c;
}

const std::vector<Domain>& standard_domains() {
  static const std::vector<Domain> d = generate(standard_shift_spec(0));
  return d;
}

}  // namespace

TEST(Evaluate, RandomNetIsNearChance) {
  NetworkConfig nc;
  nc.input_dim = 8;
  nc.num_classes = 4;
  const NetworkParams p = init_params(nc, 1);
  std::mt19937_64 gen(1);
  Domain d;
  d.samples = oracle::random_matrix(gen, 4000, 8);
  d.labels = Labels(4000);
  for (auto& y : *d.labels) y = gen() % 4;
  EXPECT_NEAR(evaluate(p, nc.tau, d), 0.25, 0.1);
}

TEST(Evaluate, PerfectAndEmpty) {
  NetworkConfig nc;
  nc.input_dim = 3;
  nc.num_classes = 3;
  const NetworkParams p = init_params(nc, 2);
  std::mt19937_64 gen(2);
  Domain d;
  d.samples = oracle::random_matrix(gen, 50, 3);
  d.labels = predicted_labels(forward(p, d.samples, nc.tau).probs);
  EXPECT_DOUBLE_EQ(evaluate(p, nc.tau, d), 1.0);
  EXPECT_THROW(evaluate(p, nc.tau, Domain{"e", Matrix(0, 3), Labels{}}), InvalidInputError);
}

TEST(BatchSamplerTest, CyclesThroughEpochs) {
  BatchSampler s(10, 3);
  std::vector<int> seen(10, 0);
  for (int b = 0; b < 5; ++b) {
    for (auto i : s.next(4)) ++seen[i];
  }
  for (int c : seen) EXPECT_EQ(c, 2);
}

TEST(SingleTarget, SwIsZeroUntilFirstRefresh) {
  const auto& d = standard_domains();
  const SingleTargetResult r = train_single_target(short_config(), d[0], d[1]);
  ASSERT_EQ(r.metrics.loss_sw.size(), 300u);
  for (std::size_t i = 0; i < 60; ++i) EXPECT_EQ(r.metrics.loss_sw[i], 0.0) << i;
  double after = 0.0;
  for (std::size_t i = 60; i < 300; ++i) after += r.metrics.loss_sw[i];
  EXPECT_GT(after, 0.0);
  ASSERT_TRUE(r.metrics.final_accuracy);
  EXPECT_EQ(r.metrics.accuracy_series.back().iteration, 300u);
}

TEST(SingleTarget, BitDeterministic) {
  const auto& d = standard_domains();
  const auto a = train_single_target(short_config(4), d[0], d[1]);
  const auto b = train_single_target(short_config(4), d[0], d[1]);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.metrics.loss_all, b.metrics.loss_all);
  EXPECT_EQ(a.pseudo_strong, b.pseudo_strong);
}

TEST(SingleTarget, NoShiftStaysNearBaseline) {
  const auto& d = standard_domains();
  Domain hidden = d[0];
  const ExperimentConfig c = short_config(1);
  const SingleTargetResult r = train_single_target(c, d[0], hidden);
  const double base = evaluate(train_source_baseline(c, d[0]), c.network.tau, d[0]);
  EXPECT_GE(*r.metrics.final_accuracy, base - 0.02);
}

TEST(SingleTarget, UnusedSetsConfigurationRuns) {
  const auto& d = standard_domains();
  ExperimentConfig c = short_config();
  c.weights.k3 = 0.0;
  c.weights.lambda = 1.0;
  const SingleTargetResult r = train_single_target(c, d[0], d[1]);
  EXPECT_TRUE(r.params.all_finite());
  for (double v : r.metrics.loss_all) EXPECT_EQ(v, 0.0);
}

TEST(SingleTarget, UnlabeledTargetHasNoAccuracy) {
  const auto& d = standard_domains();
  Domain t = d[1];
  t.labels.reset();
  ExperimentConfig c = short_config();
  c.max_iterations = 20;
  const SingleTargetResult r = train_single_target(c, d[0], t);
  EXPECT_FALSE(r.metrics.final_accuracy);
  EXPECT_TRUE(r.metrics.accuracy_series.empty());
}

TEST(SingleTarget, MissingSourceClassRejected) {
  const auto& d = standard_domains();
  Domain src = d[0];
  for (auto& y : *src.labels) {
    if (y == 2) y = 1;
  }
  ExperimentConfig c = short_config();
  c.network.num_classes = 6;
  EXPECT_THROW(train_single_target(c, src, d[1]), InvalidDatasetError);
  Domain unlabeled = d[0];
  unlabeled.labels.reset();
  EXPECT_THROW(train_single_target(c, unlabeled, d[1]), InvalidDatasetError);
}

TEST(TargetTrainerTest, DisabledReplacementMatchesSingleStepForStep) {
  const auto& d = standard_domains();
  ExperimentConfig c = short_config(9);
  c.max_iterations = 150;
  c.strong_refresh_period = 40;
  c.peer_replacement = false;
  // graph in which slot 2 qualifies for every class of slot 1
  DistanceGraph g(3, 6);
  for (std::size_t l = 0; l < 6; ++l) {
    g.set(0, 1, l, 0.5, true);
    g.set(0, 2, l, 0.1, true);
    g.set(1, 2, l, 0.2, true);
  }
  std::vector<PseudoStrongSet> pools(3, PseudoStrongSet(6));
  for (auto& pool : pools[2].pools) pool.push_back(Vector(8, 0.5));

  TargetTrainer plain(c, d[0], d[1]);
  TargetTrainer peered(c, d[0], d[1], PeerContext{&g, &pools, 1});
  while (!plain.done()) {
    plain.step();
    peered.step();
    ASSERT_EQ(plain.params(), peered.params()) << plain.iteration();
    ASSERT_EQ(plain.strong_set(), peered.strong_set());
  }

  c.peer_replacement = true;
  TargetTrainer replaced(c, d[0], d[1], PeerContext{&g, &pools, 1});
  while (replaced.iteration() < 40) replaced.step();
  for (const auto& e : replaced.strong_set().entries) {
    ASSERT_TRUE(e);
    EXPECT_EQ(e->source_domain, 2u);
    EXPECT_EQ(e->input, Vector(8, 0.5));
  }
}

TEST(MultiTarget, SingleTargetPart3EqualsOffsetSeedRun) {
  const auto& d = standard_domains();
  ExperimentConfig c = short_config(2);
  c.max_iterations = 120;
  c.strong_refresh_period = 40;
  c.source_only.max_iterations = 100;
  const MultiTargetResult m = train_multi_target(c, d[0], {d[1]});
  ExperimentConfig shifted = c;
  shifted.seed = c.seed + c.part3_seed_offset;
  const SingleTargetResult s = train_single_target(shifted, d[0], d[1]);
  EXPECT_EQ(m.part3[0].params, s.params);
  EXPECT_EQ(m.graph.num_domains(), 2u);
  const SingleTargetResult p1 = train_single_target(c, d[0], d[1]);
  EXPECT_EQ(m.part1[0].params, p1.params);
}

TEST(MultiTarget, IdenticalTargetsGiveNoQualifiers) {
  const auto& d = standard_domains();
  ExperimentConfig c = short_config(3);
  c.max_iterations = 60;
  c.strong_refresh_period = 30;
  c.source_only.max_iterations = 100;
  const MultiTargetResult m = train_multi_target(c, d[0], {d[0], d[0]});
  for (std::size_t l = 0; l < 6; ++l) {
    EXPECT_FALSE(peer_qualifies(m.graph, 1, 2, l));
    EXPECT_FALSE(peer_qualifies(m.graph, 2, 1, l));
  }
}

TEST(MultiTarget, ThreadedMatchesSequential) {
  const auto& d = standard_domains();
  ExperimentConfig c = short_config(6);
  c.max_iterations = 80;
  c.strong_refresh_period = 40;
  c.source_only.max_iterations = 100;
  const Domain mid = generate(standard_shift_spec(0))[1];
  const MultiTargetResult a = train_multi_target(c, d[0], {d[1], mid}, 1);
  const MultiTargetResult b = train_multi_target(c, d[0], {d[1], mid}, 2);
  EXPECT_EQ(a.graph, b.graph);
  for (std::size_t t = 0; t < 2; ++t) EXPECT_EQ(a.part3[t].params, b.part3[t].params);
  EXPECT_THROW(train_multi_target(c, d[0], {}), InvalidInputError);
}

TEST(SingleTarget, AdversarialLogitRisesThenFallsOnSeedAverage) {
  const std::size_t seeds = 5;
  ExperimentConfig c;
  std::vector<double> curve(c.max_iterations, 0.0);
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const auto d = generate(standard_shift_spec(seed));
    c.seed = seed;
    const auto r = train_single_target(c, d[0], d[1]);
    for (std::size_t i = 0; i < curve.size(); ++i) curve[i] += r.metrics.loss_all[i] / double(seeds);
  }
  const auto window_mean = [&](double fraction) {
    const std::size_t end = static_cast<std::size_t>(fraction * double(curve.size()));
    double s = 0.0;
    for (std::size_t i = end - 50; i < end; ++i) s += curve[i];
    return s / 50.0;
  };
  const double early = window_mean(0.1), middle = window_mean(0.4), late = window_mean(1.0);
  EXPECT_GT(middle, early);
  EXPECT_LT(late, middle);
}
