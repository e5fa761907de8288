#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "swiss/error.hpp"
#include "swiss/network.hpp"

using namespace swiss;

namespace {

NetworkConfig small_config() {
  NetworkConfig c;
  c.input_dim = 4;
  c.generator_hidden_dims = {8};
  c.bottleneck_dim = 6;
  c.num_classes = 3;
  return c;
}

}  // namespace

TEST(InitParams, SameSeedIsBitIdentical) {
  EXPECT_EQ(init_params(small_config(), 7), init_params(small_config(), 7));
  EXPECT_NE(init_params(small_config(), 7), init_params(small_config(), 8));
}

TEST(InitParams, FanIn100Bound) {
  NetworkConfig c = small_config();
  c.input_dim = 100;
  const NetworkParams p = init_params(c, 1);
  const double bound = 0.1 * std::sqrt(3.0);
  double widest = 0.0;
  for (double w : p.generator[0].weight.data()) widest = std::max(widest, std::abs(w));
  EXPECT_LE(widest, bound);
  EXPECT_GT(widest, 0.9 * bound);
}

TEST(InitParams, RejectsBadConfig) {
  NetworkConfig c = small_config();
  c.tau = 0.0;
  EXPECT_THROW(init_params(c, 0), InvalidInputError);
  c = small_config();
  c.bottleneck_dim = 0;
  EXPECT_THROW(init_params(c, 0), InvalidInputError);
}

TEST(Forward, InvariantsHold) {
  const NetworkConfig c = small_config();
  const NetworkParams p = init_params(c, 3);
  std::mt19937_64 gen(3);
  const Matrix x = oracle::random_matrix(gen, 10, 4);
  const ForwardResult f = forward(p, x, c.tau);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(norm(f.norm_features.row(i)), c.tau, 1e-9);
    double s = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      s += f.probs(i, j);
      EXPECT_NEAR(f.logits(i, j), dot(f.norm_features.row(i), p.prototypes.row(j)), 1e-12);
      EXPECT_LE(std::abs(f.logits(i, j)), c.tau * norm(p.prototypes.row(j)) + 1e-12);
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  const ForwardResult again = forward(p, x, c.tau);
  EXPECT_EQ(f.logits, again.logits);
}

TEST(Forward, ScalingAPrototypeScalesItsLogits) {
  const NetworkConfig c = small_config();
  NetworkParams p = init_params(c, 4);
  std::mt19937_64 gen(4);
  const Matrix x = oracle::random_matrix(gen, 6, 4);
  const ForwardResult before = forward(p, x, c.tau);
  for (double& w : p.prototypes.row(1)) w *= 2.5;
  const ForwardResult after = forward(p, x, c.tau);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(after.logits(i, 1), 2.5 * before.logits(i, 1), 1e-12);
    EXPECT_EQ(after.logits(i, 0), before.logits(i, 0));
  }
}

TEST(Forward, HandComputedTinyNet) {
  NetworkConfig c;
  c.input_dim = 1;
  c.generator_hidden_dims = {1};
  c.bottleneck_dim = 2;
  c.num_classes = 2;
  c.tau = 20.0;
  NetworkParams p = init_params(c, 0);
  p.generator[0].weight = Matrix{{0.5}};
  p.generator[0].bias = {0.1};
  p.bottleneck.weight = Matrix{{2.0}, {-1.0}};
  p.bottleneck.bias = {0.0, 0.5};
  p.prototypes = Matrix{{1.0, 0.0}, {0.3, 0.4}};

  const double h = std::tanh(0.5 * 2.0 + 0.1);
  const double z0 = 2.0 * h, z1 = -h + 0.5;
  const double r = std::sqrt(z0 * z0 + z1 * z1);
  const double n0 = 20.0 * z0 / r, n1 = 20.0 * z1 / r;
  const ForwardResult f = forward(p, Matrix{{2.0}}, 20.0);
  EXPECT_NEAR(f.logits(0, 0), n0, 1e-12);
  EXPECT_NEAR(f.logits(0, 1), 0.3 * n0 + 0.4 * n1, 1e-12);
}

TEST(Forward, ZeroRawFeatureIsDegenerate) {
  NetworkConfig c;
  c.input_dim = 1;
  c.generator_hidden_dims = {1};
  c.bottleneck_dim = 2;
  c.num_classes = 2;
  NetworkParams p = init_params(c, 0);
  p.bottleneck.weight = Matrix(2, 1, 0.0);
  p.bottleneck.bias = {0.0, 0.0};
  EXPECT_THROW(forward(p, Matrix{{1.0}}, 20.0), DegenerateInputError);
  EXPECT_THROW(forward(p, Matrix{{1.0, 2.0}}, 20.0), InvalidInputError);
}

TEST(Backward, CrossEntropyMatchesFiniteDifferencesOnTwoClassNet) {
  NetworkConfig c;
  c.input_dim = 3;
  c.generator_hidden_dims = {4};
  c.bottleneck_dim = 3;
  c.num_classes = 2;
  const NetworkParams p = init_params(c, 12);
  const Matrix x{{0.3, -0.7, 1.1}, {1.5, 0.2, -0.4}};
  const Labels y{0, 1};
  const ForwardResult f = forward(p, x, c.tau);
  const Vector analytic = backward(p, f, cross_entropy(f.probs, y).grad_wrt_logits, false, c.tau).flatten();
  // one classifier weight, one generator weight
  for (std::size_t idx : {p.parameter_count() - 1, std::size_t{0}}) {
    const auto loss_at = [&](const Vector& w) {
      Vector flat = p.flatten();
      flat[idx] = w[0];
      NetworkParams q = p;
      q.assign_flat(flat);
      return cross_entropy(forward(q, x, c.tau).probs, y).value;
    };
    const Vector num = finite_diff_gradient(loss_at, Vector{p.flatten()[idx]});
    EXPECT_TRUE(oracle::grad_close(analytic[idx], num[0])) << analytic[idx] << " vs " << num[0];
  }
}

class BackwardPerLoss : public ::testing::TestWithParam<oracle::LossKind> {};

TEST_P(BackwardPerLoss, MatchesFiniteDifferencesOverFiveSeeds) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = oracle::check_network_gradient(GetParam(), seed);
    EXPECT_EQ(r.failed, 0u) << oracle::loss_name(GetParam()) << " seed " << seed
                            << " worst rel " << r.worst_rel;
    EXPECT_GT(r.checked, 100u);
  }
}

INSTANTIATE_TEST_SUITE_P(AllLosses, BackwardPerLoss,
                         ::testing::Values(oracle::LossKind::CrossEntropy, oracle::LossKind::InfoMax,
                                           oracle::LossKind::AdversarialLogit,
                                           oracle::LossKind::StrongWeak));

TEST(Backward, ReversalFlipsOnlyTheFeaturePath) {
  const NetworkConfig c = small_config();
  const NetworkParams p = init_params(c, 21);
  std::mt19937_64 gen(21);
  const ForwardResult f = forward(p, oracle::random_matrix(gen, 7, 4), c.tau);
  const Matrix g = oracle::random_matrix(gen, 7, 3);
  const Gradients plain = backward(p, f, g, false, c.tau);
  const Gradients reversed = backward(p, f, g, true, c.tau);
  EXPECT_EQ(reversed.prototypes, plain.prototypes);
  for (std::size_t l = 0; l < plain.generator.size(); ++l) {
    for (std::size_t i = 0; i < plain.generator[l].weight.size(); ++i) {
      EXPECT_EQ(reversed.generator[l].weight.data()[i], -plain.generator[l].weight.data()[i]);
    }
  }
  for (std::size_t i = 0; i < plain.bottleneck.bias.size(); ++i) {
    EXPECT_EQ(reversed.bottleneck.bias[i], -plain.bottleneck.bias[i]);
  }
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  const NetworkConfig c = small_config();
  const NetworkParams p = init_params(c, 2);
  std::mt19937_64 gen(2);
  const ForwardResult f = forward(p, oracle::random_matrix(gen, 3, 4), c.tau);
  const Gradients g = backward(p, f, Matrix(3, 3, 0.0), false, c.tau);
  for (double x : g.flatten()) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(backward(p, f, Matrix(2, 3, 0.0), false, c.tau), InvalidInputError);
}

TEST(Sgd, MomentumRecurrence) {
  NetworkConfig c;
  c.input_dim = 1;
  c.generator_hidden_dims = {1};
  c.bottleneck_dim = 1;
  c.num_classes = 1;
  NetworkParams p = init_params(c, 0);
  const NetworkParams start = p;
  OptimizerState state(p);

  sgd_step(p, zeros_like(p), state, 0.1);
  EXPECT_EQ(p, start);

  Gradients ones = zeros_like(p);
  ones.prototypes(0, 0) = 1.0;
  sgd_step(p, ones, state, 0.1);
  EXPECT_NEAR(start.prototypes(0, 0) - p.prototypes(0, 0), 0.1, 1e-15);
  sgd_step(p, ones, state, 0.1);
  EXPECT_NEAR(start.prototypes(0, 0) - p.prototypes(0, 0), 0.29, 1e-15);
}

TEST(Sgd, GroupsUseTheirOwnRate) {
  const NetworkConfig c = small_config();
  NetworkParams p = init_params(c, 0);
  const NetworkParams start = p;
  OptimizerState state(p);
  Gradients g = zeros_like(p);
  g.generator[0].bias[0] = 1.0;
  g.bottleneck.bias[0] = 1.0;
  sgd_step(p, g, state, LearningRates{0.001, 0.01});
  EXPECT_NEAR(start.generator[0].bias[0] - p.generator[0].bias[0], 0.001, 1e-15);
  EXPECT_NEAR(start.bottleneck.bias[0] - p.bottleneck.bias[0], 0.01, 1e-15);
}

TEST(LrSchedule, KnownValues) {
  EXPECT_DOUBLE_EQ(lr_schedule(0.0, 0.01), 0.01);
  // 0.01 / 11^0.75 evaluated at 30 digits
  EXPECT_NEAR(lr_schedule(1.0, 0.01, 10.0, 0.75), 0.00165560026076170172586, 1e-18);
  EXPECT_NEAR(lr_schedule(1.0, 0.01), 0.01 / std::pow(11.0, 0.75), 1e-18);
  double prev = lr_schedule(0.0, 0.01);
  for (int i = 1; i <= 100; ++i) {
    const double cur = lr_schedule(i / 100.0, 0.01);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
  EXPECT_THROW(lr_schedule(-0.01, 0.01), InvalidInputError);
  EXPECT_THROW(lr_schedule(1.01, 0.01), InvalidInputError);
}

TEST(Params, FlattenRoundTrip) {
  const NetworkParams p = init_params(small_config(), 5);
  NetworkParams q = init_params(small_config(), 6);
  q.assign_flat(p.flatten());
  EXPECT_EQ(p, q);
  EXPECT_EQ(p.parameter_count(), 4u * 8 + 8 + 8 * 6 + 6 + 6 * 3);
}
