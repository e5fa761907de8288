#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "swiss/core_math.hpp"
#include "swiss/error.hpp"
#include "swiss/rng.hpp"

using namespace swiss;

TEST(Softmax, SymmetricPair) {
  const Vector p = softmax(Vector{1.0, 1.0});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Softmax, LogThree) {
  const Vector p = softmax(Vector{0.0, std::log(3.0)});
  EXPECT_NEAR(p[0], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.75, 1e-15);
}

TEST(Softmax, RandomSumsToOneAndKeepsArgmax) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 50; ++t) {
    const Matrix m = oracle::random_matrix(gen, 1, 5, 3.0);
    const Vector p = softmax(m.row(0));
    double s = 0.0;
    for (double x : p) {
      EXPECT_GT(x, 0.0);
      EXPECT_LE(x, 1.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_EQ(argmax(p), argmax(m.row(0)));
  }
}

TEST(Softmax, ShiftInvariant) {
  const Vector a = softmax(Vector{0.3, -1.2, 2.0});
  const Vector b = softmax(Vector{100.3, 98.8, 102.0});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Softmax, LargeLogitsStayFinite) {
  const Vector p = softmax(Vector{1000.0, 0.0});
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_TRUE(std::isfinite(p[1]));
}

TEST(Softmax, RejectsBadInput) {
  EXPECT_THROW(softmax(Vector{}), InvalidInputError);
  EXPECT_THROW(softmax(Vector{1.0, NAN}), InvalidInputError);
  EXPECT_THROW(softmax(Vector{INFINITY, 0.0}), InvalidInputError);
}

TEST(L2Normalize, ThreeFourFive) {
  const Vector out = l2_normalize(Vector{3.0, 4.0}, 20.0);
  EXPECT_DOUBLE_EQ(out[0], 12.0);
  EXPECT_DOUBLE_EQ(out[1], 16.0);
}

TEST(L2Normalize, AlreadyAtNormIsUnchanged) {
  const Vector v{12.0, 16.0};
  const Vector out = l2_normalize(v, 20.0);
  EXPECT_NEAR(out[0], 12.0, 1e-12);
  EXPECT_NEAR(out[1], 16.0, 1e-12);
}

TEST(L2Normalize, RandomHitsTauAndIsIdempotent) {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 100; ++t) {
    const Matrix m = oracle::random_matrix(gen, 1, 7, 5.0);
    const Vector once = l2_normalize(m.row(0), 20.0);
    EXPECT_NEAR(norm(once), 20.0, 1e-9);
    const Vector twice = l2_normalize(once, 20.0);
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-9);
  }
}

TEST(L2Normalize, ZeroVectorIsDegenerate) {
  EXPECT_THROW(l2_normalize(Vector{0.0, 0.0}, 20.0), DegenerateInputError);
}

TEST(CosineDistance, KnownCases) {
  EXPECT_NEAR(cosine_distance(Vector{1, 2, 3}, Vector{1, 2, 3}), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(cosine_distance(Vector{1, 0}, Vector{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_distance(Vector{1, 0}, Vector{-1, 0}), 2.0);
  EXPECT_THROW(cosine_distance(Vector{0, 0}, Vector{1, 0}), DegenerateInputError);
}

TEST(CosineDistance, SymmetricAndZeroOnPositiveMultiples) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 200; ++t) {
    const Matrix m = oracle::random_matrix(gen, 2, 4);
    EXPECT_EQ(cosine_distance(m.row(0), m.row(1)), cosine_distance(m.row(1), m.row(0)));
    Vector scaled = m.row_vector(0);
    for (double& x : scaled) x *= 3.7;
    EXPECT_NEAR(cosine_distance(m.row(0), scaled), 0.0, 1e-12);
    const double d = cosine_distance(m.row(0), m.row(1));
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0);
  }
}

TEST(Argmax, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax(Vector{0.2, 0.4, 0.4}), 1u);
  EXPECT_EQ(argmax(Vector{1.0, 1.0}), 0u);
}

TEST(FiniteDiff, Quadratic) {
  const auto g = finite_diff_gradient([](const Vector& x) { return x[0] * x[0] + x[1] * x[1]; },
                                      Vector{1.0, 2.0});
  EXPECT_NEAR(g[0], 2.0, 1e-6);
  EXPECT_NEAR(g[1], 4.0, 1e-6);
}

TEST(FiniteDiff, ConstantIsZero) {
  const auto g = finite_diff_gradient([](const Vector&) { return 4.2; }, Vector{1.0, -3.0, 0.5});
  for (double x : g) EXPECT_EQ(x, 0.0);
}

TEST(Matrix, ProductsAgreeWithLoops) {
  std::mt19937_64 gen(9);
  const Matrix a = oracle::random_matrix(gen, 3, 4);
  const Matrix b = oracle::random_matrix(gen, 5, 4);
  const Matrix c = oracle::random_matrix(gen, 3, 2);
  const Matrix abt = matmul_transposed(a, b);
  const Matrix atc = transposed_matmul(a, c);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < 4; ++t) s += a(i, t) * b(j, t);
      EXPECT_NEAR(abt(i, j), s, 1e-12);
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < 3; ++t) s += a(t, i) * c(t, j);
      EXPECT_NEAR(atc(i, j), s, 1e-12);
    }
  }
  EXPECT_THROW(matmul(a, a), InvalidInputError);
}

TEST(Rng, DeterministicAndInRange) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(a.index(7), 7u);
    b.index(7);
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}
