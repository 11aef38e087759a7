#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "memedial/error.hpp"
#include "memedial/vector.hpp"
#include "oracles.hpp"

using namespace memedial;

TEST(Vector, RejectsNonFiniteComponents) {
  EXPECT_THROW(Vector({1.0, std::numeric_limits<double>::quiet_NaN()}), ValidationError);
  EXPECT_THROW(Vector({std::numeric_limits<double>::infinity()}), ValidationError);
}

TEST(Cosine, IdenticalOrthogonalOpposite) {
  EXPECT_DOUBLE_EQ(cosine_similarity({1, 2, 3}, {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity({1, 0}, {0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity({1, 2}, {-1, -2}), -1.0);
}

TEST(Cosine, DimensionMismatchAndZeroVector) {
  EXPECT_THROW(cosine_similarity({1, 2}, {1, 2, 3}), DimensionError);
  EXPECT_THROW(cosine_similarity({0, 0}, {1, 2}), ValidationError);
}

TEST(Cosine, MatchesScalarLoopOracle) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(64), b(64);
    for (auto& x : a) x = n(gen);
    for (auto& x : b) x = n(gen);
    EXPECT_NEAR(cosine_similarity(Vector(a), Vector(b)), oracle::cosine(a, b), 1e-12);
  }
}

TEST(Cosine, SymmetricExactly) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = oracle::random_unit(gen, 33);
    const auto b = oracle::random_unit(gen, 33);
    EXPECT_EQ(cosine_similarity(a, b), cosine_similarity(b, a));
  }
}

TEST(Cosine, ScaleInvariant) {
  std::mt19937_64 gen(9);
  const auto a = oracle::random_unit(gen, 50);
  const auto b = oracle::random_unit(gen, 50);
  for (double s : {0.5, 2.0, 10.0, 1e-3}) {
    EXPECT_NEAR(cosine_similarity(scale(a, s), b), cosine_similarity(a, b), 1e-12);
    EXPECT_NEAR(cosine_similarity(a, scale(a, s)), 1.0, 1e-12);
  }
}

TEST(Cosine, ClampedToUnitInterval) {
  // Nearly parallel vectors whose rounded cosine can drift past 1.
  const Vector a{0.1, 0.2, 0.3};
  const Vector b{0.1 * 3, 0.2 * 3, 0.3 * 3};
  const double c = cosine_similarity(a, b);
  EXPECT_LE(c, 1.0);
  EXPECT_GE(c, -1.0);
}

TEST(Normalize, UnitNormAndZeroRejected) {
  EXPECT_NEAR(l2_norm(l2_normalize({3, 4})), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(l2_normalize({3, 4})[0], 0.6);
  EXPECT_THROW(l2_normalize({0, 0, 0}), ValidationError);
}

TEST(StoragePrecision, RoundsToFloatAndIsIdempotent) {
  const Vector v{0.1, 1.0 / 3.0};
  const Vector s = to_storage_precision(v);
  EXPECT_EQ(s[0], static_cast<double>(0.1f));
  EXPECT_EQ(to_storage_precision(s), s);
  const Vector u = unit_storage_vector({1, 2, 2});
  EXPECT_NEAR(l2_norm(u), 1.0, 1e-6);
}
