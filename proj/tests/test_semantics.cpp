#include "semdist/error.hpp"
#include "semdist/semantics.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace semdist {
namespace {

TEST(MeanPool, TwoRowAverage) {
  EXPECT_EQ(mean_pool(DenseMatrix(2, 2, {1, 0, 0, 1})), (std::vector<double>{0.5, 0.5}));
}

TEST(MeanPool, SingleRowIsIdentity) {
  EXPECT_EQ(mean_pool(testing::row_matrix({3, 4})), (std::vector<double>{3, 4}));
}

TEST(MeanPool, MatchesColumnSumOracle) {
  const auto m = testing::random_matrix(5, 7, 11);
  const auto pooled = mean_pool(m);
  for (std::size_t c = 0; c < 7; ++c) {
    double col = 0.0;
    for (std::size_t r = 0; r < 5; ++r) col += m(r, c);
    EXPECT_NEAR(pooled[c], col / 5.0, 1e-12);
  }
}

TEST(MeanPool, EmptyMatrixThrows) {
  try {
    mean_pool(DenseMatrix{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyMatrix);
  }
}

TEST(CosineDistance, Examples) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_EQ(cosine_distance(a, a), 0.0);
  EXPECT_EQ(cosine_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 1.0);
  EXPECT_EQ(cosine_distance(std::vector<double>{1, 0}, std::vector<double>{-1, 0}), 2.0);
}

TEST(CosineDistance, ZeroNormNamesArgument) {
  try {
    cosine_distance(std::vector<double>{1, 0}, std::vector<double>{0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroNormVector);
    EXPECT_NE(e.detail().find("second"), std::string::npos);
  }
  try {
    cosine_distance(std::vector<double>{0, 0}, std::vector<double>{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(e.detail().find("first"), std::string::npos);
  }
}

TEST(CosineDistance, Properties) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + trial % 40;
    std::vector<double> a(d), b(d);
    for (auto& x : a) x = n(rng);
    for (auto& x : b) x = n(rng);
    const double ab = cosine_distance(a, b);
    EXPECT_EQ(ab, cosine_distance(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 2.0);
    EXPECT_LE(cosine_distance(a, a), 1e-12);

    const double alpha = scale(rng);
    std::vector<double> scaled(a);
    for (auto& x : scaled) x *= alpha;
    EXPECT_NEAR(cosine_distance(scaled, b), ab, 1e-12);
  }
}

TEST(TargetDistance, SingleTokenExamples) {
  EmbeddingTable table(2);
  table.insert("same#target", testing::row_matrix({0.3, 0.4}));
  table.insert("same#old", testing::row_matrix({0.3, 0.4}));
  table.insert("orth#target", testing::row_matrix({0, 1}));
  table.insert("orth#old", testing::row_matrix({1, 0}));

  KnowledgeItem same{.id = "same", .target = "t", .old = "o"};
  KnowledgeItem orth{.id = "orth", .target = "t", .old = "o"};
  EXPECT_EQ(target_distance(same, table, DistancePair::OldVsTarget), 0.0);
  EXPECT_EQ(target_distance(orth, table, DistancePair::OldVsTarget), 1.0);
}

TEST(TargetDistance, MultiTokenComposesPoolingAndCosine) {
  EmbeddingTable table(3);
  // Composition worked by hand: target mean (1, 1, 0), old mean (1, 0, 1),
  // cosine 1/2, distance 1/2.
  table.insert("k#target", DenseMatrix(2, 3, {2, 0, 0, 0, 2, 0}));
  table.insert("k#old", DenseMatrix(3, 3, {3, 0, 0, 0, 0, 3, 0, 0, 0}));
  KnowledgeItem item{.id = "k", .target = "t", .old = "o"};
  EXPECT_NEAR(target_distance(item, table, DistancePair::OldVsTarget), 0.5, 1e-15);
}

TEST(TargetDistance, MissingKeysAndZeroNorm) {
  EmbeddingTable table(2);
  table.insert("k#target", testing::row_matrix({1, 0}));
  table.insert("k#old", testing::row_matrix({0, 0}));
  KnowledgeItem item{.id = "k", .target = "t", .old = "o"};
  try {
    target_distance(item, table, DistancePair::NewVsTarget);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingEmbedding);
    EXPECT_NE(e.detail().find("k#new"), std::string::npos);
  }
  try {
    target_distance(item, table, DistancePair::OldVsTarget);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroNormVector);
    EXPECT_NE(e.detail().find("k#old"), std::string::npos);
  }
}

TEST(TargetDistance, ThreadCountDoesNotChangeResults) {
  EmbeddingTable table(2);
  std::vector<KnowledgeItem> items;
  for (int i = 0; i < 37; ++i) {
    testing::PlantedItem p{"i" + std::to_string(i), 0.05 * i};
    testing::plant(table, p);
    items.push_back(testing::make_item(p));
  }
  const auto serial = target_distances(items, table, DistancePair::OldVsTarget, 1);
  EXPECT_EQ(target_distances(items, table, DistancePair::OldVsTarget, 4), serial);
  EXPECT_EQ(target_distances(items, table, DistancePair::OldVsTarget, 64), serial);
}

TEST(ReweightLambda, Examples) {
  EXPECT_EQ(reweight_lambda(0.5), 0.0);
  EXPECT_NEAR(reweight_lambda(0.0), 1.0, 1e-15);
  // 1 - sin(pi/4) evaluated in long double.
  const long double expected = 1.0L - std::sin(3.14159265358979323846264338327950288L / 4.0L);
  EXPECT_NEAR(reweight_lambda(0.25), static_cast<double>(expected), 1e-12);
  EXPECT_NEAR(reweight_lambda(0.25), 0.29289321881, 1e-11);
}

TEST(ReweightLambda, RejectsOutOfRange) {
  for (double d : {-1e-9, 1.0000001, 2.0, std::nan("")}) {
    try {
      reweight_lambda(d);
      FAIL() << d;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DistanceOutOfRange);
    }
  }
}

TEST(ReweightLambda, SymmetryAndRange) {
  double minimum = 2.0;
  double argmin = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double d = i / 1000.0;
    const double l = reweight_lambda(d);
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 1.0);
    EXPECT_NEAR(l, reweight_lambda(1.0 - d), 1e-12);
    if (l < minimum) {
      minimum = l;
      argmin = d;
    }
  }
  EXPECT_EQ(argmin, 0.5);
}

}  // namespace
}  // namespace semdist
