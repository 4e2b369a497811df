#include "semdist/error.hpp"
#include "semdist/reweight.hpp"
#include "semdist/semantics.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

namespace semdist {
namespace {

TEST(MakeWeight, Examples) {
  auto w = make_weight("x", 0.5, 1.0);
  EXPECT_NEAR(w.lambda_value, 0.0, 1e-15);
  EXPECT_NEAR(w.weight, 1.0, 1e-15);

  w = make_weight("x", 0.0, 2.0);
  EXPECT_NEAR(w.lambda_value, 1.0, 1e-15);
  EXPECT_NEAR(w.weight, 3.0, 1e-15);

  w = make_weight("x", 1.0, 1.0);
  EXPECT_NEAR(w.lambda_value, 1.0, 1e-15);
  EXPECT_NEAR(w.weight, 2.0, 1e-15);
  EXPECT_EQ(w.item_id, "x");
  EXPECT_EQ(w.gamma, 1.0);
}

TEST(MakeWeight, ZeroGammaIsUnitWeight) {
  for (double d = 0.0; d <= 1.0; d += 0.01) EXPECT_EQ(make_weight("x", d, 0.0).weight, 1.0);
}

TEST(MakeWeight, MonotoneInGamma) {
  for (double d : {0.0, 0.1, 0.3, 0.5, 0.8, 1.0}) {
    double prev = make_weight("x", d, 0.0).weight;
    for (double g = 0.25; g <= 4.0; g += 0.25) {
      const double cur = make_weight("x", d, g).weight;
      EXPECT_GE(cur, prev);
      prev = cur;
    }
  }
}

TEST(MakeWeight, MatchesClosedForm) {
  for (int i = 0; i <= 100; ++i) {
    const double d = i / 100.0;
    const double expected = 1.0 + 1.5 * (1.0 - std::sin(d * std::numbers::pi));
    EXPECT_NEAR(make_weight("x", d, 1.5).weight, expected, 1e-12);
  }
}

TEST(EmitWeights, OneRecordPerItemInOrder) {
  EmbeddingTable table(2);
  std::vector<KnowledgeItem> items;
  const std::vector<double> ds{0.5, 0.0, 0.25, 1.0};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    testing::PlantedItem p{"item" + std::to_string(i), ds[i]};
    testing::plant(table, p);
    items.push_back(testing::make_item(p));
  }
  const auto weights = emit_weights(items, table, 1.0);
  ASSERT_EQ(weights.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(weights[i].item_id, items[i].id);
    EXPECT_NEAR(weights[i].distance, ds[i], 1e-12);
    EXPECT_NEAR(weights[i].weight, 1.0 + reweight_lambda(ds[i]), 1e-9);
  }
  const auto flat = emit_weights(items, table, 0.0);
  for (const auto& w : flat) EXPECT_EQ(w.weight, 1.0);

  const auto threaded = emit_weights(items, table, 1.0, 4);
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(threaded[i].weight, weights[i].weight);
}

TEST(EmitWeights, ListsEveryOutOfRangeItem) {
  EmbeddingTable table(2);
  std::vector<KnowledgeItem> items;
  for (auto [id, d] : std::vector<std::pair<std::string, double>>{{"ok", 0.3}, {"far1", 1.4}, {"far2", 1.9}}) {
    testing::plant(table, {id, d});
    items.push_back(testing::make_item({id, d}));
  }
  try {
    emit_weights(items, table, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DistanceOutOfRange);
    EXPECT_NE(e.detail().find("far1"), std::string::npos);
    EXPECT_NE(e.detail().find("far2"), std::string::npos);
    EXPECT_EQ(e.detail().find("'ok'"), std::string::npos);
  }
}

TEST(EmitWeights, RejectsNegativeGamma) {
  EmbeddingTable table(2);
  try {
    emit_weights({}, table, -0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
  }
}

TEST(ComposeLoss, WeightedSum) {
  const std::vector<WeightRecord> w{make_weight("a", 0.5, 1.0), make_weight("b", 0.0, 2.0)};
  const std::vector<double> losses{2.0, 0.5};
  EXPECT_NEAR(compose_loss(losses, w), 2.0 * 1.0 + 0.5 * 3.0, 1e-12);
}

TEST(ComposeLoss, MatchesNaiveLoop) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<WeightRecord> w;
  std::vector<double> losses;
  for (int i = 0; i < 500; ++i) {
    w.push_back(make_weight("i" + std::to_string(i), u(rng), 2.0 * u(rng)));
    losses.push_back(5.0 * u(rng));
  }
  double naive = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) naive += w[i].weight * losses[i];
  EXPECT_NEAR(compose_loss(losses, w), naive, 1e-9);
}

TEST(ComposeLoss, LengthMismatch) {
  const std::vector<WeightRecord> w{make_weight("a", 0.5, 1.0)};
  try {
    compose_loss(std::vector<double>{1.0, 2.0}, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

}  // namespace
}  // namespace semdist
