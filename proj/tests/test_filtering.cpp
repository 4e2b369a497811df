#include "semdist/error.hpp"
#include "semdist/filtering.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

namespace semdist {
namespace {

using testing::candidates;

FilterConfig wide_window(double lambda, double fraction) {
  FilterConfig cfg;
  cfg.lambda_weight = lambda;
  cfg.replace_fraction = fraction;
  cfg.mean_min = 0.0;
  cfg.mean_max = 2.0;
  return cfg;
}

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (auto& x : out) x = u(rng);
  return out;
}

TEST(Objective, Examples) {
  FilterConfig cfg;
  cfg.lambda_weight = 0.0;
  EXPECT_NEAR(objective(std::vector<double>{0.2, 0.4}, cfg), 0.3, 1e-15);
  cfg.lambda_weight = 5.0;
  EXPECT_NEAR(objective(std::vector<double>{0.3, 0.3, 0.3}, cfg), 0.3, 1e-15);
  cfg.lambda_weight = 1.0;
  // Population variance of {0.1, 0.5, 0.9} is 0.32 / 3.
  EXPECT_NEAR(objective(std::vector<double>{0.1, 0.5, 0.9}, cfg), 0.5 - 0.32 / 3.0, 1e-12);
  EXPECT_NEAR(objective(std::vector<double>{0.1, 0.5, 0.9}, cfg), 0.393333333333, 1e-11);
  cfg.dispersion = Dispersion::StdDev;
  EXPECT_NEAR(objective(std::vector<double>{0.1, 0.5, 0.9}, cfg), 0.5 - std::sqrt(0.32 / 3.0), 1e-12);
}

TEST(Objective, EmptySetThrows) {
  try {
    objective(std::vector<double>{}, FilterConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySet);
  }
}

TEST(PlannedSwaps, CeilingOfFraction) {
  EXPECT_EQ(planned_swap_count(10, 0.6), 6u);
  EXPECT_EQ(planned_swap_count(6, 1.0 / 3.0), 2u);
  EXPECT_EQ(planned_swap_count(3, 0.5), 2u);
  EXPECT_EQ(planned_swap_count(7, 0.0), 0u);
  EXPECT_EQ(planned_swap_count(7, 1.0), 7u);
}

TEST(GreedySelect, ForcedSingleMove) {
  const std::vector<Candidate> working{{"a", 0.9}, {"b", 0.9}};
  const std::vector<Candidate> pool{{"c", 0.1}};
  const auto result = greedy_select(working, pool, wide_window(0.0, 0.5));
  ASSERT_EQ(result.swaps.size(), 1u);
  EXPECT_EQ(result.swaps[0].removed_id, "a");  // tie goes to the smaller id
  EXPECT_EQ(result.swaps[0].added_id, "c");
  EXPECT_EQ(result.final_set, (std::vector<std::string>{"c", "b"}));
  EXPECT_NEAR(result.objective_trace.front(), 0.9, 1e-15);
  EXPECT_NEAR(result.objective_trace.back(), 0.5, 1e-15);
  EXPECT_FALSE(result.stopped_early);
}

TEST(GreedySelect, EmptyPoolStopsImmediately) {
  const auto result = greedy_select(candidates("w", {0.3, 0.6}), {}, wide_window(1.0, 0.5));
  EXPECT_TRUE(result.swaps.empty());
  EXPECT_TRUE(result.stopped_early);
  EXPECT_EQ(result.reason, StopReason::NoImprovingSwap);
  EXPECT_EQ(result.final_set, (std::vector<std::string>{"w00", "w01"}));
}

TEST(GreedySelect, StopsWhenNoSwapImproves) {
  const auto result = greedy_select(candidates("w", {0.1, 0.1}), candidates("p", {0.9}), wide_window(0.0, 1.0));
  EXPECT_TRUE(result.stopped_early);
  EXPECT_EQ(result.reason, StopReason::NoImprovingSwap);
}

TEST(GreedySelect, StopsWhenWindowUnreachable) {
  FilterConfig cfg = wide_window(0.0, 1.0);
  cfg.mean_min = 0.4;
  cfg.mean_max = 0.6;
  const auto result = greedy_select(candidates("w", {0.5, 0.5}), candidates("p", {1.9}), cfg);
  EXPECT_TRUE(result.stopped_early);
  EXPECT_EQ(result.reason, StopReason::ConstraintInfeasible);
}

TEST(GreedySelect, SixTenFixtureMatchesBruteForce) {
  std::mt19937_64 rng(2024);
  const auto working = candidates("w", uniform(rng, 6, 0.2, 1.0));
  const auto pool = candidates("p", uniform(rng, 10, 0.0, 1.2));
  FilterConfig cfg;
  cfg.lambda_weight = 0.5;
  cfg.replace_fraction = 1.0 / 3.0;
  cfg.mean_min = 0.2;
  cfg.mean_max = 0.8;
  const auto result = greedy_select(working, pool, cfg);
  EXPECT_EQ(result.planned_swaps, 2u);
  EXPECT_EQ(result.swaps.size(), 2u);
  const auto check = oracle::check_greedy(working, pool, cfg, result);
  EXPECT_TRUE(check.ok) << check.message;
}

TEST(GreedySelect, RandomInstancesMatchBruteForce) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> lam(0.0, 4.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 10;
    const std::size_t m = rng() % 21;
    const auto working = candidates("w", uniform(rng, n, 0.0, 2.0));
    const auto pool = candidates("p", uniform(rng, m, 0.0, 2.0));
    FilterConfig cfg;
    cfg.lambda_weight = trial % 5 == 0 ? 0.0 : lam(rng);
    cfg.replace_fraction = (rng() % 11) / 10.0;
    cfg.dispersion = trial % 3 == 0 ? Dispersion::StdDev : Dispersion::Variance;
    const double center = std::uniform_real_distribution<double>(0.3, 1.5)(rng);
    cfg.mean_min = std::max(0.0, center - 0.4);
    cfg.mean_max = std::min(2.0, center + 0.4);
    const auto result = greedy_select(working, pool, cfg);
    const auto check = oracle::check_greedy(working, pool, cfg, result);
    ASSERT_TRUE(check.ok) << "trial " << trial << ": " << check.message;
  }
}

TEST(GreedySelect, TiedDistancesPreferSmallestIds) {
  const std::vector<Candidate> working{{"w2", 0.8}, {"w1", 0.8}, {"w3", 0.4}};
  const std::vector<Candidate> pool{{"p9", 0.3}, {"p1", 0.3}, {"p5", 0.3}};
  const auto result = greedy_select(working, pool, wide_window(0.0, 0.34));
  ASSERT_EQ(result.swaps.size(), 2u);
  EXPECT_EQ(result.swaps[0].removed_id, "w1");
  EXPECT_EQ(result.swaps[0].added_id, "p1");
  EXPECT_EQ(result.swaps[1].removed_id, "w2");
  EXPECT_EQ(result.swaps[1].added_id, "p5");
}

TEST(GreedySelect, ZeroLambdaSwapsMaxForMin) {
  std::mt19937_64 rng(5);
  auto working = candidates("w", uniform(rng, 12, 0.0, 2.0));
  auto pool = candidates("p", uniform(rng, 30, 0.0, 2.0));
  const auto result = greedy_select(working, pool, wide_window(0.0, 0.5));
  for (const auto& s : result.swaps) {
    auto max_it = std::max_element(working.begin(), working.end(),
                                   [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });
    auto min_it = std::min_element(pool.begin(), pool.end(),
                                   [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });
    EXPECT_EQ(s.removed_id, max_it->id);
    EXPECT_EQ(s.added_id, min_it->id);
    *max_it = *min_it;
    pool.erase(min_it);
  }
}

TEST(GreedySelect, InvariantsHold) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto working = candidates("w", uniform(rng, 20, 0.3, 0.9));
    const auto pool = candidates("p", uniform(rng, 60, 0.0, 2.0));
    FilterConfig cfg;  // defaults: lambda 1, fraction 0.6, window (0.2, 0.8)
    const auto result = greedy_select(working, pool, cfg);

    EXPECT_EQ(result.final_set.size(), working.size());
    EXPECT_EQ(std::set<std::string>(result.final_set.begin(), result.final_set.end()).size(), working.size());
    for (std::size_t i = 1; i < result.objective_trace.size(); ++i) {
      EXPECT_LT(result.objective_trace[i], result.objective_trace[i - 1]);
    }
    std::set<std::string> added;
    for (const auto& s : result.swaps) {
      EXPECT_TRUE(s.added_id.starts_with("p"));
      EXPECT_TRUE(added.insert(s.added_id).second);
    }
    const auto again = greedy_select(working, pool, cfg);
    EXPECT_EQ(again.final_set, result.final_set);
    EXPECT_EQ(again.objective_trace, result.objective_trace);
  }
}

TEST(GreedySelect, RejectsBadInputs) {
  auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoFailure;
  };
  const auto w = candidates("w", {0.5});
  EXPECT_EQ(kind([&] { greedy_select({}, w, FilterConfig{}); }), ErrorKind::EmptySet);
  EXPECT_EQ(kind([&] { greedy_select(w, w, FilterConfig{}); }), ErrorKind::InvalidConfig);
  FilterConfig cfg;
  cfg.lambda_weight = -1;
  EXPECT_EQ(kind([&] { validate(cfg); }), ErrorKind::InvalidConfig);
  cfg = {};
  cfg.mean_min = 0.9;
  EXPECT_EQ(kind([&] { validate(cfg); }), ErrorKind::InvalidConfig);
  cfg = {};
  cfg.mean_max = 2.5;
  EXPECT_EQ(kind([&] { validate(cfg); }), ErrorKind::InvalidConfig);
  cfg = {};
  cfg.replace_fraction = 1.5;
  EXPECT_EQ(kind([&] { validate(cfg); }), ErrorKind::InvalidConfig);
  const std::vector<Candidate> dup{{"a", 0.1}, {"a", 0.2}};
  EXPECT_EQ(kind([&] { greedy_select(dup, {}, FilterConfig{}); }), ErrorKind::DuplicateId);
}

TEST(RandomSelect, DeterministicForSeed) {
  std::mt19937_64 rng(1);
  const auto working = candidates("w", uniform(rng, 15, 0.0, 1.0));
  const auto pool = candidates("p", uniform(rng, 40, 0.0, 1.0));
  FilterConfig cfg;
  cfg.seed = 99;
  const auto a = random_select(working, pool, cfg);
  const auto b = random_select(working, pool, cfg);
  EXPECT_EQ(a.final_set, b.final_set);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.swaps.size(), planned_swap_count(15, cfg.replace_fraction));
  cfg.seed = 100;
  EXPECT_NE(random_select(working, pool, cfg).final_set, a.final_set);
}

TEST(RandomSelect, ZeroFractionIsIdentity) {
  const auto working = candidates("w", {0.1, 0.7, 0.4});
  FilterConfig cfg;
  cfg.replace_fraction = 0.0;
  const auto r = random_select(working, candidates("p", {0.5, 0.6}), cfg);
  EXPECT_TRUE(r.swaps.empty());
  EXPECT_EQ(r.final_set, (std::vector<std::string>{"w00", "w01", "w02"}));
  EXPECT_FALSE(r.stopped_early);
}

TEST(RandomSelect, ShortPoolStopsEarly) {
  FilterConfig cfg;
  cfg.replace_fraction = 1.0;
  const auto r = random_select(candidates("w", {0.1, 0.7, 0.4}), candidates("p", {0.5}), cfg);
  EXPECT_EQ(r.swaps.size(), 1u);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.reason, StopReason::PoolExhausted);
}

TEST(RandomSelect, GreedyBeatsRandomAlmostAlways) {
  int greedy_wins = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    const auto working = candidates("w", uniform(rng, 30, 0.3, 0.9));
    const auto pool = candidates("p", uniform(rng, 100, 0.0, 1.0));
    FilterConfig cfg;
    cfg.seed = trial;
    const double greedy = greedy_select(working, pool, cfg).objective_trace.back();
    const double random = random_select(working, pool, cfg).objective_trace.back();
    if (random > greedy) ++greedy_wins;
  }
  EXPECT_GE(greedy_wins, 95);
}

TEST(GreedyFilter, UsesOldTargetDistances) {
  EmbeddingTable table(2);
  std::vector<KnowledgeItem> working, pool;
  for (auto [id, d] : std::vector<std::pair<std::string, double>>{{"a", 0.9}, {"b", 0.9}}) {
    testing::plant(table, {id, d});
    working.push_back(testing::make_item({id, d}));
  }
  testing::plant(table, {"c", 0.1});
  pool.push_back(testing::make_item({"c", 0.1}));
  const auto result = greedy_filter(working, pool, table, wide_window(0.0, 0.5));
  EXPECT_EQ(result.final_set, (std::vector<std::string>{"c", "b"}));

  pool.push_back(testing::make_item({"ghost", 0.2}));
  try {
    greedy_filter(working, pool, table, wide_window(0.0, 0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingEmbedding);
  }
}

}  // namespace
}  // namespace semdist
