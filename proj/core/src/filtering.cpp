#include "semdist/filtering.hpp"

#include "semdist/error.hpp"
#include "semdist/numeric.hpp"
#include "semdist/semantics.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_set>

namespace semdist {

namespace {

void check_inputs(std::span<const Candidate> working, std::span<const Candidate> pool, const FilterConfig& cfg) {
  validate(cfg);
  if (working.empty()) throw Error(ErrorKind::EmptySet, "working set is empty");
  std::unordered_set<std::string_view> seen;
  for (const auto& c : working) {
    if (!seen.insert(c.id).second) throw Error(ErrorKind::DuplicateId, "working set repeats id '" + c.id + "'");
  }
  std::unordered_set<std::string_view> pool_seen;
  for (const auto& c : pool) {
    if (seen.contains(c.id)) {
      throw Error(ErrorKind::InvalidConfig, "id '" + c.id + "' is in both the working set and the pool");
    }
    if (!pool_seen.insert(c.id).second) throw Error(ErrorKind::DuplicateId, "pool repeats id '" + c.id + "'");
  }
  for (const auto* set : {&working, &pool}) {
    for (const auto& c : *set) {
      if (!std::isfinite(c.distance)) {
        throw Error(ErrorKind::NonFiniteValue, "distance of '" + c.id + "' is not finite");
      }
    }
  }
}

std::vector<double> distances_of(const std::vector<Candidate>& set) {
  std::vector<double> d;
  d.reserve(set.size());
  for (const auto& c : set) d.push_back(c.distance);
  return d;
}

std::vector<std::string> ids_of(const std::vector<Candidate>& set) {
  std::vector<std::string> ids;
  ids.reserve(set.size());
  for (const auto& c : set) ids.push_back(c.id);
  return ids;
}

std::vector<Candidate> to_candidates(std::span<const KnowledgeItem> items, const EmbeddingTable& table,
                                     unsigned threads) {
  const auto d = target_distances(items, table, DistancePair::OldVsTarget, threads);
  std::vector<Candidate> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out.push_back({items[i].id, d[i]});
  return out;
}

// Objective of the set after replacing one member, from sums taken about a
// fixed shift so variance does not suffer cancellation.
struct SwapEvaluator {
  double n = 1.0;
  double shift = 0.0;
  double lambda = 0.0;
  Dispersion dispersion = Dispersion::Variance;

  double operator()(double rest_sum, double rest_sq, double added) const {
    const double y = added - shift;
    const double s = rest_sum + y;
    const double q = rest_sq + y * y;
    const double mean_shifted = s / n;
    const double variance = std::max(0.0, q / n - mean_shifted * mean_shifted);
    const double spread = dispersion == Dispersion::Variance ? variance : std::sqrt(variance);
    return (mean_shifted + shift) - lambda * spread;
  }
};

struct BestPair {
  double objective = std::numeric_limits<double>::infinity();
  std::size_t removed = 0;  // index into working
  std::size_t added = 0;    // index into sorted pool
  bool found = false;
};

bool better(double obj, std::string_view removed, std::string_view added, const BestPair& best,
            const std::vector<Candidate>& working, const std::vector<Candidate>& pool) {
  if (!best.found) return true;
  if (obj != best.objective) return obj < best.objective;
  const std::string_view best_removed = working[best.removed].id;
  if (removed != best_removed) return removed < best_removed;
  return added < std::string_view(pool[best.added].id);
}

}  // namespace

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::None: return "None";
    case StopReason::NoImprovingSwap: return "NoImprovingSwap";
    case StopReason::ConstraintInfeasible: return "ConstraintInfeasible";
    case StopReason::PoolExhausted: return "PoolExhausted";
  }
  return "Unknown";
}

std::string_view to_string(Dispersion dispersion) {
  return dispersion == Dispersion::Variance ? "variance" : "stddev";
}

void validate(const FilterConfig& cfg) {
  if (!(std::isfinite(cfg.lambda_weight) && cfg.lambda_weight >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "lambda must be a non-negative finite number");
  }
  if (!(cfg.mean_min >= 0.0 && cfg.mean_min < cfg.mean_max && cfg.mean_max <= 2.0)) {
    throw Error(ErrorKind::InvalidConfig, "mean window must satisfy 0 <= mean_min < mean_max <= 2");
  }
  if (!(cfg.replace_fraction >= 0.0 && cfg.replace_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "replace_fraction must lie in [0, 1]");
  }
}

double mean_of(std::span<const double> distances) {
  if (distances.empty()) throw Error(ErrorKind::EmptySet, "mean of an empty set");
  return stable_sum(distances) / static_cast<double>(distances.size());
}

double objective(std::span<const double> distances, const FilterConfig& cfg) {
  const double mean = mean_of(distances);
  StableSum sq;
  for (double d : distances) sq.add((d - mean) * (d - mean));
  const double variance = sq.value() / static_cast<double>(distances.size());
  const double spread = cfg.dispersion == Dispersion::Variance ? variance : std::sqrt(variance);
  return mean - cfg.lambda_weight * spread;
}

std::size_t planned_swap_count(std::size_t working_size, double replace_fraction) {
  const double raw = replace_fraction * static_cast<double>(working_size);
  return std::min(working_size, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

FilterResult greedy_select(std::span<const Candidate> working_in, std::span<const Candidate> pool_in,
                           const FilterConfig& cfg) {
  check_inputs(working_in, pool_in, cfg);

  std::vector<Candidate> working(working_in.begin(), working_in.end());
  std::vector<Candidate> pool(pool_in.begin(), pool_in.end());
  std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });

  FilterResult result;
  result.planned_swaps = planned_swap_count(working.size(), cfg.replace_fraction);
  result.objective_trace.push_back(objective(distances_of(working), cfg));

  const double n = static_cast<double>(working.size());
  while (result.swaps.size() < result.planned_swaps) {
    if (pool.empty()) {
      result.stopped_early = true;
      result.reason = StopReason::NoImprovingSwap;
      break;
    }

    const double shift = mean_of(distances_of(working));
    StableSum sum_acc;
    StableSum sq_acc;
    for (const auto& c : working) {
      sum_acc.add(c.distance - shift);
      sq_acc.add((c.distance - shift) * (c.distance - shift));
    }
    const double sum = sum_acc.value();
    const double sq = sq_acc.value();
    const SwapEvaluator eval{n, shift, cfg.lambda_weight, cfg.dispersion};

    // The objective is concave in the added distance, so for a fixed removal
    // only the smallest and largest admissible pool distances can be optimal.
    BestPair best;
    for (std::size_t r = 0; r < working.size(); ++r) {
      const double yr = working[r].distance - shift;
      const double rest_sum = sum - yr;
      const double rest_sq = sq - yr * yr;
      // The resulting mean is monotone in the added distance, so the
      // admissible pool entries form one contiguous run of the sorted pool.
      auto mean_with = [&](const Candidate& c) { return (rest_sum + (c.distance - shift)) / n + shift; };
      const auto first = std::partition_point(pool.begin(), pool.end(),
                                              [&](const Candidate& c) { return !(mean_with(c) > cfg.mean_min); });
      const auto last_end = std::partition_point(first, pool.end(),
                                                 [&](const Candidate& c) { return mean_with(c) < cfg.mean_max; });
      if (first == last_end) continue;
      // Smallest id among the equal largest admissible distances.
      const auto last = std::lower_bound(first, last_end, std::prev(last_end)->distance,
                                         [](const Candidate& c, double v) { return c.distance < v; });

      for (auto it : {first, last}) {
        const double obj = eval(rest_sum, rest_sq, it->distance);
        const auto idx = static_cast<std::size_t>(it - pool.begin());
        if (better(obj, working[r].id, it->id, best, working, pool)) {
          best = {obj, r, idx, true};
        }
      }
    }

    if (!best.found) {
      result.stopped_early = true;
      result.reason = StopReason::ConstraintInfeasible;
      break;
    }

    std::vector<Candidate> next = working;
    next[best.removed] = pool[best.added];
    const double before = result.objective_trace.back();
    const double after = objective(distances_of(next), cfg);
    if (!(after < before)) {
      result.stopped_early = true;
      result.reason = StopReason::NoImprovingSwap;
      break;
    }

    result.swaps.push_back({working[best.removed].id, pool[best.added].id, before, after});
    result.objective_trace.push_back(after);
    working = std::move(next);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best.added));
  }

  result.final_set = ids_of(working);
  return result;
}

FilterResult random_select(std::span<const Candidate> working_in, std::span<const Candidate> pool_in,
                           const FilterConfig& cfg) {
  check_inputs(working_in, pool_in, cfg);

  std::vector<Candidate> working(working_in.begin(), working_in.end());
  std::vector<Candidate> pool(pool_in.begin(), pool_in.end());

  FilterResult result;
  result.planned_swaps = planned_swap_count(working.size(), cfg.replace_fraction);
  result.objective_trace.push_back(objective(distances_of(working), cfg));
  const std::size_t swaps = std::min(result.planned_swaps, pool.size());

  boost::random::mt19937_64 rng(cfg.seed);
  auto draw = [&rng](std::size_t lo, std::size_t hi) {
    return boost::random::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };

  // Partial Fisher-Yates over slot indices and pool indices.
  std::vector<std::size_t> slots(working.size());
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  std::vector<std::size_t> picks(pool.size());
  std::iota(picks.begin(), picks.end(), std::size_t{0});
  for (std::size_t s = 0; s < swaps; ++s) {
    std::swap(slots[s], slots[draw(s, slots.size() - 1)]);
    std::swap(picks[s], picks[draw(s, picks.size() - 1)]);

    const double before = result.objective_trace.back();
    Candidate removed = working[slots[s]];
    working[slots[s]] = pool[picks[s]];
    const double after = objective(distances_of(working), cfg);
    result.swaps.push_back({removed.id, pool[picks[s]].id, before, after});
    result.objective_trace.push_back(after);
  }
  if (swaps < result.planned_swaps) {
    result.stopped_early = true;
    result.reason = StopReason::PoolExhausted;
  }
  result.final_set = ids_of(working);
  return result;
}

FilterResult greedy_filter(std::span<const KnowledgeItem> working, std::span<const KnowledgeItem> pool,
                           const EmbeddingTable& table, const FilterConfig& cfg, unsigned threads) {
  validate(cfg);
  return greedy_select(to_candidates(working, table, threads), to_candidates(pool, table, threads), cfg);
}

FilterResult random_baseline(std::span<const KnowledgeItem> working, std::span<const KnowledgeItem> pool,
                             const EmbeddingTable& table, const FilterConfig& cfg, unsigned threads) {
  validate(cfg);
  return random_select(to_candidates(working, table, threads), to_candidates(pool, table, threads), cfg);
}

}  // namespace semdist
