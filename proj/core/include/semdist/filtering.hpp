#pragma once

#include "semdist/embed_io.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semdist {

enum class Dispersion { Variance, StdDev };

struct FilterConfig {
  double lambda_weight = 1.0;
  double mean_min = 0.2;
  double mean_max = 0.8;
  double replace_fraction = 0.6;
  Dispersion dispersion = Dispersion::Variance;
  std::uint64_t seed = 0;
};

// Throws InvalidConfig describing the first violated field constraint.
void validate(const FilterConfig& cfg);

enum class StopReason { None, NoImprovingSwap, ConstraintInfeasible, PoolExhausted };

std::string_view to_string(StopReason reason);
std::string_view to_string(Dispersion dispersion);

struct Swap {
  std::string removed_id;
  std::string added_id;
  double objective_before = 0.0;
  double objective_after = 0.0;
};

struct FilterResult {
  std::vector<std::string> final_set;
  std::vector<Swap> swaps;
  std::vector<double> objective_trace;  // initial objective, then one entry per swap
  bool stopped_early = false;
  StopReason reason = StopReason::None;
  std::size_t planned_swaps = 0;
};

// An item reduced to what the optimizer sees: its id and target distance.
struct Candidate {
  std::string id;
  double distance = 0.0;
};

// mean(distances) - lambda_weight * dispersion(distances), with population
// variance (or its square root). Throws EmptySet.
double objective(std::span<const double> distances, const FilterConfig& cfg);

double mean_of(std::span<const double> distances);

// ceil(fraction * n), tolerant of representation error in the fraction.
std::size_t planned_swap_count(std::size_t working_size, double replace_fraction);

// Greedy remove-and-replace. Each step picks the (removal, addition) pair
// minimizing the full-size objective among pairs whose resulting mean lies
// strictly inside (mean_min, mean_max); ties go to the smallest removed id,
// then the smallest added id. Added candidates leave the pool; removed ones
// never return.
FilterResult greedy_select(std::span<const Candidate> working, std::span<const Candidate> pool,
                           const FilterConfig& cfg);

// Comparison baseline: swaps the same number of uniformly chosen working
// members for uniformly chosen pool members, seeded by cfg.seed.
FilterResult random_select(std::span<const Candidate> working, std::span<const Candidate> pool,
                           const FilterConfig& cfg);

// Item-level entry points: distances are dist(old, target) from `table`.
FilterResult greedy_filter(std::span<const KnowledgeItem> working, std::span<const KnowledgeItem> pool,
                           const EmbeddingTable& table, const FilterConfig& cfg, unsigned threads = 1);
FilterResult random_baseline(std::span<const KnowledgeItem> working, std::span<const KnowledgeItem> pool,
                             const EmbeddingTable& table, const FilterConfig& cfg, unsigned threads = 1);

}  // namespace semdist
