#pragma once

#include "semdist/embed_io.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semdist {

// Case-sensitive equality after NFC normalization, trimming, and collapsing
// internal whitespace runs to a single space.
bool exact_match(std::string_view predicted, std::string_view target);

// The normalized form compared by exact_match.
std::string normalize_answer(std::string_view text);

struct ScoreReport {
  double accuracy = 0.0;
  std::optional<double> generality;  // absent when there are no rephrases
  std::optional<double> locality;    // absent when there are no probes
  std::size_t n_items = 0;
  std::size_t n_rephrases = 0;
  std::size_t n_probes = 0;
};

// Accuracy over new vs target, generality over rephrase answers vs target,
// locality over probe new_answer vs old_answer. Throws MissingNewAnswer
// listing items without a `new` answer, EmptySet for no items.
ScoreReport score_dataset(std::span<const KnowledgeItem> items);

struct DeviationRecord {
  std::string item_id;
  double dist_old_target = 0.0;
  double dist_new_target = 0.0;
  bool exact = false;
  bool deviated = false;          // dist_new_target > dist_old_target
  std::optional<double> rd;       // absent when dist_old_target == 0
  bool is_bad_case = false;       // !exact || dist_new_target > 0
};

// Relative deviation (dist_new - dist_old) / dist_old; absent for dist_old == 0.
std::optional<double> relative_deviation(double dist_old, double dist_new);

DeviationRecord make_deviation_record(std::string item_id, double dist_old, double dist_new, bool exact);

struct DeviationSummary {
  std::size_t n_items = 0;
  std::size_t n_deviated = 0;
  std::size_t n_bad_cases = 0;
  std::size_t n_deviated_bad_cases = 0;
  std::size_t n_rd = 0;
  double proportion_all = 0.0;
  std::optional<double> proportion_bad_cases;  // absent with no bad cases
  std::optional<double> mean_rd;               // absent when no record has rd
};

struct DeviationAnalysis {
  std::vector<DeviationRecord> records;
  DeviationSummary summary;
};

DeviationSummary summarize_deviation(std::span<const DeviationRecord> records);

// Per-item old/new target distances and their deviation summary. Throws
// MissingNewAnswer, MissingEmbedding.
DeviationAnalysis deviation_analysis(std::span<const KnowledgeItem> items, const EmbeddingTable& table,
                                     unsigned threads = 1);

inline constexpr double kDefaultBinWidth = 0.05;

struct StatSet {
  bool accuracy = true;
  bool deviation = true;
};

struct Bin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n_items = 0;
  std::optional<double> accuracy;
  std::optional<double> deviation_proportion;
  std::optional<double> mean_rd;
};

struct BinnedReport {
  double bin_width = kDefaultBinWidth;
  std::vector<Bin> bins;
};

// Bin edges covering [0, 2]; the last bin is closed on the right.
std::vector<double> bin_edges(double bin_width);

// Index of the bin holding `distance` given edges from bin_edges.
std::size_t bin_index(std::span<const double> edges, double distance);

// Groups items by dist_old_target and reports per-bin accuracy and deviation
// statistics. Throws InvalidBinWidth unless 0 < bin_width <= 1.
BinnedReport binned_report(std::span<const KnowledgeItem> items, const EmbeddingTable& table, double bin_width,
                           StatSet stats = {}, unsigned threads = 1);

// The binning core, over precomputed rows. `records` provides dist_old_target,
// exact and deviation fields; unused statistics are left absent.
BinnedReport bin_records(std::span<const DeviationRecord> records, double bin_width, StatSet stats);

}  // namespace semdist
