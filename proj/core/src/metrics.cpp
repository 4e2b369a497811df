#include "semdist/metrics.hpp"

#include "semdist/error.hpp"
#include "semdist/numeric.hpp"
#include "semdist/semantics.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cmath>

namespace semdist {

namespace {

void require_new_answers(std::span<const KnowledgeItem> items) {
  std::string missing;
  std::size_t count = 0;
  for (const auto& item : items) {
    if (item.new_answer) continue;
    if (count < 20) {
      if (!missing.empty()) missing += ", ";
      missing += item.id;
    }
    ++count;
  }
  if (count == 0) return;
  if (count > 20) missing += ", ...";
  throw Error(ErrorKind::MissingNewAnswer,
              std::to_string(count) + " item(s) without a 'new' answer: " + missing);
}

double fraction(std::size_t hits, std::size_t total) {
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorKind::InvalidConfig, "ICU NFC normalizer unavailable");

  const icu::UnicodeString source =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw Error(ErrorKind::InvalidField, "cannot NFC-normalize answer text");

  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (int32_t i = 0; i < normalized.length(); i = normalized.moveIndex32(i, 1)) {
    const UChar32 cp = normalized.char32At(i);
    if (u_isUWhiteSpace(cp)) {
      pending_space = !collapsed.isEmpty();
      continue;
    }
    if (pending_space) collapsed.append(static_cast<UChar>(u' '));
    pending_space = false;
    collapsed.append(cp);
  }
  std::string out;
  collapsed.toUTF8String(out);
  return out;
}

bool exact_match(std::string_view predicted, std::string_view target) {
  return normalize_answer(predicted) == normalize_answer(target);
}

ScoreReport score_dataset(std::span<const KnowledgeItem> items) {
  if (items.empty()) throw Error(ErrorKind::EmptySet, "cannot score an empty dataset");
  require_new_answers(items);

  ScoreReport report;
  report.n_items = items.size();
  std::size_t accurate = 0;
  std::size_t general = 0;
  std::size_t local = 0;
  for (const auto& item : items) {
    const std::string target = normalize_answer(item.target);
    if (normalize_answer(*item.new_answer) == target) ++accurate;
    for (const auto& r : item.rephrases) {
      ++report.n_rephrases;
      if (normalize_answer(r.answer) == target) ++general;
    }
    for (const auto& p : item.locality_probes) {
      ++report.n_probes;
      if (exact_match(p.new_answer, p.old_answer)) ++local;
    }
  }
  report.accuracy = fraction(accurate, report.n_items);
  if (report.n_rephrases > 0) report.generality = fraction(general, report.n_rephrases);
  if (report.n_probes > 0) report.locality = fraction(local, report.n_probes);
  return report;
}

std::optional<double> relative_deviation(double dist_old, double dist_new) {
  if (dist_old == 0.0) return std::nullopt;
  return (dist_new - dist_old) / dist_old;
}

DeviationRecord make_deviation_record(std::string item_id, double dist_old, double dist_new, bool exact) {
  DeviationRecord r;
  r.item_id = std::move(item_id);
  r.dist_old_target = dist_old;
  r.dist_new_target = dist_new;
  r.exact = exact;
  r.deviated = dist_new > dist_old;
  r.rd = relative_deviation(dist_old, dist_new);
  r.is_bad_case = !exact || dist_new > 0.0;
  return r;
}

DeviationSummary summarize_deviation(std::span<const DeviationRecord> records) {
  DeviationSummary s;
  s.n_items = records.size();
  StableSum rd_sum;
  for (const auto& r : records) {
    if (r.deviated) ++s.n_deviated;
    if (r.is_bad_case) {
      ++s.n_bad_cases;
      if (r.deviated) ++s.n_deviated_bad_cases;
    }
    if (r.rd) {
      ++s.n_rd;
      rd_sum.add(*r.rd);
    }
  }
  s.proportion_all = s.n_items == 0 ? 0.0 : fraction(s.n_deviated, s.n_items);
  if (s.n_bad_cases > 0) s.proportion_bad_cases = fraction(s.n_deviated_bad_cases, s.n_bad_cases);
  if (s.n_rd > 0) s.mean_rd = rd_sum.value() / static_cast<double>(s.n_rd);
  return s;
}

DeviationAnalysis deviation_analysis(std::span<const KnowledgeItem> items, const EmbeddingTable& table,
                                     unsigned threads) {
  require_new_answers(items);
  const auto old_d = target_distances(items, table, DistancePair::OldVsTarget, threads);
  const auto new_d = target_distances(items, table, DistancePair::NewVsTarget, threads);
  DeviationAnalysis out;
  out.records.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    out.records.push_back(make_deviation_record(items[i].id, old_d[i], new_d[i],
                                                exact_match(*items[i].new_answer, items[i].target)));
  }
  out.summary = summarize_deviation(out.records);
  return out;
}

std::vector<double> bin_edges(double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) {
    throw Error(ErrorKind::InvalidBinWidth, "bin width must lie in (0, 1], got " + std::to_string(bin_width));
  }
  constexpr double kUpper = 2.0;
  std::vector<double> edges;
  // Widths of the form 1/k get edges i/k, so decimal edges such as 0.15 are
  // the correctly rounded values rather than accumulated products.
  const double per_unit = 1.0 / bin_width;
  const double k = std::round(per_unit);
  if (std::fabs(per_unit - k) <= 1e-9) {
    const auto n = static_cast<std::size_t>(2 * k);
    for (std::size_t i = 0; i <= n; ++i) edges.push_back(static_cast<double>(i) / k);
  } else {
    const auto n = static_cast<std::size_t>(std::ceil(kUpper / bin_width - 1e-9));
    for (std::size_t i = 0; i < n; ++i) edges.push_back(static_cast<double>(i) * bin_width);
    edges.push_back(kUpper);
  }
  edges.back() = kUpper;
  return edges;
}

std::size_t bin_index(std::span<const double> edges, double distance) {
  // First edge strictly greater than distance bounds the bin on the right.
  const std::size_t n_bins = edges.size() - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), distance);
  const auto pos = static_cast<std::size_t>(it - edges.begin());
  if (pos == 0) return 0;
  return std::min(pos - 1, n_bins - 1);
}

BinnedReport bin_records(std::span<const DeviationRecord> records, double bin_width, StatSet stats) {
  const auto edges = bin_edges(bin_width);
  const std::size_t n_bins = edges.size() - 1;
  std::vector<std::vector<const DeviationRecord*>> members(n_bins);
  for (const auto& r : records) members[bin_index(edges, r.dist_old_target)].push_back(&r);

  BinnedReport report;
  report.bin_width = bin_width;
  report.bins.reserve(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    Bin bin;
    bin.lo = edges[b];
    bin.hi = edges[b + 1];
    bin.n_items = members[b].size();
    if (bin.n_items > 0) {
      if (stats.accuracy) {
        const auto hits = std::count_if(members[b].begin(), members[b].end(),
                                        [](const DeviationRecord* r) { return r->exact; });
        bin.accuracy = fraction(static_cast<std::size_t>(hits), bin.n_items);
      }
      if (stats.deviation) {
        std::vector<DeviationRecord> subset;
        subset.reserve(bin.n_items);
        for (const auto* r : members[b]) subset.push_back(*r);
        const auto s = summarize_deviation(subset);
        bin.deviation_proportion = s.proportion_all;
        bin.mean_rd = s.mean_rd;
      }
    }
    report.bins.push_back(bin);
  }
  return report;
}

BinnedReport binned_report(std::span<const KnowledgeItem> items, const EmbeddingTable& table, double bin_width,
                           StatSet stats, unsigned threads) {
  bin_edges(bin_width);  // validate before touching embeddings
  if (stats.accuracy || stats.deviation) require_new_answers(items);

  const auto old_d = target_distances(items, table, DistancePair::OldVsTarget, threads);
  std::vector<double> new_d(items.size(), 0.0);
  if (stats.deviation) new_d = target_distances(items, table, DistancePair::NewVsTarget, threads);

  std::vector<DeviationRecord> records;
  records.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const bool exact = stats.accuracy && exact_match(*items[i].new_answer, items[i].target);
    records.push_back(make_deviation_record(items[i].id, old_d[i], new_d[i], exact));
  }
  return bin_records(records, bin_width, stats);
}

}  // namespace semdist
