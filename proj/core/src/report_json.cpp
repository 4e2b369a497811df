#include "semdist/report_json.hpp"

namespace semdist {

namespace {

template <typename T>
Json optional_value(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json to_json(const ScoreReport& r) {
  return {{"accuracy", r.accuracy},
          {"generality", optional_value(r.generality)},
          {"locality", optional_value(r.locality)},
          {"n_items", r.n_items},
          {"n_rephrases", r.n_rephrases},
          {"n_probes", r.n_probes}};
}

Json to_json(const DeviationRecord& r) {
  return {{"item_id", r.item_id},
          {"dist_old_target", r.dist_old_target},
          {"dist_new_target", r.dist_new_target},
          {"exact_match", r.exact},
          {"deviated", r.deviated},
          {"rd", optional_value(r.rd)},
          {"is_bad_case", r.is_bad_case}};
}

Json to_json(const DeviationSummary& s) {
  return {{"n_items", s.n_items},
          {"n_deviated", s.n_deviated},
          {"n_bad_cases", s.n_bad_cases},
          {"n_deviated_bad_cases", s.n_deviated_bad_cases},
          {"proportion_all", s.proportion_all},
          {"proportion_bad_cases", optional_value(s.proportion_bad_cases)},
          {"mean_rd", optional_value(s.mean_rd)}};
}

Json to_json(const DeviationAnalysis& a) {
  Json records = Json::array();
  for (const auto& r : a.records) records.push_back(to_json(r));
  return {{"records", std::move(records)}, {"summary", to_json(a.summary)}};
}

Json to_json(const BinnedReport& r) {
  Json bins = Json::array();
  for (const auto& b : r.bins) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"n_items", b.n_items},
                    {"accuracy", optional_value(b.accuracy)},
                    {"deviation_proportion", optional_value(b.deviation_proportion)},
                    {"mean_rd", optional_value(b.mean_rd)}});
  }
  return {{"bin_width", r.bin_width}, {"bins", std::move(bins)}};
}

Json to_json(const FilterConfig& cfg) {
  return {{"lambda_weight", cfg.lambda_weight},
          {"mean_min", cfg.mean_min},
          {"mean_max", cfg.mean_max},
          {"replace_fraction", cfg.replace_fraction},
          {"dispersion", std::string(to_string(cfg.dispersion))},
          {"seed", cfg.seed}};
}

Json to_json(const FilterResult& r) {
  Json swaps = Json::array();
  for (const auto& s : r.swaps) {
    swaps.push_back({{"removed_id", s.removed_id},
                     {"added_id", s.added_id},
                     {"objective_before", s.objective_before},
                     {"objective_after", s.objective_after}});
  }
  return {{"final_set", r.final_set},
          {"swaps", std::move(swaps)},
          {"objective_trace", r.objective_trace},
          {"planned_swaps", r.planned_swaps},
          {"stopped_early", r.stopped_early},
          {"reason", r.stopped_early ? Json(std::string(to_string(r.reason))) : Json(nullptr)}};
}

Json to_json(const WeightRecord& w) {
  return {{"item_id", w.item_id},
          {"distance", w.distance},
          {"lambda_value", w.lambda_value},
          {"weight", w.weight},
          {"gamma", w.gamma}};
}

Json to_json(const SubspaceReport& r) {
  return {{"norm_w", r.norm_w},
          {"norm_dw", r.norm_dw},
          {"proj_dw", r.proj_dw},
          {"proj_w", r.proj_w},
          {"proj_random", r.proj_random},
          {"rank_r", r.rank_r},
          {"amplification", optional_value(r.amplification)},
          {"seed", r.seed}};
}

Json to_json(const DenseMatrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(Json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

Json to_json(const PcaResult& r) {
  return {{"n_components", r.n_components},
          {"components", to_json(r.components)},
          {"explained_variance", r.explained_variance},
          {"mean", r.mean},
          {"projections", to_json(r.projections)}};
}

}  // namespace semdist
