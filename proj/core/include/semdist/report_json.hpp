#pragma once

#include "semdist/filtering.hpp"
#include "semdist/matan.hpp"
#include "semdist/metrics.hpp"
#include "semdist/reweight.hpp"

#include <nlohmann/json.hpp>

namespace semdist {

using Json = nlohmann::ordered_json;

// JSON forms of the report types. Field names mirror the struct members;
// absent optionals serialize as null.
Json to_json(const ScoreReport& r);
Json to_json(const DeviationRecord& r);
Json to_json(const DeviationSummary& s);
Json to_json(const DeviationAnalysis& a);
Json to_json(const BinnedReport& r);
Json to_json(const FilterConfig& cfg);
Json to_json(const FilterResult& r);
Json to_json(const WeightRecord& w);
Json to_json(const SubspaceReport& r);
Json to_json(const PcaResult& r);
Json to_json(const DenseMatrix& m);  // array of row arrays

}  // namespace semdist
