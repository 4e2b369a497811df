#include "semdist/reweight.hpp"

#include "semdist/error.hpp"
#include "semdist/semantics.hpp"

#include <cmath>
#include <sstream>

namespace semdist {

WeightRecord make_weight(std::string item_id, double distance, double gamma) {
  if (!(std::isfinite(gamma) && gamma >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "gamma must be a non-negative finite number");
  }
  WeightRecord w;
  w.item_id = std::move(item_id);
  w.distance = distance;
  w.lambda_value = reweight_lambda(distance);
  w.weight = 1.0 + gamma * w.lambda_value;
  w.gamma = gamma;
  return w;
}

std::vector<WeightRecord> emit_weights(std::span<const KnowledgeItem> items, const EmbeddingTable& table,
                                       double gamma, unsigned threads) {
  if (!(std::isfinite(gamma) && gamma >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "gamma must be a non-negative finite number");
  }
  const auto distances = target_distances(items, table, DistancePair::OldVsTarget, threads);

  std::ostringstream offenders;
  std::size_t n_bad = 0;
  offenders.precision(17);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (distances[i] <= 1.0) continue;
    if (n_bad++ > 0) offenders << ", ";
    offenders << items[i].id << "=" << distances[i];
  }
  if (n_bad > 0) {
    throw Error(ErrorKind::DistanceOutOfRange,
                std::to_string(n_bad) + " item(s) with distance above 1: " + offenders.str());
  }

  std::vector<WeightRecord> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out.push_back(make_weight(items[i].id, distances[i], gamma));
  return out;
}

double compose_loss(std::span<const double> per_example_losses, std::span<const WeightRecord> weights) {
  if (per_example_losses.size() != weights.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(per_example_losses.size()) + " losses vs " +
                                               std::to_string(weights.size()) + " weights");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) total += weights[i].weight * per_example_losses[i];
  return total;
}

}  // namespace semdist
