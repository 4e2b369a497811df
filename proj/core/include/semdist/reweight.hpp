#pragma once

#include "semdist/embed_io.hpp"

#include <span>
#include <string>
#include <vector>

namespace semdist {

inline constexpr double kDefaultGamma = 1.0;

// Per-example loss multiplier: training loops scale each example's loss by
// `weight` = 1 + gamma * lambda_value.
struct WeightRecord {
  std::string item_id;
  double distance = 0.0;      // dist(target, old)
  double lambda_value = 0.0;  // reweight_lambda(distance)
  double weight = 1.0;
  double gamma = kDefaultGamma;
};

WeightRecord make_weight(std::string item_id, double distance, double gamma);

// One record per item in input order. Throws MissingEmbedding, InvalidConfig
// for negative gamma, DistanceOutOfRange listing every item whose distance
// exceeds 1.
std::vector<WeightRecord> emit_weights(std::span<const KnowledgeItem> items, const EmbeddingTable& table,
                                       double gamma = kDefaultGamma, unsigned threads = 1);

// sum_i weight_i * loss_i. Throws LengthMismatch.
double compose_loss(std::span<const double> per_example_losses, std::span<const WeightRecord> weights);

}  // namespace semdist
