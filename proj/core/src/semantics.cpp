#include "semdist/semantics.hpp"

#include "semdist/error.hpp"
#include "semdist/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace semdist {

std::vector<double> mean_pool(const DenseMatrix& tokens) {
  if (tokens.rows() == 0 || tokens.cols() == 0) {
    throw Error(ErrorKind::EmptyMatrix, "cannot mean-pool a matrix with no token rows");
  }
  std::vector<double> pooled(tokens.cols(), 0.0);
  for (std::size_t r = 0; r < tokens.rows(); ++r) {
    auto row = tokens.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) pooled[c] += row[c];
  }
  const double n = static_cast<double>(tokens.rows());
  for (double& v : pooled) v /= n;
  return pooled;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::ShapeMismatch, "vectors of length " + std::to_string(a.size()) + " and " +
                                              std::to_string(b.size()));
  }
  double dot = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (!(aa > 0.0)) throw Error(ErrorKind::ZeroNormVector, "first vector has zero norm");
  if (!(bb > 0.0)) throw Error(ErrorKind::ZeroNormVector, "second vector has zero norm");
  // sqrt(x*x) == x exactly, so identical inputs give distance 0.
  const double similarity = dot / std::sqrt(aa * bb);
  return std::clamp(1.0 - similarity, 0.0, 2.0);
}

double target_distance(const KnowledgeItem& item, const EmbeddingTable& table, DistancePair which) {
  const AnswerRole other = which == DistancePair::OldVsTarget ? AnswerRole::Old : AnswerRole::New;
  const auto& target = table.at(embedding_key(item.id, AnswerRole::Target));
  const auto& answer = table.at(embedding_key(item.id, other));
  const auto target_vec = mean_pool(target);
  const auto answer_vec = mean_pool(answer);
  try {
    return cosine_distance(answer_vec, target_vec);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ZeroNormVector) throw;
    const std::string which_key = e.detail().starts_with("first")
                                      ? embedding_key(item.id, other)
                                      : embedding_key(item.id, AnswerRole::Target);
    throw Error(ErrorKind::ZeroNormVector, "mean-pooled embedding '" + which_key + "' has zero norm");
  }
}

std::vector<double> target_distances(std::span<const KnowledgeItem> items, const EmbeddingTable& table,
                                     DistancePair which, unsigned threads) {
  std::vector<double> out(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) { out[i] = target_distance(items[i], table, which); });
  return out;
}

double reweight_lambda(double distance) {
  if (!(distance >= 0.0 && distance <= 1.0)) {
    throw Error(ErrorKind::DistanceOutOfRange,
                "re-weighting is defined for distances in [0, 1], got " + std::to_string(distance));
  }
  constexpr double pi = std::numbers::pi;
  return std::clamp(1.0 - std::cos(distance * pi - pi / 2.0), 0.0, 1.0);
}

}  // namespace semdist
