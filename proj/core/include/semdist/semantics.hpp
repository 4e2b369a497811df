#pragma once

#include "semdist/embed_io.hpp"
#include "semdist/matrix.hpp"

#include <span>
#include <vector>

namespace semdist {

// Averages the token rows of a T x d matrix. Throws EmptyMatrix when T == 0.
std::vector<double> mean_pool(const DenseMatrix& tokens);

// 1 - cos(a, b), clamped into [0, 2]. Throws ZeroNormVector naming the
// offending argument, ShapeMismatch on differing lengths.
double cosine_distance(std::span<const double> a, std::span<const double> b);

enum class DistancePair { OldVsTarget, NewVsTarget };

// Cosine distance between the mean-pooled embeddings of an item's target and
// its old (or new) answer, looked up as "<id>#target" / "<id>#old" / "<id>#new".
double target_distance(const KnowledgeItem& item, const EmbeddingTable& table, DistancePair which);

// target_distance over many items, optionally on several threads. Result order
// matches `items` and does not depend on the thread count.
std::vector<double> target_distances(std::span<const KnowledgeItem> items, const EmbeddingTable& table,
                                     DistancePair which, unsigned threads = 1);

// Loss re-weighting coefficient 1 - cos(d*pi - pi/2) for d in [0, 1]: 1 at
// both ends, 0 at d = 0.5. Throws DistanceOutOfRange outside [0, 1].
double reweight_lambda(double distance);

}  // namespace semdist
