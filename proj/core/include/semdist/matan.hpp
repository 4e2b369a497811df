#pragma once

#include "semdist/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace semdist {

// sqrt of the sum of squared entries, accumulated in double.
double frobenius(const DenseMatrix& m);

struct SvdResult {
  DenseMatrix u;                         // rows x k, orthonormal columns
  std::vector<double> singular_values;   // k values, non-increasing
  DenseMatrix v;                         // cols x k, orthonormal columns
};

// Top-k singular triplets by one-sided Jacobi. Each column of u has its
// first non-negligible entry positive; v is flipped to match. Throws
// RankOutOfRange unless 1 <= k <= min(rows, cols), ConvergenceFailure if
// the sweeps do not settle.
SvdResult svd(const DenseMatrix& m, std::size_t k);

// Frobenius norm of u^T * w * v (an r x r matrix). u and v must have
// orthonormal columns within 1e-6 (NonOrthonormalFactor) and conformable
// shapes (ShapeMismatch).
double project_norm(const DenseMatrix& w, const DenseMatrix& u, const DenseMatrix& v);

// norm_dw / proj_dw; absent when the projection vanishes.
std::optional<double> amplification_factor(double norm_dw, double proj_dw);

// Gaussian N(0, 1) matrix from a seeded mt19937_64.
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

struct SubspaceReport {
  double norm_w = 0.0;
  double norm_dw = 0.0;
  double proj_dw = 0.0;      // w projected on dw's top-r singular subspace
  double proj_w = 0.0;       // w projected on its own top-r subspace
  double proj_random = 0.0;  // w projected on a seeded Gaussian's top-r subspace
  std::size_t rank_r = 0;
  std::optional<double> amplification;
  std::uint64_t seed = 0;
};

// Throws ShapeMismatch when w and dw differ in shape, RankOutOfRange for r
// outside [1, min(rows, cols)].
SubspaceReport subspace_report(const DenseMatrix& w, const DenseMatrix& dw, std::size_t rank,
                               std::uint64_t seed);

inline constexpr std::size_t kDefaultComponents = 15;

struct PcaResult {
  std::size_t n_components = 0;
  DenseMatrix components;                // k x d, orthonormal rows
  std::vector<double> explained_variance;
  std::vector<double> mean;              // d column means
  DenseMatrix projections;               // n x k scores
};

// Column-centred PCA via svd. explained_variance_i = sigma_i^2 / (n - 1).
// Throws RankOutOfRange unless n >= 2 and 1 <= k <= min(n - 1, d),
// DegenerateData when every row is identical.
PcaResult pca(const DenseMatrix& x, std::size_t k = kDefaultComponents);

}  // namespace semdist
