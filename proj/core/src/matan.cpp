#include "semdist/matan.hpp"

#include "semdist/error.hpp"
#include "semdist/numeric.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace semdist {

namespace {

using Column = std::vector<double>;

constexpr int kMaxSweeps = 80;
constexpr double kOrthoTolerance = 1e-6;
constexpr double kSignThreshold = 1e-12;

double dot(const Column& a, const Column& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_finite(const DenseMatrix& m, const char* what) {
  for (double v : m.values()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, std::string(what) + " has a non-finite entry");
  }
}

struct Factorization {
  std::vector<Column> u;  // left vectors, unit length
  std::vector<double> s;
  std::vector<Column> v;  // right vectors
};

// One-sided Jacobi on a tall matrix (rows >= cols), given as its columns.
Factorization jacobi_tall(std::vector<Column> a) {
  const std::size_t n = a.size();
  const std::size_t m = n == 0 ? 0 : a[0].size();
  std::vector<Column> v(n, Column(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max<std::size_t>(m, 1));
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(a[p], a[p]);
        const double beta = dot(a[q], a[q]);
        const double gamma = dot(a[p], a[q]);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::fabs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        converged = false;

        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double ap = a[p][i];
          const double aq = a[q][i];
          a[p][i] = c * ap - s * aq;
          a[q][i] = s * ap + c * aq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v[p][i];
          const double vq = v[q][i];
          v[p][i] = c * vp - s * vq;
          v[q][i] = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged) {
    throw Error(ErrorKind::ConvergenceFailure,
                "Jacobi SVD did not converge in " + std::to_string(kMaxSweeps) + " sweeps");
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(dot(a[j], a[j]));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  Factorization f;
  const double sigma_max = n == 0 ? 0.0 : sigma[order[0]];
  const double negligible = sigma_max * static_cast<double>(std::max(m, n)) *
                            std::numeric_limits<double>::epsilon();
  std::size_t next_basis = 0;
  for (std::size_t idx : order) {
    const double sj = sigma[idx];
    Column u(m, 0.0);
    const bool from_data = sj > negligible && sj > 0.0;
    if (from_data) {
      for (std::size_t i = 0; i < m; ++i) u[i] = a[idx][i] / sj;
    }
    // Re-orthogonalize against earlier vectors (twice is enough); columns
    // with negligible singular value are completed from the standard basis.
    for (;;) {
      if (!from_data) {
        std::fill(u.begin(), u.end(), 0.0);
        if (next_basis >= m) throw Error(ErrorKind::ConvergenceFailure, "cannot complete left basis");
        u[next_basis++] = 1.0;
      }
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& prev : f.u) {
          const double proj = dot(prev, u);
          for (std::size_t i = 0; i < m; ++i) u[i] -= proj * prev[i];
        }
      }
      const double norm = std::sqrt(dot(u, u));
      if (from_data || norm > 0.5) {
        for (double& x : u) x /= norm;
        break;
      }
    }
    f.u.push_back(std::move(u));
    f.s.push_back(sj);
    f.v.push_back(v[idx]);
  }
  return f;
}

DenseMatrix columns_to_matrix(const std::vector<Column>& cols, std::size_t rows, std::size_t k) {
  DenseMatrix out(rows, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < rows; ++i) out(i, j) = cols[j][i];
  return out;
}

void check_orthonormal(const DenseMatrix& f, const char* name) {
  const DenseMatrix gram = multiply_transposed_left(f, f);
  for (std::size_t i = 0; i < gram.rows(); ++i) {
    for (std::size_t j = 0; j < gram.cols(); ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      if (std::fabs(gram(i, j) - expected) > kOrthoTolerance) {
        throw Error(ErrorKind::NonOrthonormalFactor,
                    std::string(name) + " columns are not orthonormal (entry " + std::to_string(i) + "," +
                        std::to_string(j) + " of the Gram matrix is " + std::to_string(gram(i, j)) + ")");
      }
    }
  }
}

void check_rank(std::size_t k, std::size_t limit, const char* what) {
  if (k < 1 || k > limit) {
    throw Error(ErrorKind::RankOutOfRange, std::string(what) + " " + std::to_string(k) + " outside [1, " +
                                               std::to_string(limit) + "]");
  }
}

}  // namespace

double frobenius(const DenseMatrix& m) {
  double sum = 0.0;
  for (double v : m.values()) sum += v * v;
  return std::sqrt(sum);
}

SvdResult svd(const DenseMatrix& m, std::size_t k) {
  check_rank(k, std::min(m.rows(), m.cols()), "rank");
  check_finite(m, "matrix");

  const bool wide = m.rows() < m.cols();
  // Jacobi runs on the tall orientation; a wide input swaps the factors back.
  const DenseMatrix src = wide ? m.transposed() : m;

  std::vector<Column> cols(src.cols(), Column(src.rows()));
  for (std::size_t i = 0; i < src.rows(); ++i)
    for (std::size_t j = 0; j < src.cols(); ++j) cols[j][i] = src(i, j);

  Factorization f = jacobi_tall(std::move(cols));

  SvdResult out;
  out.singular_values.assign(f.s.begin(), f.s.begin() + static_cast<std::ptrdiff_t>(k));
  if (wide) {
    out.u = columns_to_matrix(f.v, m.rows(), k);
    out.v = columns_to_matrix(f.u, m.cols(), k);
  } else {
    out.u = columns_to_matrix(f.u, m.rows(), k);
    out.v = columns_to_matrix(f.v, m.cols(), k);
  }

  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < out.u.rows(); ++i) {
      const double x = out.u(i, j);
      if (std::fabs(x) < kSignThreshold) continue;
      if (x < 0.0) {
        for (std::size_t r = 0; r < out.u.rows(); ++r) out.u(r, j) = -out.u(r, j);
        for (std::size_t r = 0; r < out.v.rows(); ++r) out.v(r, j) = -out.v(r, j);
      }
      break;
    }
  }
  return out;
}

double project_norm(const DenseMatrix& w, const DenseMatrix& u, const DenseMatrix& v) {
  if (u.rows() != w.rows() || v.rows() != w.cols() || u.cols() != v.cols()) {
    throw Error(ErrorKind::ShapeMismatch,
                "u is " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) + ", v is " +
                    std::to_string(v.rows()) + "x" + std::to_string(v.cols()) + ", w is " +
                    std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  }
  check_orthonormal(u, "u");
  check_orthonormal(v, "v");
  return frobenius(multiply_transposed_left(u, multiply(w, v)));
}

std::optional<double> amplification_factor(double norm_dw, double proj_dw) {
  if (!(proj_dw > 0.0)) return std::nullopt;
  return norm_dw / proj_dw;
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  boost::random::mt19937_64 rng(seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (double& x : m.values()) x = normal(rng);
  return m;
}

SubspaceReport subspace_report(const DenseMatrix& w, const DenseMatrix& dw, std::size_t rank,
                               std::uint64_t seed) {
  if (w.rows() != dw.rows() || w.cols() != dw.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "w is " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                                              ", dw is " + std::to_string(dw.rows()) + "x" +
                                              std::to_string(dw.cols()));
  }
  check_rank(rank, std::min(w.rows(), w.cols()), "rank");

  SubspaceReport report;
  report.rank_r = rank;
  report.seed = seed;
  report.norm_w = frobenius(w);
  report.norm_dw = frobenius(dw);

  const auto dw_svd = svd(dw, rank);
  report.proj_dw = project_norm(w, dw_svd.u, dw_svd.v);
  const auto w_svd = svd(w, rank);
  report.proj_w = project_norm(w, w_svd.u, w_svd.v);
  const auto rnd_svd = svd(gaussian_matrix(w.rows(), w.cols(), seed), rank);
  report.proj_random = project_norm(w, rnd_svd.u, rnd_svd.v);

  report.amplification = amplification_factor(report.norm_dw, report.proj_dw);
  return report;
}

PcaResult pca(const DenseMatrix& x, std::size_t k) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) throw Error(ErrorKind::RankOutOfRange, "PCA needs at least 2 rows, got " + std::to_string(n));
  check_rank(k, std::min(n - 1, d), "component count");
  check_finite(x, "data");

  bool all_same = true;
  for (std::size_t r = 1; r < n && all_same; ++r) {
    all_same = std::equal(x.row(r).begin(), x.row(r).end(), x.row(0).begin());
  }
  if (all_same) throw Error(ErrorKind::DegenerateData, "all rows are identical");

  PcaResult out;
  out.n_components = k;
  out.mean.assign(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    StableSum s;
    for (std::size_t r = 0; r < n; ++r) s.add(x(r, c));
    out.mean[c] = s.value() / static_cast<double>(n);
  }
  DenseMatrix centered(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) centered(r, c) = x(r, c) - out.mean[c];

  const auto dec = svd(centered, k);
  out.components = dec.v.transposed();
  out.explained_variance.reserve(k);
  for (double s : dec.singular_values) out.explained_variance.push_back(s * s / static_cast<double>(n - 1));
  out.projections = multiply(centered, dec.v);
  return out;
}

}  // namespace semdist
