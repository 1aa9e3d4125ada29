#ifndef LSR_SVD_HPP
#define LSR_SVD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "lsr/dense_matrix.hpp"
#include "lsr/errors.hpp"

namespace lsr {

struct SvdOptions {
  std::size_t max_sweeps = 10000;
  /// Pairs are rotated while |a_pᵀa_q| > tolerance·‖a_p‖‖a_q‖.
  double tolerance = 1e-12;
};

struct SvdResult {
  DenseMatrix u;       // rows × k, orthonormal columns
  Vector sigma;        // k values, non-negative, non-increasing
  DenseMatrix v;       // cols × k, orthonormal columns
};

namespace detail {

// Columns stored contiguously: col(j)[i].
struct ColumnBlock {
  std::size_t rows;
  std::size_t cols;
  std::vector<double> data;

  double* col(std::size_t j) { return data.data() + j * rows; }
  const double* col(std::size_t j) const { return data.data() + j * rows; }
};

// Appends unit vectors orthogonal to the first `filled` columns of `q` until
// all columns are populated. Candidates are standard basis vectors, taken in
// order of largest residual after two Gram-Schmidt passes.
inline void complete_orthonormal(ColumnBlock& q, std::size_t filled) {
  for (std::size_t j = filled; j < q.cols; ++j) {
    std::vector<double> best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < q.rows; ++e) {
      std::vector<double> cand(q.rows, 0.0);
      cand[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t c = 0; c < j; ++c) {
          const double* qc = q.col(c);
          double proj = 0.0;
          for (std::size_t i = 0; i < q.rows; ++i) proj += qc[i] * cand[i];
          for (std::size_t i = 0; i < q.rows; ++i) cand[i] -= proj * qc[i];
        }
      }
      const double n = norm2(cand);
      if (n > best_norm) {
        best_norm = n;
        best = std::move(cand);
      }
    }
    double* qj = q.col(j);
    for (std::size_t i = 0; i < q.rows; ++i) qj[i] = best[i] / best_norm;
  }
}

// One-sided (Hestenes) Jacobi on a tall matrix (rows ≥ cols). On return the
// columns of `a` are mutually orthogonal and `v` holds the accumulated
// rotations, so that a_in = a_out · vᵀ.
inline void hestenes_jacobi(ColumnBlock& a, ColumnBlock& v, const SvdOptions& opt) {
  const std::size_t n = a.cols;
  const std::size_t m = a.rows;
  for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* ap = a.col(p);
        double* aq = a.col(q);
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += ap[i] * ap[i];
          beta += aq[i] * aq[i];
          gamma += ap[i] * aq[i];
        }
        if (gamma == 0.0) continue;
        const double scale = std::sqrt(alpha) * std::sqrt(beta);
        if (!(std::abs(gamma) > opt.tolerance * scale)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = ap[i], y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
        double* vp = v.col(p);
        double* vq = v.col(q);
        for (std::size_t i = 0; i < v.rows; ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) return;
  }
  throw NumericalError("svd: one-sided Jacobi did not converge within " +
                       std::to_string(opt.max_sweeps) + " sweeps");
}

inline SvdResult tall_svd(const DenseMatrix& m, std::size_t k, const SvdOptions& opt) {
  const std::size_t rows = m.rows(), cols = m.cols();
  ColumnBlock a{rows, cols, std::vector<double>(rows * cols)};
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) a.col(j)[i] = m(i, j);
  ColumnBlock v{cols, cols, std::vector<double>(cols * cols, 0.0)};
  for (std::size_t j = 0; j < cols; ++j) v.col(j)[j] = 1.0;

  hestenes_jacobi(a, v, opt);

  std::vector<double> norms(cols);
  for (std::size_t j = 0; j < cols; ++j)
    norms[j] = norm2(std::span<const double>(a.col(j), rows));
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  const double smax = norms[order.front()];
  // Below this, a column is rounding noise and its direction is meaningless.
  const double floor = smax * static_cast<double>(std::max(rows, cols)) *
                       std::numeric_limits<double>::epsilon();

  ColumnBlock u{rows, k, std::vector<double>(rows * k, 0.0)};
  SvdResult out{DenseMatrix(rows, k), Vector(k), DenseMatrix(cols, k)};
  std::size_t filled = 0;
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t j = order[t];
    out.sigma[t] = norms[j];
    if (norms[j] > floor && norms[j] > 0.0 && filled == t) {
      for (std::size_t i = 0; i < rows; ++i) u.col(t)[i] = a.col(j)[i] / norms[j];
      ++filled;
    }
    for (std::size_t i = 0; i < cols; ++i) out.v(i, t) = v.col(j)[i];
  }
  complete_orthonormal(u, filled);
  for (std::size_t t = 0; t < k; ++t)
    for (std::size_t i = 0; i < rows; ++i) out.u(i, t) = u.col(t)[i];
  return out;
}

}  // namespace detail

/// Leading k singular triplets of m. k must lie in [1, min(rows, cols)].
inline SvdResult truncated_svd(const DenseMatrix& m, std::size_t k,
                               const SvdOptions& opt = {}) {
  const std::size_t kmax = std::min(m.rows(), m.cols());
  if (k == 0 || k > kmax) {
    throw ArgumentError("truncated_svd: k = " + std::to_string(k) +
                        " outside [1, " + std::to_string(kmax) + "]");
  }
  if (!m.all_finite()) throw NumericalError("truncated_svd: non-finite input");
  if (m.rows() >= m.cols()) return detail::tall_svd(m, k, opt);
  SvdResult t = detail::tall_svd(transpose(m), k, opt);
  return SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

inline Vector singular_values(const DenseMatrix& m, const SvdOptions& opt = {}) {
  return truncated_svd(m, std::min(m.rows(), m.cols()), opt).sigma;
}

/// U·diag(sigma)·Vᵀ
inline DenseMatrix reconstruct(const SvdResult& svd) {
  DenseMatrix out(svd.u.rows(), svd.v.rows());
  for (std::size_t t = 0; t < svd.sigma.size(); ++t) {
    for (std::size_t i = 0; i < svd.u.rows(); ++i) {
      const double ui = svd.sigma[t] * svd.u(i, t);
      if (ui == 0.0) continue;
      for (std::size_t j = 0; j < svd.v.rows(); ++j) out(i, j) += ui * svd.v(j, t);
    }
  }
  return out;
}

}  // namespace lsr

#endif  // LSR_SVD_HPP
