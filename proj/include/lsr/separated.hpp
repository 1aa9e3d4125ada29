#ifndef LSR_SEPARATED_HPP
#define LSR_SEPARATED_HPP

// Separated (low separation rank) representation of a matrix:
//
//   M ≈ Σ_k λ_k · M_k^(1) ⊗ … ⊗ M_k^(r)
//
// plus its conditioning diagnostics and the two constructions that produce
// one from data: the optimal two-factor sum via rearrangement + truncated SVD,
// and the factor-by-factor split of a rank decomposition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "lsr/dense_matrix.hpp"
#include "lsr/errors.hpp"
#include "lsr/kron.hpp"
#include "lsr/svd.hpp"

namespace lsr {

struct KronTerm {
  double lambda = 1.0;
  std::vector<DenseMatrix> factors;
};

/// Target shape plus an ordered list of Kronecker terms. Every term has the
/// same number of factors and its factor extents multiply out to the shape.
class SeparatedMatrix {
 public:
  explicit SeparatedMatrix(Shape shape) : shape_(shape) {
    if (shape.rows == 0 || shape.cols == 0) {
      throw ArgumentError("SeparatedMatrix: shape must be positive");
    }
  }

  SeparatedMatrix(Shape shape, std::vector<KronTerm> terms)
      : SeparatedMatrix(shape) {
    for (auto& t : terms) push_back(std::move(t));
  }

  void push_back(KronTerm term) {
    if (term.factors.empty()) {
      throw ArgumentError("SeparatedMatrix: term " + std::to_string(terms_.size()) +
                          " has no factors");
    }
    if (!terms_.empty() && term.factors.size() != terms_.front().factors.size()) {
      throw ArgumentError("SeparatedMatrix: term " + std::to_string(terms_.size()) +
                          " has " + std::to_string(term.factors.size()) +
                          " factors, expected " +
                          std::to_string(terms_.front().factors.size()));
    }
    std::size_t rows = 1, cols = 1;
    for (const auto& f : term.factors) {
      rows = detail::checked_mul(rows, f.rows());
      cols = detail::checked_mul(cols, f.cols());
    }
    if (rows != shape_.rows || cols != shape_.cols) {
      throw ArgumentError("SeparatedMatrix: term " + std::to_string(terms_.size()) +
                          " spans " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", expected " + to_string(shape_));
    }
    terms_.push_back(std::move(term));
  }

  Shape shape() const noexcept { return shape_; }
  std::size_t separation_rank() const noexcept { return terms_.size(); }
  /// Factors per term (0 when there are no terms).
  std::size_t factor_count() const noexcept {
    return terms_.empty() ? 0 : terms_.front().factors.size();
  }
  const std::vector<KronTerm>& terms() const noexcept { return terms_; }

 private:
  Shape shape_;
  std::vector<KronTerm> terms_;
};

struct PrecisionBudget {
  double mu;       // unit round-off of the target arithmetic
  double epsilon;  // admissible error
};

/// Unit round-off of IEEE half precision (11-bit significand).
inline constexpr double kHalfRoundoff = 0x1.0p-11;
/// Unit round-off of IEEE single precision (24-bit significand).
inline constexpr double kSingleRoundoff = 0x1.0p-24;

inline DenseMatrix materialize(const SeparatedMatrix& s) {
  DenseMatrix out(s.shape());
  for (const auto& t : s.terms()) {
    if (t.lambda == 0.0) continue;
    axpy(t.lambda, kron_multi(t.factors), out);
  }
  return out;
}

/// Matrix-free product for two-factor representations; other factor counts
/// materialize first.
inline Vector apply(const SeparatedMatrix& s, std::span<const double> x) {
  if (x.size() != s.shape().cols) {
    throw ArgumentError("apply: vector length " + std::to_string(x.size()) +
                        " does not match " + to_string(s.shape()));
  }
  if (s.factor_count() != 2) {
    if (s.terms().empty()) return Vector(s.shape().rows, 0.0);
    return matvec(materialize(s), x);
  }
  Vector y(s.shape().rows, 0.0);
  for (const auto& t : s.terms()) {
    if (t.lambda == 0.0) continue;
    detail::accumulate_kron2(t.factors[0], t.factors[1], x, t.lambda, y);
  }
  return y;
}

/// γ = (Σ λ_k²)^½ / ‖M‖_F. Meaningful when every factor has unit norm.
inline double condition_number(const SeparatedMatrix& s) {
  const double norm = frobenius_norm(materialize(s));
  if (norm == 0.0) {
    throw NumericalError(
        "condition_number: representation materializes to the zero matrix "
        "(division by zero)");
  }
  double ssq = 0.0;
  for (const auto& t : s.terms()) ssq += t.lambda * t.lambda;
  return std::sqrt(ssq) / norm;
}

/// True when γ·μ·‖M‖_F ≤ ε.
inline bool check_precision(const SeparatedMatrix& s, const PrecisionBudget& budget) {
  if (!(budget.mu > 0.0) || !(budget.epsilon > 0.0)) {
    throw ArgumentError("check_precision: mu and epsilon must be positive");
  }
  const double gamma = condition_number(s);
  const double norm = frobenius_norm(materialize(s));
  return gamma * budget.mu * norm <= budget.epsilon;
}

namespace detail {

inline KronTerm normalize_term(const KronTerm& t, std::size_t index) {
  KronTerm out;
  out.lambda = std::abs(t.lambda);
  out.factors.reserve(t.factors.size());
  for (std::size_t i = 0; i < t.factors.size(); ++i) {
    const double n = frobenius_norm(t.factors[i]);
    if (n == 0.0) throw DegenerateTermError(index, i);
    out.lambda *= n;
    out.factors.push_back((1.0 / n) * t.factors[i]);
  }
  if (t.lambda < 0.0) {
    for (double& v : out.factors.front().data()) v = -v;
  }
  return out;
}

// Indices of `terms` ordered by descending λ, ties kept in input order.
inline std::vector<std::size_t> descending_lambda_order(const std::vector<KronTerm>& terms) {
  std::vector<std::size_t> order(terms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return terms[a].lambda > terms[b].lambda;
  });
  return order;
}

}  // namespace detail

/// Rescales every factor to unit Frobenius norm, folds the magnitudes into a
/// non-negative λ (sign goes to the first factor) and sorts by descending λ.
inline SeparatedMatrix normalize_terms(const SeparatedMatrix& s) {
  std::vector<KronTerm> normalized;
  normalized.reserve(s.separation_rank());
  for (std::size_t k = 0; k < s.terms().size(); ++k)
    normalized.push_back(detail::normalize_term(s.terms()[k], k));
  SeparatedMatrix out(s.shape());
  for (std::size_t k : detail::descending_lambda_order(normalized))
    out.push_back(std::move(normalized[k]));
  return out;
}

/// Rearrangement R(M) that maps P ⊗ Q to vec(P)·vec(Q)ᵀ.
///
/// Row j·left.rows + i holds vec(block(i, j))ᵀ, where block(i, j) is the
/// right.rows × right.cols block of M at block coordinates (i, j).
inline DenseMatrix rearrange(const DenseMatrix& m, Shape left, Shape right) {
  if (left.rows * right.rows != m.rows() || left.cols * right.cols != m.cols()) {
    throw ArgumentError("rearrange: " + to_string(left) + " (x) " + to_string(right) +
                        " does not tile " + to_string(m.shape()));
  }
  DenseMatrix r(left.rows * left.cols, right.rows * right.cols);
  for (std::size_t j = 0; j < left.cols; ++j) {
    for (std::size_t i = 0; i < left.rows; ++i) {
      const std::size_t row = j * left.rows + i;
      for (std::size_t l = 0; l < right.cols; ++l) {
        for (std::size_t k = 0; k < right.rows; ++k) {
          r(row, l * right.rows + k) = m(i * right.rows + k, j * right.cols + l);
        }
      }
    }
  }
  return r;
}

/// Best s-term approximation Σ λ_k P_k ⊗ Q_k of m in Frobenius norm, with
/// P_k of shape `left` and Q_k of shape `right`. Factors come out unit-norm
/// and λ non-increasing; the residual equals the singular value tail of R(m).
inline SeparatedMatrix nearest_kron_sum(const DenseMatrix& m, Shape left, Shape right,
                                        std::size_t s) {
  const DenseMatrix r = rearrange(m, left, right);
  const SvdResult svd = truncated_svd(r, s);
  SeparatedMatrix out(m.shape());
  for (std::size_t k = 0; k < s; ++k) {
    Vector pk(r.rows()), qk(r.cols());
    for (std::size_t i = 0; i < r.rows(); ++i) pk[i] = svd.u(i, k);
    for (std::size_t i = 0; i < r.cols(); ++i) qk[i] = svd.v(i, k);
    KronTerm t;
    t.lambda = svd.sigma[k];
    t.factors.push_back(unvec(pk, left));
    t.factors.push_back(unvec(qk, right));
    out.push_back(std::move(t));
  }
  return out;
}

/// Singular values of R(m); their tails give the nearest_kron_sum residuals.
inline Vector rearranged_singular_values(const DenseMatrix& m, Shape left, Shape right) {
  return singular_values(rearrange(m, left, right));
}

/// Residual ‖u − u^(1) ⊗ … ⊗ u^(r)‖ of the Kronecker split of each vector.
struct TermTruncation {
  double u_residual = 0.0;
  double v_residual = 0.0;
};

struct RankSplit {
  SeparatedMatrix repr;
  std::vector<TermTruncation> truncation;  // aligned with repr.terms()
};

/// Greedy best rank-1 split of x into x^(1) ⊗ … ⊗ x^(r) with the given
/// lengths. All magnitude ends up in the last piece. Each peeled factor is
/// sign-fixed so its largest-magnitude entry is positive.
inline std::vector<Vector> kron_split_vector(std::span<const double> x,
                                             std::span<const std::size_t> dims) {
  std::vector<Vector> pieces;
  Vector rest(x.begin(), x.end());
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t head = dims[i];
    const std::size_t tail = rest.size() / head;
    // rest[h·tail + t] = head_piece[h]·tail_piece[t]  ⇒  unvec(rest, tail×head)
    // is tail_piece·head_pieceᵀ.
    const DenseMatrix shaped = unvec(rest, Shape{tail, head});
    Vector h(head), t(tail);
    if (frobenius_norm(shaped) == 0.0) {
      h.assign(head, 0.0);
      h[0] = 1.0;
      t.assign(tail, 0.0);
    } else {
      const SvdResult svd = truncated_svd(shaped, 1);
      for (std::size_t c = 0; c < head; ++c) h[c] = svd.v(c, 0);
      for (std::size_t c = 0; c < tail; ++c) t[c] = svd.sigma[0] * svd.u(c, 0);
      const auto peak = std::max_element(h.begin(), h.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
      });
      if (*peak < 0.0) {
        for (double& v : h) v = -v;
        for (double& v : t) v = -v;
      }
    }
    pieces.push_back(std::move(h));
    rest = std::move(t);
  }
  pieces.push_back(std::move(rest));
  return pieces;
}

namespace detail {

inline double kron_split_residual(std::span<const double> x,
                                  const std::vector<Vector>& pieces) {
  Vector acc = pieces.front();
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    const Vector& p = pieces[i];
    Vector next(acc.size() * p.size());
    for (std::size_t a = 0; a < acc.size(); ++a)
      for (std::size_t b = 0; b < p.size(); ++b) next[a * p.size() + b] = acc[a] * p[b];
    acc = std::move(next);
  }
  double ssq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ssq += (x[i] - acc[i]) * (x[i] - acc[i]);
  return std::sqrt(ssq);
}

}  // namespace detail

/// Turns Σ_k u_k·v_kᵀ into Σ_k λ_k A_k^(1) ⊗ … ⊗ A_k^(r) with
/// A_k^(i) = u_k^(i)·(v_k^(i))ᵀ. The split of each u_k, v_k into Kronecker
/// pieces is exact only for separable vectors; the residual of each split is
/// reported. The result is normalized (unit-norm factors, descending λ).
inline RankSplit from_rank_decomposition(std::span<const Vector> us,
                                         std::span<const Vector> vs,
                                         std::span<const std::size_t> row_factors,
                                         std::span<const std::size_t> col_factors) {
  if (us.size() != vs.size()) {
    throw ArgumentError("from_rank_decomposition: " + std::to_string(us.size()) +
                        " left vectors but " + std::to_string(vs.size()) + " right vectors");
  }
  if (row_factors.size() != col_factors.size() || row_factors.size() < 2) {
    throw ArgumentError(
        "from_rank_decomposition: row and column factor lists must have the same "
        "length r >= 2");
  }
  std::size_t m = 1, n = 1;
  for (std::size_t d : row_factors) {
    if (d == 0) throw ArgumentError("from_rank_decomposition: zero row factor");
    m = detail::checked_mul(m, d);
  }
  for (std::size_t d : col_factors) {
    if (d == 0) throw ArgumentError("from_rank_decomposition: zero column factor");
    n = detail::checked_mul(n, d);
  }

  std::vector<KronTerm> terms;
  std::vector<TermTruncation> truncation;
  for (std::size_t k = 0; k < us.size(); ++k) {
    if (us[k].size() != m || vs[k].size() != n) {
      throw ArgumentError("from_rank_decomposition: term " + std::to_string(k) +
                          " has vector lengths " + std::to_string(us[k].size()) + ", " +
                          std::to_string(vs[k].size()) + "; expected " +
                          std::to_string(m) + ", " + std::to_string(n));
    }
    const auto up = kron_split_vector(us[k], row_factors);
    const auto vp = kron_split_vector(vs[k], col_factors);
    KronTerm t;
    for (std::size_t i = 0; i < row_factors.size(); ++i) {
      DenseMatrix a(row_factors[i], col_factors[i]);
      for (std::size_t p = 0; p < a.rows(); ++p)
        for (std::size_t q = 0; q < a.cols(); ++q) a(p, q) = up[i][p] * vp[i][q];
      t.factors.push_back(std::move(a));
    }
    terms.push_back(detail::normalize_term(t, k));
    truncation.push_back({detail::kron_split_residual(us[k], up),
                          detail::kron_split_residual(vs[k], vp)});
  }

  RankSplit out{SeparatedMatrix(Shape{m, n}), {}};
  for (std::size_t k : detail::descending_lambda_order(terms)) {
    out.repr.push_back(std::move(terms[k]));
    out.truncation.push_back(truncation[k]);
  }
  return out;
}

}  // namespace lsr

#endif  // LSR_SEPARATED_HPP
