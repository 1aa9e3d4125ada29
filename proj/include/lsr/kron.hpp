#ifndef LSR_KRON_HPP
#define LSR_KRON_HPP

// Kronecker-product algebra over DenseMatrix.
//
// Storage is row-major, but vec/unvec use the column-stacking convention so
// that the identity (P ⊗ Q)·vec(X) = vec(Q·X·Pᵀ) holds without transposes.
// apply_kron2 evaluates a two-factor Kronecker operator through that identity
// and never forms P ⊗ Q.

#include <cstddef>
#include <span>
#include <vector>

#include "lsr/dense_matrix.hpp"
#include "lsr/errors.hpp"

namespace lsr {

/// result[i·Vr + k, j·Vc + l] = U[i, j]·V[k, l]
inline DenseMatrix kron(const DenseMatrix& u, const DenseMatrix& v) {
  const std::size_t rows = detail::checked_mul(u.rows(), v.rows());
  const std::size_t cols = detail::checked_mul(u.cols(), v.cols());
  detail::checked_mul(rows, cols);
  DenseMatrix out(rows, cols);
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.cols(); ++j) {
      const double uij = u(i, j);
      for (std::size_t k = 0; k < v.rows(); ++k) {
        for (std::size_t l = 0; l < v.cols(); ++l) {
          out(i * v.rows() + k, j * v.cols() + l) = uij * v(k, l);
        }
      }
    }
  }
  return out;
}

/// Left fold of kron over a non-empty factor list.
inline DenseMatrix kron_multi(std::span<const DenseMatrix> factors) {
  if (factors.empty()) throw ArgumentError("kron_multi: empty factor list");
  DenseMatrix acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = kron(acc, factors[i]);
  return acc;
}

inline DenseMatrix kron_multi(std::initializer_list<DenseMatrix> factors) {
  return kron_multi(std::span<const DenseMatrix>(factors.begin(), factors.size()));
}

/// Column-stacking: vec(M)[j·rows + i] = M[i, j].
inline Vector vec(const DenseMatrix& m) {
  Vector out(m.size());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) out[j * m.rows() + i] = m(i, j);
  return out;
}

inline DenseMatrix unvec(std::span<const double> x, Shape shape) {
  DenseMatrix m(shape);
  if (x.size() != m.size()) {
    throw ArgumentError("unvec: length " + std::to_string(x.size()) +
                        " does not match shape " + to_string(shape));
  }
  for (std::size_t j = 0; j < shape.cols; ++j)
    for (std::size_t i = 0; i < shape.rows; ++i) m(i, j) = x[j * shape.rows + i];
  return m;
}

/// Multiply-add count of apply_kron2 for the given factor shapes, using the
/// cheaper of the two association orders.
inline std::size_t kron2_apply_cost(Shape p, Shape q) {
  const std::size_t q_first = q.rows * q.cols * p.cols + q.rows * p.cols * p.rows;
  const std::size_t p_first = q.cols * p.cols * p.rows + q.rows * q.cols * p.rows;
  return q_first <= p_first ? q_first : p_first;
}

namespace detail {

// y += scale · (P ⊗ Q)·x, with x read as the column-major Q.cols × P.cols
// matrix X and y written as the column-major Q.rows × P.rows matrix Q·X·Pᵀ.
inline void accumulate_kron2(const DenseMatrix& p, const DenseMatrix& q,
                             std::span<const double> x, double scale,
                             std::span<double> y) {
  const std::size_t pr = p.rows(), pc = p.cols();
  const std::size_t qr = q.rows(), qc = q.cols();
  const std::size_t q_first = qr * qc * pc + qr * pc * pr;
  const std::size_t p_first = qc * pc * pr + qr * qc * pr;
  if (q_first <= p_first) {
    // T = Q·X  (qr × pc), column-major in t[c·qr + k].
    std::vector<double> t(qr * pc, 0.0);
    for (std::size_t c = 0; c < pc; ++c) {
      const double* xc = x.data() + c * qc;
      double* tc = t.data() + c * qr;
      for (std::size_t k = 0; k < qr; ++k) {
        double acc = 0.0;
        for (std::size_t l = 0; l < qc; ++l) acc += q(k, l) * xc[l];
        tc[k] = acc;
      }
    }
    // Y = T·Pᵀ: Y[k, i] = Σ_c T[k, c]·P[i, c].
    for (std::size_t i = 0; i < pr; ++i) {
      double* yi = y.data() + i * qr;
      for (std::size_t c = 0; c < pc; ++c) {
        const double pic = scale * p(i, c);
        if (pic == 0.0) continue;
        const double* tc = t.data() + c * qr;
        for (std::size_t k = 0; k < qr; ++k) yi[k] += pic * tc[k];
      }
    }
  } else {
    // Z = X·Pᵀ  (qc × pr), column-major in z[i·qc + l].
    std::vector<double> z(qc * pr, 0.0);
    for (std::size_t i = 0; i < pr; ++i) {
      double* zi = z.data() + i * qc;
      for (std::size_t c = 0; c < pc; ++c) {
        const double pic = p(i, c);
        if (pic == 0.0) continue;
        const double* xc = x.data() + c * qc;
        for (std::size_t l = 0; l < qc; ++l) zi[l] += pic * xc[l];
      }
    }
    // Y = Q·Z.
    for (std::size_t i = 0; i < pr; ++i) {
      const double* zi = z.data() + i * qc;
      double* yi = y.data() + i * qr;
      for (std::size_t k = 0; k < qr; ++k) {
        double acc = 0.0;
        for (std::size_t l = 0; l < qc; ++l) acc += q(k, l) * zi[l];
        yi[k] += scale * acc;
      }
    }
  }
}

inline void check_kron2_input(const DenseMatrix& p, const DenseMatrix& q,
                              std::size_t length, const char* who) {
  if (length != p.cols() * q.cols()) {
    throw ArgumentError(std::string(who) + ": vector length " +
                        std::to_string(length) + " does not match " +
                        to_string(p.shape()) + " (x) " + to_string(q.shape()));
  }
}

}  // namespace detail

/// (P ⊗ Q)·x via vec(Q·unvec(x)·Pᵀ).
inline Vector apply_kron2(const DenseMatrix& p, const DenseMatrix& q,
                          std::span<const double> x) {
  detail::check_kron2_input(p, q, x.size(), "apply_kron2");
  Vector y(p.rows() * q.rows(), 0.0);
  detail::accumulate_kron2(p, q, x, 1.0, y);
  return y;
}

/// (P ⊗ Q)ᵀ·g = (Pᵀ ⊗ Qᵀ)·g
inline Vector apply_kron2_transpose(const DenseMatrix& p, const DenseMatrix& q,
                                    std::span<const double> g) {
  if (g.size() != p.rows() * q.rows()) {
    throw ArgumentError("apply_kron2_transpose: vector length " +
                        std::to_string(g.size()) + " does not match " +
                        to_string(p.shape()) + " (x) " + to_string(q.shape()));
  }
  return apply_kron2(transpose(p), transpose(q), g);
}

}  // namespace lsr

#endif  // LSR_KRON_HPP
