#ifndef LSR_TESTS_SUPPORT_HPP
#define LSR_TESTS_SUPPORT_HPP

// Reference implementations used as oracles. None of these call into the
// library's own algorithms beyond the container type.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "lsr/dense_matrix.hpp"

namespace oracle {

using lsr::DenseMatrix;
using lsr::Vector;

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen,
                                 double stddev = 1.0) {
  std::normal_distribution<double> dist(0.0, stddev);
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = dist(gen);
  return m;
}

// Small integer entries keep every product and sum exactly representable.
inline DenseMatrix random_int_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> dist(-9, 9);
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = dist(gen);
  return m;
}

inline Vector random_vector(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

inline std::size_t random_dim(std::mt19937_64& gen, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
}

/// Block expansion: block (i, j) of the result is U(i, j)·V.
inline DenseMatrix naive_kron(const DenseMatrix& u, const DenseMatrix& v) {
  DenseMatrix out(u.rows() * v.rows(), u.cols() * v.cols());
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t j = 0; j < u.cols(); ++j)
      for (std::size_t k = 0; k < v.rows(); ++k)
        for (std::size_t l = 0; l < v.cols(); ++l)
          out(i * v.rows() + k, j * v.cols() + l) = u(i, j) * v(k, l);
  return out;
}

inline DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

inline Vector naive_matvec(const DenseMatrix& a, const Vector& x) {
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) y[i] += a(i, k) * x[k];
  return y;
}

inline DenseMatrix naive_transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline double frob(const DenseMatrix& a) {
  long double ssq = 0.0L;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) ssq += static_cast<long double>(a(i, j)) * a(i, j);
  return static_cast<double>(std::sqrt(ssq));
}

inline double norm(const Vector& v) {
  long double ssq = 0.0L;
  for (double x : v) ssq += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(ssq));
}

inline double rel_err(const DenseMatrix& got, const DenseMatrix& want) {
  DenseMatrix d(want.rows(), want.cols());
  for (std::size_t i = 0; i < want.rows(); ++i)
    for (std::size_t j = 0; j < want.cols(); ++j) d(i, j) = got(i, j) - want(i, j);
  const double n = frob(want);
  return n == 0.0 ? frob(d) : frob(d) / n;
}

inline double rel_err(const Vector& got, const Vector& want) {
  Vector d(want.size());
  for (std::size_t i = 0; i < want.size(); ++i) d[i] = got[i] - want[i];
  const double n = norm(want);
  return n == 0.0 ? norm(d) : norm(d) / n;
}

inline Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
  DenseMatrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

/// Singular values in descending order, from Eigen's two-sided Jacobi SVD.
inline std::vector<double> eigen_singular_values(const DenseMatrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  const auto& s = svd.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

/// sqrt(Σ_{i ≥ k} σ_i²) using Eigen's singular values.
inline double svd_tail(const DenseMatrix& m, std::size_t k) {
  const auto s = eigen_singular_values(m);
  double ssq = 0.0;
  for (std::size_t i = k; i < s.size(); ++i) ssq += s[i] * s[i];
  return std::sqrt(ssq);
}

/// Reference rearrangement written from the defining property: row
/// (j·left.rows + i) of R(M) is the column-major vec of block (i, j).
inline DenseMatrix naive_rearrange(const DenseMatrix& m, lsr::Shape left, lsr::Shape right) {
  DenseMatrix out(left.rows * left.cols, right.rows * right.cols);
  for (std::size_t i = 0; i < left.rows; ++i)
    for (std::size_t j = 0; j < left.cols; ++j)
      for (std::size_t q = 0; q < right.cols; ++q)
        for (std::size_t p = 0; p < right.rows; ++p)
          out(j * left.rows + i, q * right.rows + p) = m(i * right.rows + p, j * right.cols + q);
  return out;
}

/// Central differences of a scalar function over every entry of `m`.
inline DenseMatrix fd_gradient(DenseMatrix& m, const std::function<double()>& loss,
                               double h = 1e-6) {
  DenseMatrix g(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double keep = m(i, j);
      m(i, j) = keep + h;
      const double up = loss();
      m(i, j) = keep - h;
      const double down = loss();
      m(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * h);
    }
  return g;
}

inline Vector fd_gradient(Vector& v, const std::function<double()>& loss, double h = 1e-6) {
  Vector g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double keep = v[i];
    v[i] = keep + h;
    const double up = loss();
    v[i] = keep - h;
    const double down = loss();
    v[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double dot(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace oracle

#endif  // LSR_TESTS_SUPPORT_HPP
