#ifndef LSR_DENSE_MATRIX_HPP
#define LSR_DENSE_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lsr/errors.hpp"

namespace lsr {

using Vector = std::vector<double>;

struct Shape {
  std::size_t rows = 1;
  std::size_t cols = 1;

  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  return std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

namespace detail {

// Product of two extents, rejecting results that overflow the index range.
inline std::size_t checked_mul(std::size_t a, std::size_t b) {
  constexpr auto limit =
      static_cast<std::size_t>(std::numeric_limits<std::ptrdiff_t>::max());
  if (a != 0 && b > limit / a) {
    throw SizeError("size overflow: " + std::to_string(a) + " * " +
                    std::to_string(b) + " exceeds the platform index range");
  }
  return a * b;
}

}  // namespace detail

/// Row-major matrix of doubles with strictly positive extents.
class DenseMatrix {
 public:
  DenseMatrix() : DenseMatrix(1, 1) {}

  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) {
      throw ArgumentError("matrix extents must be positive, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
    }
    data_.assign(detail::checked_mul(rows, cols), 0.0);
  }

  explicit DenseMatrix(Shape shape) : DenseMatrix(shape.rows, shape.cols) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : DenseMatrix(rows, cols) {
    if (data.size() != data_.size()) {
      throw ArgumentError("matrix payload has " + std::to_string(data.size()) +
                          " entries, expected " + std::to_string(data_.size()));
    }
    data_ = std::move(data);
  }

  /// Builds from nested rows; every row must have the same length.
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    if (rows_ == 0 || cols_ == 0) {
      throw ArgumentError("matrix literal must be non-empty");
    }
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) {
        throw ArgumentError("ragged matrix literal");
      }
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  Shape shape() const noexcept { return {rows_, cols_}; }

  double& operator()(std::size_t i, std::size_t j) noexcept {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  bool all_finite() const noexcept {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline DenseMatrix identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ArgumentError("matmul: inner dimensions differ (" +
                        to_string(a.shape()) + " * " + to_string(b.shape()) +
                        ")");
  }
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aip * b(p, j);
    }
  }
  return c;
}

inline Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) {
    throw ArgumentError("matvec: vector length " + std::to_string(x.size()) +
                        " does not match " + to_string(a.shape()));
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

/// Computes aᵀ·x without forming the transpose.
inline Vector matvec_transposed(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.rows()) {
    throw ArgumentError("matvec_transposed: vector length " +
                        std::to_string(x.size()) + " does not match " +
                        to_string(a.shape()));
  }
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * xi;
  }
  return y;
}

inline DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.shape() != b.shape()) throw ArgumentError("add: shape mismatch");
  DenseMatrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

inline DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.shape() != b.shape()) throw ArgumentError("subtract: shape mismatch");
  DenseMatrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

inline DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

/// y += s·x over matching shapes.
inline void axpy(double s, const DenseMatrix& x, DenseMatrix& y) {
  if (x.shape() != y.shape()) throw ArgumentError("axpy: shape mismatch");
  auto xd = x.data();
  auto yd = y.data();
  for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += s * xd[i];
}

inline double frobenius_norm(const DenseMatrix& a) {
  // Scaled accumulation so tiny and huge entries do not under/overflow.
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : a.data()) {
    if (v == 0.0) continue;
    const double av = std::abs(v);
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

inline double norm2(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

/// Frobenius distance ‖a − b‖ divided by ‖b‖ (or the raw distance when b = 0).
inline double relative_error(const DenseMatrix& a, const DenseMatrix& b) {
  const double ref = frobenius_norm(b);
  const double diff = frobenius_norm(a - b);
  return ref == 0.0 ? diff : diff / ref;
}

inline double relative_error(std::span<const double> a,
                             std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("relative_error: length mismatch");
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] - b[i]) * (a[i] - b[i]);
  const double ref = norm2(b);
  diff = std::sqrt(diff);
  return ref == 0.0 ? diff : diff / ref;
}

}  // namespace lsr

#endif  // LSR_DENSE_MATRIX_HPP
