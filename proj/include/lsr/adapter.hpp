#ifndef LSR_ADAPTER_HPP
#define LSR_ADAPTER_HPP

// LSR-Adapt layer: a frozen weight W plus a low-rank update whose two LoRA
// factors are themselves sums of Kronecker products,
//
//   y = W·x + α · (Σ_k A1_k ⊗ A2_k) · (Σ_j B1_j ⊗ B2_j) · x
//
// with A1_k: a1×r1, A2_k: a2×r2, B1_j: r1×b1, B2_j: r2×b2 and
// w1 = a1·a2, r = r1·r2, w2 = b1·b2. Per-term scalars are folded into α.
// Also houses the plain LoRA baseline y = W·x + α·A·(B·x).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lsr/dense_matrix.hpp"
#include "lsr/errors.hpp"
#include "lsr/kron.hpp"
#include "lsr/random.hpp"
#include "lsr/separated.hpp"

namespace lsr {

inline constexpr double kDefaultAlpha = 32.0;

struct ShapePlan {
  std::size_t w1 = 1, w2 = 1, r = 1;
  std::size_t a1 = 1, a2 = 1;
  std::size_t r1 = 1, r2 = 1;
  std::size_t b1 = 1, b2 = 1;

  Shape a1_shape() const { return {a1, r1}; }
  Shape a2_shape() const { return {a2, r2}; }
  Shape b1_shape() const { return {r1, b1}; }
  Shape b2_shape() const { return {r2, b2}; }

  void validate() const {
    if (w1 == 0 || w2 == 0 || r == 0 || a1 == 0 || a2 == 0 || r1 == 0 || r2 == 0 ||
        b1 == 0 || b2 == 0) {
      throw ArgumentError("ShapePlan: every extent must be >= 1");
    }
    if (a1 * a2 != w1 || r1 * r2 != r || b1 * b2 != w2) {
      throw ArgumentError("ShapePlan: factor extents do not multiply out (" +
                          std::to_string(a1) + "*" + std::to_string(a2) + " vs " +
                          std::to_string(w1) + ", " + std::to_string(r1) + "*" +
                          std::to_string(r2) + " vs " + std::to_string(r) + ", " +
                          std::to_string(b1) + "*" + std::to_string(b2) + " vs " +
                          std::to_string(w2) + ")");
    }
  }

  friend bool operator==(const ShapePlan&, const ShapePlan&) = default;
};

/// Most balanced divisor pair (p, q) of n with p ≥ q.
inline std::pair<std::size_t, std::size_t> balanced_split(std::size_t n) {
  if (n == 0) throw ArgumentError("balanced_split: n must be positive");
  std::size_t q = 1;
  for (std::size_t d = 1; d * d <= n; ++d) {
    if (n % d == 0) q = d;
  }
  return {n / q, q};
}

inline ShapePlan plan_shapes(std::size_t w1, std::size_t w2, std::size_t r) {
  if (w1 == 0 || w2 == 0 || r == 0) {
    throw ArgumentError("plan_shapes: dimensions must be positive");
  }
  ShapePlan p;
  p.w1 = w1;
  p.w2 = w2;
  p.r = r;
  std::tie(p.a1, p.a2) = balanced_split(w1);
  std::tie(p.r1, p.r2) = balanced_split(r);
  std::tie(p.b1, p.b2) = balanced_split(w2);
  return p;
}

/// s·(a1·r1 + a2·r2) + s·(r1·b1 + r2·b2)
inline std::uint64_t count_params_lsr(const ShapePlan& plan, std::size_t s) {
  const std::uint64_t a_side = plan.a1 * plan.r1 + plan.a2 * plan.r2;
  const std::uint64_t b_side = plan.r1 * plan.b1 + plan.r2 * plan.b2;
  return s * a_side + s * b_side;
}

inline std::uint64_t count_params_lora(std::size_t w1, std::size_t w2, std::size_t r) {
  return std::uint64_t{w1} * r + std::uint64_t{r} * w2;
}

/// Multiply-adds of the matrix-free update α·(ΣA1⊗A2)·((ΣB1⊗B2)·x).
inline std::uint64_t update_cost_matrix_free(const ShapePlan& plan, std::size_t s) {
  return std::uint64_t{s} * (kron2_apply_cost(plan.a1_shape(), plan.a2_shape()) +
                             kron2_apply_cost(plan.b1_shape(), plan.b2_shape()));
}

/// Multiply-adds of forming both Kronecker sums, their product ΔW, and ΔW·x.
inline std::uint64_t update_cost_materialized(const ShapePlan& plan, std::size_t s) {
  const std::uint64_t w1 = plan.w1, w2 = plan.w2, r = plan.r;
  return s * w1 * r + s * r * w2 + w1 * r * w2 + w1 * w2;
}

struct LsrAdaptLayer {
  DenseMatrix w;
  double alpha = kDefaultAlpha;
  ShapePlan plan;
  std::vector<DenseMatrix> a1, a2, b1, b2;  // s entries each

  std::size_t separation_rank() const noexcept { return a1.size(); }

  void validate() const {
    plan.validate();
    if (w.shape() != Shape{plan.w1, plan.w2}) {
      throw ArgumentError("LsrAdaptLayer: W is " + to_string(w.shape()) + ", plan wants " +
                          std::to_string(plan.w1) + "x" + std::to_string(plan.w2));
    }
    const std::size_t s = a1.size();
    if (s == 0 || a2.size() != s || b1.size() != s || b2.size() != s) {
      throw ArgumentError("LsrAdaptLayer: factor families must share a positive length");
    }
    for (std::size_t k = 0; k < s; ++k) {
      if (a1[k].shape() != plan.a1_shape() || a2[k].shape() != plan.a2_shape() ||
          b1[k].shape() != plan.b1_shape() || b2[k].shape() != plan.b2_shape()) {
        throw ArgumentError("LsrAdaptLayer: factor shapes of term " + std::to_string(k) +
                            " do not match the plan");
      }
    }
  }
};

struct GradientBundle {
  std::vector<DenseMatrix> da1, da2, db1, db2;
  Vector dx;
};

/// Gaussian A1, A2 (std √(1/w2)) and B1 (std √(1/r)); B2 zero so the update
/// starts at exactly zero.
inline LsrAdaptLayer init_lsr(DenseMatrix w, const ShapePlan& plan, std::size_t s,
                              double alpha, std::uint64_t seed) {
  plan.validate();
  if (s == 0) throw ArgumentError("init_lsr: separation rank must be positive");
  if (w.shape() != Shape{plan.w1, plan.w2}) {
    throw ArgumentError("init_lsr: W is " + to_string(w.shape()) + ", plan wants " +
                        std::to_string(plan.w1) + "x" + std::to_string(plan.w2));
  }
  LsrAdaptLayer layer{std::move(w), alpha, plan, {}, {}, {}, {}};
  const RandomStream root = RandomStream(seed).split("lsr-init");
  const double a_std = std::sqrt(1.0 / static_cast<double>(plan.w2));
  const double b_std = std::sqrt(1.0 / static_cast<double>(plan.r));
  for (std::size_t k = 0; k < s; ++k) {
    RandomStream term = root.split(k);
    RandomStream ra1 = term.split("a1"), ra2 = term.split("a2"), rb1 = term.split("b1");
    layer.a1.push_back(gaussian_matrix(plan.a1_shape(), ra1, a_std));
    layer.a2.push_back(gaussian_matrix(plan.a2_shape(), ra2, a_std));
    layer.b1.push_back(gaussian_matrix(plan.b1_shape(), rb1, b_std));
    layer.b2.emplace_back(plan.b2_shape());
  }
  return layer;
}

namespace detail {

// Σ_k (P_k ⊗ Q_k)·x
inline Vector apply_kron_sum(const std::vector<DenseMatrix>& ps,
                             const std::vector<DenseMatrix>& qs,
                             std::span<const double> x, std::size_t out_len) {
  Vector y(out_len, 0.0);
  for (std::size_t k = 0; k < ps.size(); ++k) accumulate_kron2(ps[k], qs[k], x, 1.0, y);
  return y;
}

// Σ_k (P_k ⊗ Q_k)ᵀ·g
inline Vector apply_kron_sum_transpose(const std::vector<DenseMatrix>& ps,
                                       const std::vector<DenseMatrix>& qs,
                                       std::span<const double> g, std::size_t out_len) {
  Vector y(out_len, 0.0);
  for (std::size_t k = 0; k < ps.size(); ++k)
    accumulate_kron2(transpose(ps[k]), transpose(qs[k]), g, 1.0, y);
  return y;
}

inline DenseMatrix kron_sum(const std::vector<DenseMatrix>& ps,
                            const std::vector<DenseMatrix>& qs) {
  DenseMatrix out = kron(ps.front(), qs.front());
  for (std::size_t k = 1; k < ps.size(); ++k) axpy(1.0, kron(ps[k], qs[k]), out);
  return out;
}

// Gradients of ⟨G, Q·U·Pᵀ⟩ for one Kronecker term: d/dP = Gᵀ·Q·U and
// d/dQ = G·P·Uᵀ, scaled.
inline void kron_term_gradients(const DenseMatrix& p, const DenseMatrix& q,
                                const DenseMatrix& g_mat, const DenseMatrix& u_mat,
                                double scale, DenseMatrix& dp, DenseMatrix& dq) {
  dp = scale * matmul(matmul(transpose(g_mat), q), u_mat);
  dq = scale * matmul(matmul(g_mat, p), transpose(u_mat));
}

}  // namespace detail

/// W·x + α·(ΣA1⊗A2)·((ΣB1⊗B2)·x), never forming the update matrix.
inline Vector forward(const LsrAdaptLayer& layer, std::span<const double> x) {
  const ShapePlan& p = layer.plan;
  if (x.size() != p.w2) {
    throw ArgumentError("forward: input length " + std::to_string(x.size()) +
                        ", expected " + std::to_string(p.w2));
  }
  Vector y = matvec(layer.w, x);
  if (layer.alpha == 0.0) return y;
  const Vector mid = detail::apply_kron_sum(layer.b1, layer.b2, x, p.r);
  Vector upd(p.w1, 0.0);
  for (std::size_t k = 0; k < layer.a1.size(); ++k)
    detail::accumulate_kron2(layer.a1[k], layer.a2[k], mid, layer.alpha, upd);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += upd[i];
  return y;
}

/// (ΣA1⊗A2)·(ΣB1⊗B2), without α.
inline DenseMatrix materialize_delta(const LsrAdaptLayer& layer) {
  return matmul(detail::kron_sum(layer.a1, layer.a2), detail::kron_sum(layer.b1, layer.b2));
}

/// Gradients of L with respect to every adapter factor and to x, given
/// g = ∂L/∂y. W is frozen and gets no gradient.
inline GradientBundle backward(const LsrAdaptLayer& layer, std::span<const double> x,
                               std::span<const double> g) {
  const ShapePlan& p = layer.plan;
  if (x.size() != p.w2 || g.size() != p.w1) {
    throw ArgumentError("backward: expected x of length " + std::to_string(p.w2) +
                        " and g of length " + std::to_string(p.w1));
  }
  const std::size_t s = layer.separation_rank();
  GradientBundle out;
  out.da1.assign(s, DenseMatrix(p.a1_shape()));
  out.da2.assign(s, DenseMatrix(p.a2_shape()));
  out.db1.assign(s, DenseMatrix(p.b1_shape()));
  out.db2.assign(s, DenseMatrix(p.b2_shape()));
  out.dx = matvec_transposed(layer.w, g);
  if (layer.alpha == 0.0) return out;

  const double alpha = layer.alpha;
  const Vector u = detail::apply_kron_sum(layer.b1, layer.b2, x, p.r);
  const Vector h = detail::apply_kron_sum_transpose(layer.a1, layer.a2, g, p.r);

  // Column-major views: u ↦ r2×r1, g ↦ a2×a1, h ↦ r2×r1, x ↦ b2×b1.
  const DenseMatrix u_mat = unvec(u, {p.r2, p.r1});
  const DenseMatrix g_mat = unvec(g, {p.a2, p.a1});
  const DenseMatrix h_mat = unvec(h, {p.r2, p.r1});
  const DenseMatrix x_mat = unvec(x, {p.b2, p.b1});
  for (std::size_t k = 0; k < s; ++k) {
    detail::kron_term_gradients(layer.a1[k], layer.a2[k], g_mat, u_mat, alpha, out.da1[k],
                                out.da2[k]);
    detail::kron_term_gradients(layer.b1[k], layer.b2[k], h_mat, x_mat, alpha, out.db1[k],
                                out.db2[k]);
  }
  const Vector back = detail::apply_kron_sum_transpose(layer.b1, layer.b2, h, p.w2);
  for (std::size_t i = 0; i < p.w2; ++i) out.dx[i] += alpha * back[i];
  return out;
}

/// ΔW as s² two-factor terms (A1_k·B1_j) ⊗ (A2_k·B2_j), k-major, λ = 1.
inline SeparatedMatrix export_delta_as_separated(const LsrAdaptLayer& layer) {
  SeparatedMatrix out(Shape{layer.plan.w1, layer.plan.w2});
  for (std::size_t k = 0; k < layer.separation_rank(); ++k) {
    for (std::size_t j = 0; j < layer.separation_rank(); ++j) {
      KronTerm t;
      t.lambda = 1.0;
      t.factors.push_back(matmul(layer.a1[k], layer.b1[j]));
      t.factors.push_back(matmul(layer.a2[k], layer.b2[j]));
      out.push_back(std::move(t));
    }
  }
  return out;
}

struct LoraLayer {
  DenseMatrix w;
  double alpha = kDefaultAlpha;
  DenseMatrix a;  // w1 × r
  DenseMatrix b;  // r × w2

  std::size_t rank() const noexcept { return a.cols(); }

  void validate() const {
    if (a.rows() != w.rows() || b.cols() != w.cols() || a.cols() != b.rows()) {
      throw ArgumentError("LoraLayer: A " + to_string(a.shape()) + ", B " +
                          to_string(b.shape()) + " do not fit W " + to_string(w.shape()));
    }
  }
};

struct LoraGradients {
  DenseMatrix da;
  DenseMatrix db;
  Vector dx;
};

/// Gaussian A (std √(1/w2)), zero B.
inline LoraLayer init_lora(DenseMatrix w, std::size_t r, double alpha, std::uint64_t seed) {
  if (r == 0) throw ArgumentError("init_lora: rank must be positive");
  RandomStream rng = RandomStream(seed).split("lora-init");
  const double a_std = std::sqrt(1.0 / static_cast<double>(w.cols()));
  DenseMatrix a = gaussian_matrix(w.rows(), r, rng, a_std);
  DenseMatrix b(r, w.cols());
  LoraLayer layer{std::move(w), alpha, std::move(a), std::move(b)};
  return layer;
}

inline Vector lora_forward(const LoraLayer& layer, std::span<const double> x) {
  if (x.size() != layer.w.cols()) {
    throw ArgumentError("lora_forward: input length " + std::to_string(x.size()) +
                        ", expected " + std::to_string(layer.w.cols()));
  }
  Vector y = matvec(layer.w, x);
  if (layer.alpha == 0.0) return y;
  const Vector bx = matvec(layer.b, x);
  const Vector abx = matvec(layer.a, bx);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += layer.alpha * abx[i];
  return y;
}

inline LoraGradients lora_backward(const LoraLayer& layer, std::span<const double> x,
                                   std::span<const double> g) {
  if (x.size() != layer.w.cols() || g.size() != layer.w.rows()) {
    throw ArgumentError("lora_backward: expected x of length " +
                        std::to_string(layer.w.cols()) + " and g of length " +
                        std::to_string(layer.w.rows()));
  }
  const double alpha = layer.alpha;
  const Vector bx = matvec(layer.b, x);
  const Vector atg = matvec_transposed(layer.a, g);
  LoraGradients out{DenseMatrix(layer.a.shape()), DenseMatrix(layer.b.shape()),
                    matvec_transposed(layer.w, g)};
  for (std::size_t i = 0; i < layer.a.rows(); ++i)
    for (std::size_t j = 0; j < layer.a.cols(); ++j) out.da(i, j) = alpha * g[i] * bx[j];
  for (std::size_t i = 0; i < layer.b.rows(); ++i)
    for (std::size_t j = 0; j < layer.b.cols(); ++j) out.db(i, j) = alpha * atg[i] * x[j];
  const Vector btatg = matvec_transposed(layer.b, atg);
  for (std::size_t i = 0; i < out.dx.size(); ++i) out.dx[i] += alpha * btatg[i];
  return out;
}

/// A·B, without α.
inline DenseMatrix materialize_delta(const LoraLayer& layer) {
  return matmul(layer.a, layer.b);
}

}  // namespace lsr

#endif  // LSR_ADAPTER_HPP
