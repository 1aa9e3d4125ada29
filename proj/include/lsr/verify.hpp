#ifndef LSR_VERIFY_HPP
#define LSR_VERIFY_HPP

// Self-verification suite behind `lsr verify`: Kronecker identities, the
// matrix-free product, the SVD contract, optimal approximation, conditioning,
// gradients against central finite differences, init invariance and a planted
// recovery smoke run. Every check uses a fixed seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lsr/adapter.hpp"
#include "lsr/dense_matrix.hpp"
#include "lsr/kron.hpp"
#include "lsr/random.hpp"
#include "lsr/separated.hpp"
#include "lsr/svd.hpp"
#include "lsr/train.hpp"

namespace lsr {

struct VerifyOptions {
  bool quick = false;
  /// Negates dA1 in the gradient under test; the gradient check must catch it.
  bool inject_fault = false;
  std::uint64_t seed = 20240901;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;       // largest observed error
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

namespace verify_detail {

inline CheckResult named(std::string name) {
  CheckResult r;
  r.name = std::move(name);
  return r;
}

inline std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::size_t dim(RandomStream& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.below(hi - lo + 1);
}

// Entries in [-9, 9], so Kronecker products of a few factors are exact.
inline DenseMatrix integer_matrix(std::size_t rows, std::size_t cols, RandomStream& rng) {
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = static_cast<double>(rng.below(19)) - 9.0;
  return m;
}

inline double block_error(const DenseMatrix& analytic, const DenseMatrix& numeric) {
  const double scale = std::max({frobenius_norm(analytic), frobenius_norm(numeric), 1e-300});
  return frobenius_norm(analytic - numeric) / scale;
}

inline CheckResult kron_identities(std::uint64_t seed, std::size_t trials) {
  CheckResult r = named("kron identities (transpose, mixed product, associativity, norm)");
  r.tolerance = 1e-12;
  RandomStream rng = RandomStream(seed).split("kron-identities");
  bool exact = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t br = dim(rng, 1, 8), bc = dim(rng, 1, 8);
    const std::size_t cr = dim(rng, 1, 8), cc = dim(rng, 1, 8);
    const std::size_t ec = dim(rng, 1, 8), dc = dim(rng, 1, 8);
    const DenseMatrix b = gaussian_matrix(br, bc, rng);
    const DenseMatrix c = gaussian_matrix(cr, cc, rng);
    const DenseMatrix d = gaussian_matrix(bc, dc, rng);
    const DenseMatrix e = gaussian_matrix(cc, ec, rng);

    exact = exact && transpose(kron(b, c)) == kron(transpose(b), transpose(c));
    r.worst = std::max(r.worst, relative_error(kron(b, kron(c, d)), kron(kron(b, c), d)));
    const DenseMatrix bi = integer_matrix(br, bc, rng);
    const DenseMatrix ci = integer_matrix(cr, cc, rng);
    const DenseMatrix di = integer_matrix(bc, dc, rng);
    exact = exact && kron(bi, kron(ci, di)) == kron(kron(bi, ci), di);
    r.worst = std::max(r.worst, relative_error(matmul(kron(b, c), kron(d, e)),
                                               kron(matmul(b, d), matmul(c, e))));
    const double lhs = frobenius_norm(kron(b, c));
    const double rhs = frobenius_norm(b) * frobenius_norm(c);
    r.worst = std::max(r.worst, std::abs(lhs - rhs) / rhs);
  }
  r.passed = exact && r.worst <= r.tolerance;
  r.detail = std::to_string(trials) + " trials" + (exact ? "" : ", exact identity violated");
  return r;
}

inline CheckResult matrix_free(std::uint64_t seed, std::size_t configs) {
  CheckResult r = named("matrix-free apply_kron2 and adapter forward");
  r.tolerance = 1e-10;
  RandomStream rng = RandomStream(seed).split("matrix-free");
  for (std::size_t t = 0; t < configs; ++t) {
    const DenseMatrix p = gaussian_matrix(dim(rng, 1, 8), dim(rng, 1, 8), rng);
    const DenseMatrix q = gaussian_matrix(dim(rng, 1, 8), dim(rng, 1, 8), rng);
    const Vector x = gaussian_vector(p.cols() * q.cols(), rng);
    r.worst = std::max(r.worst, relative_error(apply_kron2(p, q, x), matvec(kron(p, q), x)));
    const Vector g = gaussian_vector(p.rows() * q.rows(), rng);
    r.worst = std::max(r.worst, relative_error(apply_kron2_transpose(p, q, g),
                                               matvec_transposed(kron(p, q), g)));

    const std::size_t w1 = dim(rng, 1, 64), w2 = dim(rng, 1, 64);
    const std::size_t rank = dim(rng, 1, 8), s = dim(rng, 1, 8);
    LsrAdaptLayer layer = init_lsr(gaussian_matrix(w1, w2, rng), plan_shapes(w1, w2, rank), s,
                                   1.0 + rng.uniform(), rng.next_u64());
    for (auto& m : layer.b2) m = gaussian_matrix(m.shape(), rng);
    const Vector xin = gaussian_vector(w2, rng);
    const DenseMatrix full = layer.w + layer.alpha * materialize_delta(layer);
    r.worst = std::max(r.worst, relative_error(forward(layer, xin), matvec(full, xin)));
  }
  r.passed = r.worst <= r.tolerance;
  r.detail = std::to_string(configs) + " configurations, w <= 64, s <= 8";
  return r;
}

inline CheckResult svd_contract(std::uint64_t seed, std::size_t trials) {
  CheckResult r = named("truncated SVD contract");
  r.tolerance = 1e-10;
  RandomStream rng = RandomStream(seed).split("svd");
  bool ordered = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const DenseMatrix m = gaussian_matrix(dim(rng, 1, 12), dim(rng, 1, 12), rng);
    const std::size_t kmax = std::min(m.rows(), m.cols());
    const SvdResult full = truncated_svd(m, kmax);
    for (std::size_t i = 0; i < kmax; ++i) {
      ordered = ordered && full.sigma[i] >= 0.0 && (i == 0 || full.sigma[i] <= full.sigma[i - 1]);
    }
    r.worst = std::max(r.worst, relative_error(reconstruct(full), m));
    r.worst = std::max(r.worst, relative_error(matmul(transpose(full.u), full.u), identity(kmax)));
    r.worst = std::max(r.worst, relative_error(matmul(transpose(full.v), full.v), identity(kmax)));
    const std::size_t k = dim(rng, 1, kmax);
    const SvdResult part = truncated_svd(m, k);
    double tail = 0.0;
    for (std::size_t i = k; i < kmax; ++i) tail += full.sigma[i] * full.sigma[i];
    const double err = frobenius_norm(m - reconstruct(part));
    r.worst = std::max(r.worst, std::abs(err - std::sqrt(tail)) / frobenius_norm(m));
  }
  r.passed = ordered && r.worst <= r.tolerance;
  r.detail = std::to_string(trials) + " random matrices" + (ordered ? "" : ", ordering violated");
  return r;
}

inline CheckResult optimal_approximation(std::uint64_t seed, std::size_t trials) {
  CheckResult r = named("nearest Kronecker sum is optimal and monotone");
  r.tolerance = 1e-8;
  RandomStream rng = RandomStream(seed).split("nearest");
  double exact_fit = 0.0, tail_match = 0.0;
  bool monotone = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const Shape left{dim(rng, 2, 6), dim(rng, 2, 6)};
    const Shape right{dim(rng, 2, 8), dim(rng, 2, 8)};
    const std::size_t kmax =
        std::min(left.rows * left.cols, right.rows * right.cols);
    const std::size_t planted = dim(rng, 2, std::min<std::size_t>(kmax, 5));
    DenseMatrix m(left.rows * right.rows, left.cols * right.cols);
    for (std::size_t i = 0; i < planted; ++i)
      axpy(1.0, kron(gaussian_matrix(left, rng), gaussian_matrix(right, rng)), m);
    const Vector sv = rearranged_singular_values(m, left, right);
    const double norm = frobenius_norm(m);
    double previous = INFINITY;
    for (std::size_t s = 1; s <= planted; ++s) {
      const double err = frobenius_norm(m - materialize(nearest_kron_sum(m, left, right, s)));
      double tail = 0.0;
      for (std::size_t i = s; i < sv.size(); ++i) tail += sv[i] * sv[i];
      tail = std::sqrt(tail);
      if (s == planted) {
        exact_fit = std::max(exact_fit, err / norm);
      } else {
        tail_match = std::max(tail_match, std::abs(err - tail) / tail);
      }
      monotone = monotone && err <= previous * (1.0 + 1e-12);
      previous = err;
    }
  }
  r.worst = std::max(exact_fit, tail_match);
  r.passed = exact_fit <= 1e-8 && tail_match <= 1e-10 && monotone;
  r.detail = "exact-fit rel " + format_short(exact_fit) + ", tail match rel " +
             format_short(tail_match) + (monotone ? "" : ", not monotone");
  return r;
}

inline CheckResult conditioning(std::uint64_t seed) {
  CheckResult r = named("condition number and precision rule");
  r.tolerance = 1e-12;
  RandomStream rng = RandomStream(seed).split("conditioning");
  for (int t = 0; t < 10; ++t) {
    KronTerm term;
    term.lambda = 0.1 + 10.0 * rng.uniform();
    term.factors = {gaussian_matrix(3, 2, rng), gaussian_matrix(2, 4, rng)};
    const SeparatedMatrix s = normalize_terms(SeparatedMatrix(Shape{6, 8}, {term}));
    r.worst = std::max(r.worst, std::abs(condition_number(s) - 1.0));
  }
  KronTerm unit;
  unit.lambda = 1.0;
  unit.factors = {(1.0 / std::sqrt(2.0)) * identity(2), (1.0 / std::sqrt(2.0)) * identity(2)};
  const SeparatedMatrix s(Shape{4, 4}, {unit});
  const bool loose = check_precision(s, {kHalfRoundoff, 1.0});
  const bool tight = !check_precision(s, {kHalfRoundoff, 1e-6});
  const bool boundary = check_precision(s, {kHalfRoundoff, kHalfRoundoff});
  r.passed = r.worst <= r.tolerance && loose && tight && boundary;
  r.detail = std::string("boundary cases ") + (loose && tight && boundary ? "ok" : "WRONG");
  return r;
}

using LsrBackwardFn =
    std::function<GradientBundle(const LsrAdaptLayer&, std::span<const double>, std::span<const double>)>;

inline double fd_lsr(LsrAdaptLayer layer, const Vector& x, const Vector& c,
                     const LsrBackwardFn& grad_fn, double h) {
  const GradientBundle g = grad_fn(layer, x, c);
  auto loss = [&](const LsrAdaptLayer& l, const Vector& xx) { return dot(c, forward(l, xx)); };
  double worst = 0.0;
  auto check_family = [&](std::vector<DenseMatrix>& fam, const std::vector<DenseMatrix>& grads) {
    for (std::size_t k = 0; k < fam.size(); ++k) {
      DenseMatrix numeric(fam[k].shape());
      for (std::size_t i = 0; i < fam[k].size(); ++i) {
        const double keep = fam[k].data()[i];
        fam[k].data()[i] = keep + h;
        const double up = loss(layer, x);
        fam[k].data()[i] = keep - h;
        const double down = loss(layer, x);
        fam[k].data()[i] = keep;
        numeric.data()[i] = (up - down) / (2.0 * h);
      }
      worst = std::max(worst, block_error(grads[k], numeric));
    }
  };
  check_family(layer.a1, g.da1);
  check_family(layer.a2, g.da2);
  check_family(layer.b1, g.db1);
  check_family(layer.b2, g.db2);
  Vector xx = x;
  DenseMatrix numeric(xx.size(), 1);
  for (std::size_t i = 0; i < xx.size(); ++i) {
    const double keep = xx[i];
    xx[i] = keep + h;
    const double up = loss(layer, xx);
    xx[i] = keep - h;
    const double down = loss(layer, xx);
    xx[i] = keep;
    numeric(i, 0) = (up - down) / (2.0 * h);
  }
  worst = std::max(worst, block_error(DenseMatrix(g.dx.size(), 1, g.dx), numeric));
  return worst;
}

inline double fd_lora(LoraLayer layer, const Vector& x, const Vector& c, double h) {
  const LoraGradients g = lora_backward(layer, x, c);
  auto loss = [&](const LoraLayer& l, const Vector& xx) { return dot(c, lora_forward(l, xx)); };
  double worst = 0.0;
  for (auto [param, grad] : {std::pair{&layer.a, &g.da}, std::pair{&layer.b, &g.db}}) {
    DenseMatrix numeric(param->shape());
    for (std::size_t i = 0; i < param->size(); ++i) {
      const double keep = param->data()[i];
      param->data()[i] = keep + h;
      const double up = loss(layer, x);
      param->data()[i] = keep - h;
      const double down = loss(layer, x);
      param->data()[i] = keep;
      numeric.data()[i] = (up - down) / (2.0 * h);
    }
    worst = std::max(worst, block_error(*grad, numeric));
  }
  Vector xx = x;
  DenseMatrix numeric(xx.size(), 1);
  for (std::size_t i = 0; i < xx.size(); ++i) {
    const double keep = xx[i];
    xx[i] = keep + h;
    const double up = loss(layer, xx);
    xx[i] = keep - h;
    const double down = loss(layer, xx);
    xx[i] = keep;
    numeric(i, 0) = (up - down) / (2.0 * h);
  }
  return std::max(worst, block_error(DenseMatrix(g.dx.size(), 1, g.dx), numeric));
}

inline CheckResult gradients(std::uint64_t seed, std::size_t instances, bool inject_fault) {
  CheckResult r = named("backward and lora_backward vs central finite differences");
  r.tolerance = 1e-5;
  RandomStream rng = RandomStream(seed).split("gradients");
  LsrBackwardFn grad_fn = [inject_fault](const LsrAdaptLayer& l, std::span<const double> x,
                                         std::span<const double> g) {
    GradientBundle b = backward(l, x, g);
    if (inject_fault)
      for (auto& m : b.da1) m = -1.0 * m;
    return b;
  };
  static constexpr std::size_t kDims[] = {1, 2, 4, 6, 8, 9, 12, 16};
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t w1 = kDims[rng.below(std::size(kDims))];
    const std::size_t w2 = kDims[rng.below(std::size(kDims))];
    const std::size_t rank = dim(rng, 1, 4), s = dim(rng, 1, 3);
    const double alpha = t % 2 == 0 ? 1.0 : kDefaultAlpha;
    LsrAdaptLayer layer = init_lsr(gaussian_matrix(w1, w2, rng), plan_shapes(w1, w2, rank), s,
                                   alpha, rng.next_u64());
    for (auto& m : layer.b2) m = gaussian_matrix(m.shape(), rng);
    const Vector x = gaussian_vector(w2, rng);
    const Vector c = gaussian_vector(w1, rng);
    r.worst = std::max(r.worst, fd_lsr(layer, x, c, grad_fn, 1e-6));

    LoraLayer lora = init_lora(gaussian_matrix(w1, w2, rng), rank, alpha, rng.next_u64());
    lora.b = gaussian_matrix(lora.b.shape(), rng);
    r.worst = std::max(r.worst, fd_lora(lora, x, c, 1e-6));
  }
  r.passed = r.worst <= r.tolerance;
  r.detail = std::to_string(instances) + " instances, step 1e-6" +
             (inject_fault ? " (fault injected)" : "");
  return r;
}

inline CheckResult init_invariance(std::uint64_t seed) {
  CheckResult r = named("adapter init leaves the base layer unchanged");
  r.tolerance = 1e-15;
  RandomStream rng = RandomStream(seed).split("init");
  bool a_zero = true, b2_live = true;
  for (int t = 0; t < 5; ++t) {
    const std::size_t w1 = dim(rng, 2, 32), w2 = dim(rng, 2, 32);
    const LsrAdaptLayer layer = init_lsr(gaussian_matrix(w1, w2, rng),
                                         plan_shapes(w1, w2, dim(rng, 1, 8)), dim(rng, 1, 4),
                                         kDefaultAlpha, rng.next_u64());
    const Vector x = gaussian_vector(w2, rng);
    const Vector y = forward(layer, x);
    const Vector base = matvec(layer.w, x);
    for (std::size_t i = 0; i < y.size(); ++i) r.worst = std::max(r.worst, std::abs(y[i] - base[i]));
    const GradientBundle g = backward(layer, x, gaussian_vector(w1, rng));
    for (const auto* fam : {&g.da1, &g.da2})
      for (const auto& m : *fam)
        for (double v : m.data()) a_zero = a_zero && v == 0.0;
    bool any = false;
    for (const auto& m : g.db2)
      for (double v : m.data()) any = any || v != 0.0;
    b2_live = b2_live && any;
  }
  r.passed = r.worst <= r.tolerance && a_zero && b2_live;
  r.detail = std::string(a_zero ? "A-side grads zero" : "A-side grads NONZERO") +
             (b2_live ? ", B2 grads live" : ", B2 grads DEAD");
  return r;
}

inline CheckResult planted_recovery() {
  CheckResult r = named("planted recovery smoke run (48x48, s = 4, Adam)");
  r.tolerance = 1e-2;
  const ShapePlan plan = plan_shapes(48, 48, 4);
  constexpr std::uint64_t kSeed = 7;
  const SyntheticTask task = gen_task(48, 48, PlantAdapter{plan, 2}, 256, 0.0, kSeed);
  LsrAdaptLayer layer = init_lsr(task.w, plan, 4, kDefaultAlpha, kSeed);
  OptimizerConfig cfg;
  cfg.steps = 5000;
  cfg.batch_size = 32;
  cfg.seed = kSeed;
  cfg.log_every = 500;
  const TrainReport report = train(layer, task, cfg);
  r.worst = report.recovery_error;
  r.passed = r.worst <= r.tolerance;
  r.detail = "final loss " + format_short(report.final_loss);
  return r;
}

}  // namespace verify_detail

/// Runs every check; quick mode shrinks trial counts and skips the training run.
inline std::vector<CheckResult> run_verify(const VerifyOptions& opt) {
  namespace vd = verify_detail;
  const std::size_t scale = opt.quick ? 4 : 1;
  std::vector<std::function<CheckResult()>> checks = {
      [&] { return vd::kron_identities(opt.seed, 200 / scale); },
      [&] { return vd::matrix_free(opt.seed, 100 / scale); },
      [&] { return vd::svd_contract(opt.seed, 100 / scale); },
      [&] { return vd::optimal_approximation(opt.seed, 20 / scale); },
      [&] { return vd::conditioning(opt.seed); },
      [&] { return vd::gradients(opt.seed, 20 / scale, opt.inject_fault); },
      [&] { return vd::init_invariance(opt.seed); },
  };
  if (!opt.quick) checks.push_back([] { return vd::planted_recovery(); });

  std::vector<CheckResult> out;
  for (auto& check : checks) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r.name = "check " + std::to_string(out.size() + 1);
      r.passed = false;
      r.detail = std::string("threw: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace lsr

#endif  // LSR_VERIFY_HPP
