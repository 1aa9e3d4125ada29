#ifndef LSR_TRAIN_HPP
#define LSR_TRAIN_HPP

// Desk-scale training harness: planted synthetic regression tasks and a
// deterministic minibatch loop (SGD with momentum or Adam, constant rate)
// that fits an adapter's factors with the base weight frozen.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "lsr/adapter.hpp"
#include "lsr/dense_matrix.hpp"
#include "lsr/errors.hpp"
#include "lsr/kron.hpp"
#include "lsr/random.hpp"

namespace lsr {

/// ΔW★ = Σ_{i<s} P_i ⊗ Q_i with Gaussian P_i (left) and Q_i (right).
struct PlantKronSum {
  std::size_t s = 1;
  Shape left, right;
};

/// ΔW★ = U·V with inner dimension r.
struct PlantLowRank {
  std::size_t r = 1;
};

struct PlantDense {};

/// ΔW★ = materialize_delta of a randomly drawn LSR-Adapt teacher with all
/// four factor families Gaussian. By the mixed-product rule this is a sum of
/// s² Kronecker products that an adapter with the same plan can represent.
struct PlantAdapter {
  ShapePlan plan;
  std::size_t s = 1;
};

using Plant = std::variant<PlantKronSum, PlantLowRank, PlantDense, PlantAdapter>;

struct SyntheticTask {
  DenseMatrix w;
  DenseMatrix delta_star;  // ‖ΔW★‖_F = 1
  std::vector<Vector> inputs;
  std::vector<Vector> targets;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline DenseMatrix draw_plant(std::size_t w1, std::size_t w2, const Plant& plant,
                              RandomStream rng) {
  struct Visitor {
    std::size_t w1, w2;
    RandomStream& rng;

    DenseMatrix operator()(const PlantKronSum& p) const {
      if (p.s == 0 || p.left.rows * p.right.rows != w1 ||
          p.left.cols * p.right.cols != w2) {
        throw ArgumentError("gen_task: kron_sum plant " + to_string(p.left) + " (x) " +
                            to_string(p.right) + " does not tile " + std::to_string(w1) +
                            "x" + std::to_string(w2));
      }
      DenseMatrix d(w1, w2);
      for (std::size_t i = 0; i < p.s; ++i) {
        const DenseMatrix l = gaussian_matrix(p.left, rng);
        const DenseMatrix r = gaussian_matrix(p.right, rng);
        axpy(1.0, kron(l, r), d);
      }
      return d;
    }
    DenseMatrix operator()(const PlantLowRank& p) const {
      if (p.r == 0) throw ArgumentError("gen_task: low_rank plant needs r >= 1");
      const DenseMatrix u = gaussian_matrix(w1, p.r, rng);
      const DenseMatrix v = gaussian_matrix(p.r, w2, rng);
      return matmul(u, v);
    }
    DenseMatrix operator()(const PlantDense&) const { return gaussian_matrix(w1, w2, rng); }
    DenseMatrix operator()(const PlantAdapter& p) const {
      p.plan.validate();
      if (p.plan.w1 != w1 || p.plan.w2 != w2 || p.s == 0) {
        throw ArgumentError("gen_task: adapter plant plan does not match " +
                            std::to_string(w1) + "x" + std::to_string(w2));
      }
      std::vector<DenseMatrix> a1, a2, b1, b2;
      for (std::size_t k = 0; k < p.s; ++k) {
        a1.push_back(gaussian_matrix(p.plan.a1_shape(), rng));
        a2.push_back(gaussian_matrix(p.plan.a2_shape(), rng));
        b1.push_back(gaussian_matrix(p.plan.b1_shape(), rng));
        b2.push_back(gaussian_matrix(p.plan.b2_shape(), rng));
      }
      return matmul(kron_sum(a1, a2), kron_sum(b1, b2));
    }
  };
  return std::visit(Visitor{w1, w2, rng}, plant);
}

}  // namespace detail

inline SyntheticTask gen_task(std::size_t w1, std::size_t w2, const Plant& plant,
                              std::size_t n_samples, double noise_std, std::uint64_t seed) {
  if (noise_std < 0.0) throw ArgumentError("gen_task: noise_std must be >= 0");
  const RandomStream root = RandomStream(seed).split("task");
  RandomStream w_rng = root.split("w");
  RandomStream x_rng = root.split("inputs");
  RandomStream n_rng = root.split("noise");

  SyntheticTask task{DenseMatrix(w1, w2), DenseMatrix(w1, w2), {}, {}, noise_std, seed};
  task.w = gaussian_matrix(w1, w2, w_rng, std::sqrt(1.0 / static_cast<double>(w2)));
  DenseMatrix delta = detail::draw_plant(w1, w2, plant, root.split("plant"));
  const double norm = frobenius_norm(delta);
  if (norm == 0.0) throw NumericalError("gen_task: planted update is zero");
  task.delta_star = (1.0 / norm) * delta;

  const DenseMatrix full = task.w + task.delta_star;
  task.inputs.reserve(n_samples);
  task.targets.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    Vector x = gaussian_vector(w2, x_rng);
    Vector t = matvec(full, x);
    if (noise_std > 0.0)
      for (double& v : t) v += noise_std * n_rng.normal();
    task.inputs.push_back(std::move(x));
    task.targets.push_back(std::move(t));
  }
  return task;
}

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-2;
  double momentum = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  std::size_t steps = 1000;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  /// Full-dataset loss is recorded at step 0, every log_every steps, and at
  /// the final step.
  std::size_t log_every = 10;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ArgumentError("optimizer: learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0))
      throw ArgumentError("optimizer: momentum must lie in [0, 1)");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
      throw ArgumentError("optimizer: beta1 and beta2 must lie in (0, 1)");
    if (!(eps_hat > 0.0)) throw ArgumentError("optimizer: eps_hat must be > 0");
    if (batch_size == 0) throw ArgumentError("optimizer: batch_size must be >= 1");
    if (log_every == 0) throw ArgumentError("optimizer: log_every must be >= 1");
  }
};

struct TrainReport {
  std::vector<std::size_t> loss_steps;  // step index of each loss_curve entry
  std::vector<double> loss_curve;       // mean of ½‖f(x) − t‖² over the task
  double final_loss = 0.0;
  double recovery_error = 0.0;          // ‖αΔŴ − ΔW★‖_F / ‖ΔW★‖_F
  std::uint64_t trainable_params = 0;
  double wall_time_seconds = 0.0;
};

// Uniform access to the two adapter kinds for the training loop.
namespace adapter_traits {

inline std::vector<DenseMatrix*> parameters(LsrAdaptLayer& l) {
  std::vector<DenseMatrix*> out;
  for (auto* fam : {&l.a1, &l.a2, &l.b1, &l.b2})
    for (auto& m : *fam) out.push_back(&m);
  return out;
}
inline std::vector<DenseMatrix*> parameters(LoraLayer& l) { return {&l.a, &l.b}; }

inline Vector predict(const LsrAdaptLayer& l, std::span<const double> x) { return forward(l, x); }
inline Vector predict(const LoraLayer& l, std::span<const double> x) { return lora_forward(l, x); }

// acc[i] += gradient of parameter i, in parameters() order.
inline void accumulate(const LsrAdaptLayer& l, std::span<const double> x,
                       std::span<const double> g, std::vector<DenseMatrix>& acc) {
  GradientBundle b = backward(l, x, g);
  std::size_t i = 0;
  for (auto* fam : {&b.da1, &b.da2, &b.db1, &b.db2})
    for (auto& m : *fam) axpy(1.0, m, acc[i++]);
}
inline void accumulate(const LoraLayer& l, std::span<const double> x,
                       std::span<const double> g, std::vector<DenseMatrix>& acc) {
  LoraGradients b = lora_backward(l, x, g);
  axpy(1.0, b.da, acc[0]);
  axpy(1.0, b.db, acc[1]);
}

inline std::uint64_t trainable_params(const LsrAdaptLayer& l) {
  return count_params_lsr(l.plan, l.separation_rank());
}
inline std::uint64_t trainable_params(const LoraLayer& l) {
  return count_params_lora(l.w.rows(), l.w.cols(), l.rank());
}

inline DenseMatrix effective_delta(const LsrAdaptLayer& l) {
  return l.alpha * materialize_delta(l);
}
inline DenseMatrix effective_delta(const LoraLayer& l) { return l.alpha * materialize_delta(l); }

inline void validate(const LsrAdaptLayer& l) { l.validate(); }
inline void validate(const LoraLayer& l) { l.validate(); }

}  // namespace adapter_traits

template <class Layer>
double dataset_loss(const Layer& layer, const SyntheticTask& task) {
  if (task.inputs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < task.inputs.size(); ++i) {
    const Vector y = adapter_traits::predict(layer, task.inputs[i]);
    double ssq = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double d = y[j] - task.targets[i][j];
      ssq += d * d;
    }
    total += 0.5 * ssq;
  }
  return total / static_cast<double>(task.inputs.size());
}

template <class Layer>
double recovery_error(const Layer& layer, const SyntheticTask& task) {
  return relative_error(adapter_traits::effective_delta(layer), task.delta_star);
}

namespace detail {

class MinibatchSampler {
 public:
  MinibatchSampler(std::size_t n, std::uint64_t seed)
      : rng_(RandomStream(seed).split("minibatch")), order_(n) {
    reshuffle();
  }

  std::vector<std::size_t> next(std::size_t batch) {
    std::vector<std::size_t> out;
    out.reserve(batch);
    while (out.size() < batch) {
      if (cursor_ == order_.size()) reshuffle();
      out.push_back(order_[cursor_++]);
    }
    return out;
  }

 private:
  void reshuffle() {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    for (std::size_t i = order_.size(); i > 1; --i)
      std::swap(order_[i - 1], order_[rng_.below(i)]);
    cursor_ = 0;
  }

  RandomStream rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg, const std::vector<DenseMatrix*>& params) : cfg_(cfg) {
    for (auto* p : params) {
      first_.emplace_back(p->shape());
      if (cfg.kind == OptimizerKind::adam) second_.emplace_back(p->shape());
    }
  }

  void step(const std::vector<DenseMatrix*>& params, const std::vector<DenseMatrix>& grads) {
    ++t_;
    const double lr = cfg_.learning_rate;
    if (cfg_.kind == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i]->data();
        auto g = grads[i].data();
        auto v = first_[i].data();
        for (std::size_t j = 0; j < p.size(); ++j) {
          v[j] = cfg_.momentum * v[j] + g[j];
          p[j] -= lr * v[j];
        }
      }
      return;
    }
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto p = params[i]->data();
      auto g = grads[i].data();
      auto m = first_[i].data();
      auto v = second_[i].data();
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
        p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.eps_hat);
      }
    }
  }

 private:
  OptimizerConfig cfg_;
  std::vector<DenseMatrix> first_, second_;
  std::size_t t_ = 0;
};

}  // namespace detail

/// Minimizes the task's mean ½‖f(x) − t‖² over the adapter factors in place.
template <class Layer>
TrainReport train(Layer& layer, const SyntheticTask& task, const OptimizerConfig& config) {
  config.validate();
  adapter_traits::validate(layer);
  if (layer.w.shape() != task.w.shape()) {
    throw ArgumentError("train: layer is " + to_string(layer.w.shape()) + ", task is " +
                        to_string(task.w.shape()));
  }
  if (config.steps > 0 && task.inputs.empty()) {
    throw ArgumentError("train: task has no samples");
  }
  const auto started = std::chrono::steady_clock::now();

  TrainReport report;
  report.trainable_params = adapter_traits::trainable_params(layer);
  auto log_loss = [&](std::size_t step) {
    const double loss = dataset_loss(layer, task);
    if (!std::isfinite(loss)) throw DivergenceError(step);
    report.loss_steps.push_back(step);
    report.loss_curve.push_back(loss);
  };
  log_loss(0);

  if (config.steps > 0) {
    const std::size_t n = task.inputs.size();
    const std::size_t batch = std::min(config.batch_size, n);
    const auto params = adapter_traits::parameters(layer);
    detail::Optimizer opt(config, params);
    detail::MinibatchSampler sampler(n, config.seed);
    std::vector<DenseMatrix> grads;
    for (auto* p : params) grads.emplace_back(p->shape());
    const double inv_batch = 1.0 / static_cast<double>(batch);

    for (std::size_t step = 1; step <= config.steps; ++step) {
      for (auto& g : grads) std::fill(g.data().begin(), g.data().end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t idx : sampler.next(batch)) {
        const Vector& x = task.inputs[idx];
        Vector resid = adapter_traits::predict(layer, x);
        for (std::size_t j = 0; j < resid.size(); ++j) {
          resid[j] -= task.targets[idx][j];
          batch_loss += 0.5 * resid[j] * resid[j];
          resid[j] *= inv_batch;
        }
        adapter_traits::accumulate(layer, x, resid, grads);
      }
      if (!std::isfinite(batch_loss)) throw DivergenceError(step);
      opt.step(params, grads);
      if (step % config.log_every == 0 || step == config.steps) log_loss(step);
    }
  }

  report.final_loss = report.loss_curve.back();
  report.recovery_error = recovery_error(layer, task);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

struct CompareReport {
  TrainReport lora;
  TrainReport lsr;
  /// LSR trainable parameters divided by LoRA trainable parameters.
  double param_ratio = 0.0;
};

/// Trains a LoRA layer and an LSR-Adapt layer from their standard inits on the
/// same task with the same optimizer settings.
inline CompareReport compare(const SyntheticTask& task, std::size_t lora_r,
                             const ShapePlan& lsr_plan, std::size_t lsr_s,
                             const OptimizerConfig& config, double alpha = kDefaultAlpha) {
  LoraLayer lora = init_lora(task.w, lora_r, alpha, config.seed);
  LsrAdaptLayer lsr = init_lsr(task.w, lsr_plan, lsr_s, alpha, config.seed);
  CompareReport out;
  out.lora = train(lora, task, config);
  out.lsr = train(lsr, task, config);
  out.param_ratio = static_cast<double>(out.lsr.trainable_params) /
                    static_cast<double>(out.lora.trainable_params);
  return out;
}

}  // namespace lsr

#endif  // LSR_TRAIN_HPP
