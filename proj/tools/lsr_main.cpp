// lsr: command-line front end for the low separation rank library.
//
//   lsr gen      write a random or planted Kronecker-sum matrix
//   lsr approx   nearest Kronecker-sum approximation with conditioning report
//   lsr params   LoRA vs LSR-Adapt trainable parameter counts
//   lsr train    fit an adapter (or compare both) on a planted task
//   lsr bench    matrix-free vs materialized adapter update timing
//   lsr verify   self-verification suite
//
// Exit codes: 0 ok, 1 verification failure, 2 usage, 3 I/O, 4 numerical,
// 5 divergence.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsr/adapter.hpp"
#include "lsr/io.hpp"
#include "lsr/separated.hpp"
#include "lsr/train.hpp"
#include "lsr/verify.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kUsage = 2,
  kIo = 3,
  kNumerical = 4,
  kDivergence = 5,
};

lsr::Shape parse_shape(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw lsr::ArgumentError("shape '" + text + "' is not RxC");
  try {
    std::size_t used = 0;
    const auto rows = std::stoull(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const std::string rest = text.substr(x + 1);
    const auto cols = std::stoull(rest, &used);
    if (used != rest.size() || rows == 0 || cols == 0) throw std::invalid_argument(text);
    return {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)};
  } catch (const std::logic_error&) {
    throw lsr::ArgumentError("shape '" + text + "' is not RxC with positive integers");
  }
}

std::uint64_t mem_cap_bytes() {
  std::uint64_t mb = 512;
  if (const char* env = std::getenv("LSR_MEM_CAP_MB")) {
    try {
      mb = std::stoull(env);
    } catch (const std::logic_error&) {
      throw lsr::ArgumentError(std::string("LSR_MEM_CAP_MB='") + env + "' is not an integer");
    }
  }
  return mb * 1024 * 1024;
}

std::string fmt(double v, const char* pattern = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string kind = "kron";
  std::string left = "2x2", right = "3x3", shape = "6x6";
  std::size_t s = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "text";
};

int cmd_gen(const GenArgs& a) {
  lsr::RandomStream rng = lsr::RandomStream(a.seed).split("gen");
  lsr::DenseMatrix m;
  if (a.kind == "kron") {
    const auto left = parse_shape(a.left), right = parse_shape(a.right);
    m = lsr::DenseMatrix(left.rows * right.rows, left.cols * right.cols);
    for (std::size_t i = 0; i < a.s; ++i) {
      const auto p = lsr::gaussian_matrix(left, rng);
      const auto q = lsr::gaussian_matrix(right, rng);
      lsr::axpy(1.0, lsr::kron(p, q), m);
    }
  } else {
    m = lsr::gaussian_matrix(parse_shape(a.shape), rng);
  }
  lsr::write_matrix(a.out, m,
                    a.format == "binary" ? lsr::MatrixFormat::binary : lsr::MatrixFormat::text);
  std::cout << "wrote " << m.rows() << "x" << m.cols() << " matrix to " << a.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// approx

struct ApproxArgs {
  std::string input;
  std::string left, right;
  std::vector<std::size_t> s = {1};
  std::string out_dir;
  std::string report;
  double epsilon = 1e-6;
};

int cmd_approx(const ApproxArgs& a) {
  const auto left = parse_shape(a.left), right = parse_shape(a.right);
  const lsr::DenseMatrix m = lsr::read_matrix(a.input);
  // M, R(M), the SVD work arrays and one materialization.
  if (4 * 8 * static_cast<std::uint64_t>(m.size()) > mem_cap_bytes()) {
    throw lsr::SizeError("input exceeds LSR_MEM_CAP_MB for approximation");
  }
  const double norm = lsr::frobenius_norm(m);

  std::vector<std::string> table_manifests;
  std::ostringstream table;
  table << "# input " << a.input << " " << m.rows() << "x" << m.cols() << ", left "
        << lsr::to_string(left) << ", right " << lsr::to_string(right) << ", epsilon "
        << fmt(a.epsilon, "%.3g") << "\n";
  table << "s  kept  frob_error  rel_error  gamma  fp16_ok  fp32_ok  lambdas\n";
  for (std::size_t s : a.s) {
    const lsr::SeparatedMatrix full = lsr::nearest_kron_sum(m, left, right, s);
    const double lead = full.terms().empty() ? 0.0 : full.terms().front().lambda;
    lsr::SeparatedMatrix kept(m.shape());
    std::string lambdas;
    for (const auto& t : full.terms()) {
      const bool drop = !(t.lambda > 1e-13 * lead);
      if (!drop) kept.push_back(t);
      if (!lambdas.empty()) lambdas += ",";
      lambdas += drop ? "0" : fmt(t.lambda, "%.6g");
    }
    const double err = lsr::frobenius_norm(m - lsr::materialize(kept));
    const double gamma = lsr::condition_number(kept);
    const bool fp16 = lsr::check_precision(kept, {lsr::kHalfRoundoff, a.epsilon});
    const bool fp32 = lsr::check_precision(kept, {lsr::kSingleRoundoff, a.epsilon});
    table << s << "  " << kept.separation_rank() << "  " << fmt(err, "%.6e") << "  "
          << fmt(norm == 0.0 ? err : err / norm, "%.6e") << "  " << fmt(gamma, "%.12f") << "  "
          << (fp16 ? "yes" : "no") << "  " << (fp32 ? "yes" : "no") << "  " << lambdas << "\n";
    const std::filesystem::path input(a.input);
    const std::filesystem::path dir =
        a.out_dir.empty() ? input.parent_path() : std::filesystem::path(a.out_dir);
    if (!dir.empty()) std::filesystem::create_directories(dir);
    const auto manifest = dir / (input.stem().string() + ".s" + std::to_string(s) + ".manifest");
    lsr::write_separated(manifest, kept);
    table_manifests.push_back(manifest.string());
  }
  for (const auto& m : table_manifests) table << "# wrote " << m << "\n";
  std::cout << table.str();
  if (!a.report.empty()) lsr::detail::write_file(a.report, table.str());
  return kOk;
}

// ---------------------------------------------------------------------------
// params

struct ParamsArgs {
  std::size_t w1 = 768, w2 = 768, r = 8, s = 16;
};

int cmd_params(const ParamsArgs& a) {
  const lsr::ShapePlan plan = lsr::plan_shapes(a.w1, a.w2, a.r);
  const auto lora = lsr::count_params_lora(a.w1, a.w2, a.r);
  const auto lsr_count = lsr::count_params_lsr(plan, a.s);
  std::cout << "plan         A1 " << plan.a1 << "x" << plan.r1 << ", A2 " << plan.a2 << "x"
            << plan.r2 << ", B1 " << plan.r1 << "x" << plan.b1 << ", B2 " << plan.r2 << "x"
            << plan.b2 << ", s " << a.s << "\n";
  std::cout << "lora_params  " << lora << "\n";
  std::cout << "lsr_params   " << lsr_count << "\n";
  std::cout << "ratio        "
            << fmt(static_cast<double>(lsr_count) / static_cast<double>(lora), "%.6f") << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::size_t w1 = 48, w2 = 48;
  std::string plant = "adapter";
  std::size_t plant_s = 2;
  std::size_t plant_r = 4;
  std::string plant_left, plant_right;
  std::size_t samples = 256;
  double noise = 0.0;
  std::string adapter = "lsr";
  std::size_t r = 4, s = 4, lora_r = 0;
  double alpha = lsr::kDefaultAlpha;
  std::string optimizer = "adam";
  lsr::OptimizerConfig opt;
  std::string report, curve;
  bool timing = false;
};

lsr::Plant make_plant(const TrainArgs& a) {
  if (a.plant == "adapter") return lsr::PlantAdapter{lsr::plan_shapes(a.w1, a.w2, a.plant_r), a.plant_s};
  if (a.plant == "kron_sum") {
    if (a.plant_left.empty() || a.plant_right.empty())
      throw lsr::ArgumentError("--plant kron_sum needs --plant-left and --plant-right");
    return lsr::PlantKronSum{a.plant_s, parse_shape(a.plant_left), parse_shape(a.plant_right)};
  }
  if (a.plant == "low_rank") return lsr::PlantLowRank{a.plant_r};
  return lsr::PlantDense{};
}

void append_report(std::string& out, const std::string& prefix, const lsr::TrainReport& r,
                   bool timing) {
  out += prefix + "trainable_params=" + std::to_string(r.trainable_params) + "\n";
  out += prefix + "initial_loss=" + lsr::format_double(r.loss_curve.front()) + "\n";
  out += prefix + "final_loss=" + lsr::format_double(r.final_loss) + "\n";
  out += prefix + "recovery_error=" + lsr::format_double(r.recovery_error) + "\n";
  out += prefix + "loss_points=" + std::to_string(r.loss_curve.size()) + "\n";
  if (timing) out += prefix + "wall_time_seconds=" + lsr::format_double(r.wall_time_seconds) + "\n";
}

int cmd_train(TrainArgs a) {
  a.opt.kind = a.optimizer == "sgd" ? lsr::OptimizerKind::sgd : lsr::OptimizerKind::adam;
  const lsr::SyntheticTask task =
      lsr::gen_task(a.w1, a.w2, make_plant(a), a.samples, a.noise, a.opt.seed);
  const lsr::ShapePlan plan = lsr::plan_shapes(a.w1, a.w2, a.r);
  const std::size_t lora_r = a.lora_r == 0 ? a.r : a.lora_r;

  std::string report = "adapter=" + a.adapter + "\n";
  report += "w1=" + std::to_string(a.w1) + "\nw2=" + std::to_string(a.w2) + "\n";
  report += "plant=" + a.plant + "\nseed=" + std::to_string(a.opt.seed) + "\n";
  report += "steps=" + std::to_string(a.opt.steps) + "\n";
  std::string curve;

  if (a.adapter == "compare") {
    const lsr::CompareReport c = lsr::compare(task, lora_r, plan, a.s, a.opt, a.alpha);
    append_report(report, "lora.", c.lora, a.timing);
    append_report(report, "lsr.", c.lsr, a.timing);
    report += "param_ratio=" + lsr::format_double(c.param_ratio) + "\n";
    curve = "step,lora_loss,lsr_loss\n";
    for (std::size_t i = 0; i < c.lsr.loss_curve.size(); ++i) {
      curve += std::to_string(c.lsr.loss_steps[i]) + "," +
               lsr::format_double(c.lora.loss_curve[i]) + "," +
               lsr::format_double(c.lsr.loss_curve[i]) + "\n";
    }
    std::cout << "lora  params " << c.lora.trainable_params << "  final_loss "
              << fmt(c.lora.final_loss, "%.6e") << "  recovery_error "
              << fmt(c.lora.recovery_error, "%.6e") << "  time "
              << fmt(c.lora.wall_time_seconds, "%.2f") << "s\n";
    std::cout << "lsr   params " << c.lsr.trainable_params << "  final_loss "
              << fmt(c.lsr.final_loss, "%.6e") << "  recovery_error "
              << fmt(c.lsr.recovery_error, "%.6e") << "  time "
              << fmt(c.lsr.wall_time_seconds, "%.2f") << "s\n";
    std::cout << "param_ratio " << fmt(c.param_ratio, "%.6f") << "\n";
  } else {
    lsr::TrainReport r;
    if (a.adapter == "lora") {
      lsr::LoraLayer layer = lsr::init_lora(task.w, lora_r, a.alpha, a.opt.seed);
      r = lsr::train(layer, task, a.opt);
    } else {
      lsr::LsrAdaptLayer layer = lsr::init_lsr(task.w, plan, a.s, a.alpha, a.opt.seed);
      r = lsr::train(layer, task, a.opt);
    }
    append_report(report, "", r, a.timing);
    curve = "step,loss\n";
    for (std::size_t i = 0; i < r.loss_curve.size(); ++i)
      curve += std::to_string(r.loss_steps[i]) + "," + lsr::format_double(r.loss_curve[i]) + "\n";
    std::cout << a.adapter << "  params " << r.trainable_params << "  final_loss "
              << fmt(r.final_loss, "%.6e") << "  recovery_error "
              << fmt(r.recovery_error, "%.6e") << "  time " << fmt(r.wall_time_seconds, "%.2f")
              << "s\n";
  }
  if (!a.report.empty()) lsr::detail::write_file(a.report, report);
  if (!a.curve.empty()) lsr::detail::write_file(a.curve, curve);
  return kOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::size_t w1 = 768, w2 = 768, r = 4, s = 16, repeats = 5;
  std::uint64_t seed = 0;
};

template <class F>
double median_ns(std::size_t repeats, F&& op) {
  std::vector<double> ns;
  for (std::size_t i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    op();
    const auto t1 = std::chrono::steady_clock::now();
    ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
  }
  std::sort(ns.begin(), ns.end());
  return ns.size() % 2 ? ns[ns.size() / 2] : 0.5 * (ns[ns.size() / 2 - 1] + ns[ns.size() / 2]);
}

int cmd_bench(const BenchArgs& a) {
  if (a.repeats == 0) throw lsr::ArgumentError("--repeats must be >= 1");
  const lsr::ShapePlan plan = lsr::plan_shapes(a.w1, a.w2, a.r);
  lsr::RandomStream rng = lsr::RandomStream(a.seed).split("bench");
  // W·x is shared by both paths, so only the update is timed and W stays a stub.
  lsr::LsrAdaptLayer layer{lsr::DenseMatrix(1, 1), 1.0, plan, {}, {}, {}, {}};
  for (std::size_t k = 0; k < a.s; ++k) {
    layer.a1.push_back(lsr::gaussian_matrix(plan.a1_shape(), rng));
    layer.a2.push_back(lsr::gaussian_matrix(plan.a2_shape(), rng));
    layer.b1.push_back(lsr::gaussian_matrix(plan.b1_shape(), rng));
    layer.b2.push_back(lsr::gaussian_matrix(plan.b2_shape(), rng));
  }
  const lsr::Vector x = lsr::gaussian_vector(a.w2, rng);

  const auto mf_cost = lsr::update_cost_matrix_free(plan, a.s);
  const auto mat_cost = lsr::update_cost_materialized(plan, a.s);
  volatile double sink = 0.0;
  const double mf_ns = median_ns(a.repeats, [&] {
    const auto mid = lsr::detail::apply_kron_sum(layer.b1, layer.b2, x, plan.r);
    const auto y = lsr::detail::apply_kron_sum(layer.a1, layer.a2, mid, plan.w1);
    sink = sink + y.front();
  });

  const std::uint64_t mat_bytes =
      8 * (std::uint64_t{plan.w1} * plan.w2 + 2 * std::uint64_t{plan.w1} * plan.r +
           2 * std::uint64_t{plan.r} * plan.w2);
  const bool skip = mat_bytes > mem_cap_bytes();
  std::optional<double> mat_ns;
  if (!skip) {
    mat_ns = median_ns(a.repeats, [&] {
      const auto y = lsr::matvec(lsr::materialize_delta(layer), x);
      sink = sink + y.front();
    });
  }

  std::cout << "# bench w1=" << a.w1 << " w2=" << a.w2 << " r=" << a.r << " s=" << a.s
            << " repeats=" << a.repeats << "\n";
  std::cout << "path          median_ns     multiply_adds\n";
  std::cout << "matrix_free   " << fmt(mf_ns, "%.0f") << "  " << mf_cost << "\n";
  std::cout << "materialized  " << (mat_ns ? fmt(*mat_ns, "%.0f") : std::string("skipped"))
            << "  " << mat_cost << "\n";
  std::cout << "flop_ratio    "
            << fmt(static_cast<double>(mat_cost) / static_cast<double>(mf_cost), "%.6f") << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(bool quick, bool inject_fault) {
  const auto results = lsr::run_verify({quick, inject_fault});
  bool all = true;
  std::cout << "status  worst       tolerance  seconds  check\n";
  for (const auto& r : results) {
    all = all && r.passed;
    std::cout << (r.passed ? "PASS    " : "FAIL    ") << fmt(r.worst, "%.3e") << "   "
              << fmt(r.tolerance, "%.0e") << "      " << fmt(r.seconds, "%.2f") << "     "
              << r.name << " [" << r.detail << "]\n";
  }
  std::cout << (all ? "all checks passed" : "verification FAILED") << "\n";
  return all ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low separation rank matrices and the LSR-Adapt adapter kernel"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a random or planted Kronecker-sum matrix");
  gen_cmd->add_option("--kind", gen.kind, "kron | random")->check(CLI::IsMember({"kron", "random"}));
  gen_cmd->add_option("--left", gen.left, "left factor shape RxC (kron)");
  gen_cmd->add_option("--right", gen.right, "right factor shape RxC (kron)");
  gen_cmd->add_option("--shape", gen.shape, "matrix shape RxC (random)");
  gen_cmd->add_option("--s", gen.s, "number of planted Kronecker terms")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--out", gen.out, "output path")->required();
  gen_cmd->add_option("--format", gen.format, "text | binary")
      ->check(CLI::IsMember({"text", "binary"}));

  ApproxArgs approx;
  auto* approx_cmd = app.add_subcommand("approx", "Nearest Kronecker-sum approximation");
  approx_cmd->add_option("--input", approx.input, "matrix file (text or binary)")->required();
  approx_cmd->add_option("--left", approx.left, "left factor shape RxC")->required();
  approx_cmd->add_option("--right", approx.right, "right factor shape RxC")->required();
  approx_cmd->add_option("--s", approx.s, "separation rank(s) to evaluate")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  approx_cmd->add_option("--out", approx.out_dir, "directory for manifests and factor files (default: next to the input)");
  approx_cmd->add_option("--report", approx.report, "write the table to this path");
  approx_cmd->add_option("--epsilon", approx.epsilon, "target accuracy for the precision rule")
      ->check(CLI::PositiveNumber);

  ParamsArgs params;
  auto* params_cmd = app.add_subcommand("params", "Trainable parameter counts");
  params_cmd->add_option("--w1", params.w1, "output dimension")->check(CLI::PositiveNumber);
  params_cmd->add_option("--w2", params.w2, "input dimension")->check(CLI::PositiveNumber);
  params_cmd->add_option("--r", params.r, "inner rank")->check(CLI::PositiveNumber);
  params_cmd->add_option("--s", params.s, "separation rank")->check(CLI::PositiveNumber);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Fit adapters on a planted synthetic task");
  train_cmd->add_option("--w1", train.w1, "output dimension")->check(CLI::PositiveNumber);
  train_cmd->add_option("--w2", train.w2, "input dimension")->check(CLI::PositiveNumber);
  train_cmd->add_option("--plant", train.plant, "adapter | kron_sum | low_rank | dense")
      ->check(CLI::IsMember({"adapter", "kron_sum", "low_rank", "dense"}));
  train_cmd->add_option("--plant-s", train.plant_s, "planted separation rank")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--plant-r", train.plant_r, "planted inner rank")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--plant-left", train.plant_left, "kron_sum left factor shape RxC");
  train_cmd->add_option("--plant-right", train.plant_right, "kron_sum right factor shape RxC");
  train_cmd->add_option("--samples", train.samples, "number of samples");
  train_cmd->add_option("--noise", train.noise, "target noise std")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--adapter", train.adapter, "lsr | lora | compare")
      ->check(CLI::IsMember({"lsr", "lora", "compare"}));
  train_cmd->add_option("--r", train.r, "adapter inner rank")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lora-r", train.lora_r, "LoRA rank when it differs from --r");
  train_cmd->add_option("--s", train.s, "adapter separation rank")->check(CLI::PositiveNumber);
  train_cmd->add_option("--alpha", train.alpha, "update scaling");
  train_cmd->add_option("--optimizer", train.optimizer, "sgd | adam")
      ->check(CLI::IsMember({"sgd", "adam"}));
  train_cmd->add_option("--lr", train.opt.learning_rate, "learning rate")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--momentum", train.opt.momentum, "sgd momentum in [0, 1)")
      ->check(CLI::Range(0.0, 0.999999));
  train_cmd->add_option("--beta1", train.opt.beta1, "adam beta1")->check(CLI::Range(1e-12, 0.999999));
  train_cmd->add_option("--beta2", train.opt.beta2, "adam beta2")->check(CLI::Range(1e-12, 0.999999));
  train_cmd->add_option("--eps-hat", train.opt.eps_hat, "adam epsilon")->check(CLI::PositiveNumber);
  train_cmd->add_option("--steps", train.opt.steps, "optimizer steps");
  train_cmd->add_option("--batch", train.opt.batch_size, "minibatch size")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--log-every", train.opt.log_every, "loss logging interval")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train.opt.seed, "seed for task, init and minibatch order");
  train_cmd->add_option("--report", train.report, "key=value report path");
  train_cmd->add_option("--curve", train.curve, "loss curve CSV path");
  train_cmd->add_flag("--timing", train.timing, "include wall time in the report file");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time matrix-free vs materialized updates");
  bench_cmd->add_option("--w1", bench.w1)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--w2", bench.w2)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--r", bench.r)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--s", bench.s)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--repeats", bench.repeats)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed);

  bool quick = false, inject_fault = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run the self-verification suite");
  verify_cmd->add_flag("--quick", quick, "reduced trial counts, no training run");
  verify_cmd->add_flag("--inject-fault", inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*approx_cmd) return cmd_approx(approx);
    if (*params_cmd) return cmd_params(params);
    if (*train_cmd) return cmd_train(train);
    if (*bench_cmd) return cmd_bench(bench);
    if (*verify_cmd) return cmd_verify(quick, inject_fault);
  } catch (const lsr::IoError& e) {
    std::cerr << "lsr: I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "lsr: I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const lsr::DivergenceError& e) {
    std::cerr << "lsr: " << e.what() << "\n";
    return kDivergence;
  } catch (const lsr::ArgumentError& e) {
    std::cerr << "lsr: invalid arguments: " << e.what() << "\n";
    return kUsage;
  } catch (const lsr::Error& e) {
    std::cerr << "lsr: numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
