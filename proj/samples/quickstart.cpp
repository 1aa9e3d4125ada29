// Quickstart: approximate a matrix by a sum of Kronecker products, inspect its
// conditioning, then run one LSR-Adapt forward and backward pass.

#include <iostream>

#include "lsr/adapter.hpp"
#include "lsr/separated.hpp"

int main() {
  lsr::RandomStream rng(42);

  // A 12x12 matrix that is exactly two Kronecker terms plus a little noise.
  const lsr::Shape left{3, 4}, right{4, 3};
  lsr::DenseMatrix m = lsr::kron(lsr::gaussian_matrix(left, rng), lsr::gaussian_matrix(right, rng));
  lsr::axpy(1.0, lsr::kron(lsr::gaussian_matrix(left, rng), lsr::gaussian_matrix(right, rng)), m);
  lsr::axpy(1.0, lsr::gaussian_matrix(m.shape(), rng, 1e-3), m);

  for (std::size_t s = 1; s <= 3; ++s) {
    const auto approx = lsr::nearest_kron_sum(m, left, right, s);
    const double err = lsr::relative_error(lsr::materialize(approx), m);
    std::cout << "s=" << s << "  relative error " << err << "  gamma "
              << lsr::condition_number(approx) << "  fp16 ok "
              << lsr::check_precision(approx, {lsr::kHalfRoundoff, 1e-2}) << "\n";
  }

  // Adapter on a 64x48 frozen weight, inner rank 4, separation rank 3.
  const auto plan = lsr::plan_shapes(64, 48, 4);
  auto layer = lsr::init_lsr(lsr::gaussian_matrix(64, 48, rng), plan, 3, lsr::kDefaultAlpha, 7);
  const lsr::Vector x = lsr::gaussian_vector(48, rng);
  const lsr::Vector y = lsr::forward(layer, x);
  const auto grads = lsr::backward(layer, x, y);  // gradient of ½‖y‖²
  std::cout << "adapter params " << lsr::count_params_lsr(plan, 3) << " vs LoRA "
            << lsr::count_params_lora(64, 48, 4) << ", |dB2[0]| "
            << lsr::frobenius_norm(grads.db2[0]) << "\n";
}
