#ifndef LSR_RANDOM_HPP
#define LSR_RANDOM_HPP

// Counter-based, splittable random streams.
//
// A stream is identified by a 64-bit key; draw i of the stream is a pure
// function mix(key, i). split(tag) derives an independent child key, so every
// component can own its stream without threading generator state around, and
// results do not depend on the order in which components consume numbers.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "lsr/dense_matrix.hpp"

namespace lsr {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) noexcept
      : key_(detail::splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  RandomStream split(std::uint64_t tag) const noexcept {
    return RandomStream(Key{detail::splitmix64(key_ ^ detail::splitmix64(tag + 1))});
  }
  RandomStream split(std::string_view tag) const noexcept {
    return split(detail::fnv1a(tag));
  }

  std::uint64_t next_u64() noexcept {
    return detail::splitmix64(key_ + detail::splitmix64(counter_++));
  }

  /// Uniform in the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Box-Muller; consumes two draws per call.
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept {
    // Lemire's multiply-shift; bias is below 2^-64·n and irrelevant here.
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * n) >> 64);
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  struct Key {
    std::uint64_t value;
  };
  explicit RandomStream(Key k) noexcept : key_(k.value) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols,
                                   RandomStream& rng, double stddev = 1.0) {
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = stddev * rng.normal();
  return m;
}

inline DenseMatrix gaussian_matrix(Shape shape, RandomStream& rng,
                                   double stddev = 1.0) {
  return gaussian_matrix(shape.rows, shape.cols, rng, stddev);
}

inline Vector gaussian_vector(std::size_t n, RandomStream& rng,
                              double stddev = 1.0) {
  Vector v(n);
  for (double& x : v) x = stddev * rng.normal();
  return v;
}

}  // namespace lsr

#endif  // LSR_RANDOM_HPP
