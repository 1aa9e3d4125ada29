#ifndef LSR_ERRORS_HPP
#define LSR_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lsr {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, empty lists, out-of-range ranks.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A requested size does not fit the platform index range.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Iterative kernels that fail to converge, divisions by a zero norm.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A Kronecker term with a zero factor cannot be normalized.
class DegenerateTermError : public NumericalError {
 public:
  DegenerateTermError(std::size_t term_index, std::size_t factor_index)
      : NumericalError("degenerate term " + std::to_string(term_index) +
                       ": factor " + std::to_string(factor_index) +
                       " has zero Frobenius norm"),
        term_index_(term_index) {}

  std::size_t term_index() const noexcept { return term_index_; }

 private:
  std::size_t term_index_;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t step)
      : Error("training diverged: non-finite loss at step " +
              std::to_string(step)),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace lsr

#endif  // LSR_ERRORS_HPP
