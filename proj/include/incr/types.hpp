#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace incr {

using Vector = Eigen::VectorXd;
using SymMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Bad user-facing parameter (negative step, empty sample, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller broke a precondition (dimension mismatch, asymmetric matrix).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative inner solve ran out of iterations.
class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& what, double best_residual)
      : std::runtime_error(what + " (best residual " + std::to_string(best_residual) + ")"),
        best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// Malformed LIBSVM line; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Trace/report files that do not follow the CSV schema.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_dim(const Vector& x, Index n, const char* where) {
  if (x.size() != n) {
    throw ContractViolation(std::string(where) + ": expected dimension " + std::to_string(n) +
                            ", got " + std::to_string(x.size()));
  }
}

inline bool is_symmetric(const SymMatrix& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < j; ++i)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

// splitmix64 finalizer; turns (seed, counter) into independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail
}  // namespace incr
