#pragma once

// Step-weight and regularization schedules shared by the outer solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "incr/types.hpp"

namespace incr {

/// alpha_t = 3 / (t + 3); alpha_0 = 1.
inline double alpha_convex(std::size_t t) { return 3.0 / (static_cast<double>(t) + 3.0); }

/// Constant weight for strongly convex problems:
/// min{1/3, lambda / (6 mu_u), sqrt(2 lambda / (gamma R))}.
/// Terms with a zero denominator drop out of the min.
inline double alpha_strong(double lambda, double mu_u, double gamma, double radius) {
  if (!(lambda > 0.0)) throw ConfigError("alpha_strong: lambda must be positive");
  if (!(mu_u >= 0.0) || !(gamma >= 0.0)) throw ConfigError("alpha_strong: mu_u and gamma must be >= 0");
  if (!(radius > 0.0)) throw ConfigError("alpha_strong: R must be positive");
  double a = 1.0 / 3.0;
  if (mu_u > 0.0) a = std::min(a, lambda / (6.0 * mu_u));
  if (gamma > 0.0) a = std::min(a, std::sqrt(2.0 * lambda / (gamma * radius)));
  return a;
}

struct AlphaSchedule {
  enum class Kind { convex, constant };
  Kind kind = Kind::convex;
  double value = 1.0;  // used by Kind::constant

  static AlphaSchedule convex() { return {}; }
  static AlphaSchedule constant(double a) {
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("constant alpha must lie in (0, 1]");
    return {Kind::constant, a};
  }

  double operator()(std::size_t t) const { return kind == Kind::convex ? alpha_convex(t) : value; }
};

/// A_0 = 1, A_t = prod_{i=1..t} (1 - alpha_i).
inline double a_sequence(std::size_t t, const AlphaSchedule& schedule) {
  double a = 1.0;
  for (std::size_t i = 1; i <= t; ++i) a *= 1.0 - schedule(i);
  return a;
}

/// 6 / ((t+1)(t+2)(t+3)), the closed form of A_t under alpha_convex.
inline double a_sequence_convex_closed(std::size_t t) {
  const double s = static_cast<double>(t);
  return 6.0 / ((s + 1.0) * (s + 2.0) * (s + 3.0));
}

/// Iterations per restart stage:
/// ceil(2 max{(196 gamma R_prev / lambda)^{1/3}, 2 (6 mu_u / lambda)^{1/2}}), at least 1.
inline std::size_t stage_length(double gamma, double r_prev, double lambda, double mu_u) {
  if (!(lambda > 0.0)) throw ConfigError("stage_length: lambda must be positive");
  if (!(gamma >= 0.0) || !(mu_u >= 0.0) || !(r_prev > 0.0))
    throw ConfigError("stage_length: need gamma >= 0, mu_u >= 0, R > 0");
  const double a = std::cbrt(196.0 * gamma * r_prev / lambda);
  const double b = 2.0 * std::sqrt(6.0 * mu_u / lambda);
  const double t = std::ceil(2.0 * std::max(a, b) - 1e-12);
  return std::max<std::size_t>(1, static_cast<std::size_t>(t));
}

}  // namespace incr
