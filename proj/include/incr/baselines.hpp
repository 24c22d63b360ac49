#pragma once

// First-order comparison methods: cubic regularization with H = L I (a
// gradient method with a cubic safeguard) and Nesterov's accelerated gradient.

#include <cmath>
#include <utility>

#include "incr/incr.hpp"

namespace incr {

struct BaselineConfig {
  enum class Method { cubic_gd, nesterov_ag };
  Method method = Method::nesterov_ag;
  double lipschitz = 1.0;
  double lambda = 0.0;  // > 0 selects the strongly convex momentum for AG
  double eta = 1.0;     // cubic_gd only
  RunOptions run;

  void validate() const {
    if (!(lipschitz > 0.0)) throw ConfigError("baseline: L must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("baseline: lambda must be >= 0");
    if (method == Method::cubic_gd && !(eta > 0.0)) throw ConfigError("cubic_gd: eta must be positive");
  }
};

/// tau solving L tau + (eta/2) tau^2 = ||g||.
inline double cubic_gd_radius(double g_norm, double lipschitz, double eta) {
  if (g_norm == 0.0) return 0.0;
  // Same root as (-L + sqrt(L^2 + 2 eta ||g||)) / eta, without the cancellation.
  return 2.0 * g_norm / (lipschitz + std::sqrt(lipschitz * lipschitz + 2.0 * eta * g_norm));
}

/// Minimizer of the cubic model with H = L I: h = -tau g / ||g||.
inline Vector cubic_gd_step(const Vector& g, double lipschitz, double eta) {
  if (!(eta > 0.0) || !(lipschitz > 0.0)) throw ConfigError("cubic_gd_step: need L > 0 and eta > 0");
  const double gn = g.norm();
  if (gn == 0.0) return Vector::Zero(g.size());
  return (-cubic_gd_radius(gn, lipschitz, eta) / gn) * g;
}

inline IterateTrace run_cubic_gd(const Vector& x0, const Objective& oracle,
                                 const BaselineConfig& config) {
  config.validate();
  detail::require_dim(x0, oracle.dim(), "run_cubic_gd");
  IterateTrace trace;
  detail::Stopwatch clock;
  Vector x = x0;
  for (std::size_t t = 0;; ++t) {
    const Vector g = oracle.gradient(x);
    const double gn = g.norm();
    detail::record(trace, config.run, t, x, oracle.value(x), gn, clock);
    if (gn <= config.run.grad_tol || t >= config.run.max_iters) break;
    const Vector h = cubic_gd_step(g, config.lipschitz, config.eta);
    auto& row = trace.rows.back();
    row.eta = config.eta;
    row.mu = config.lipschitz;
    row.step_norm = h.norm();
    x += h;
  }
  trace.final_point = x;
  return trace;
}

/// Constant-step accelerated gradient. Convex mode (lambda = 0) uses momentum
/// t/(t+3); strongly convex mode uses (sqrt L - sqrt lambda)/(sqrt L + sqrt lambda).
inline IterateTrace nesterov_ag_run(const Vector& x0, const Objective& oracle,
                                    const BaselineConfig& config) {
  config.validate();
  detail::require_dim(x0, oracle.dim(), "nesterov_ag_run");
  const double step = 1.0 / config.lipschitz;
  const bool strong = config.lambda > 0.0;
  const double q = strong ? (std::sqrt(config.lipschitz) - std::sqrt(config.lambda)) /
                                (std::sqrt(config.lipschitz) + std::sqrt(config.lambda))
                          : 0.0;
  IterateTrace trace;
  detail::Stopwatch clock;
  Vector x = x0;
  Vector y = x0;
  for (std::size_t t = 0;; ++t) {
    const Vector gx = oracle.gradient(x);
    const double gn = gx.norm();
    detail::record(trace, config.run, t, x, oracle.value(x), gn, clock);
    if (gn <= config.run.grad_tol || t >= config.run.max_iters) break;
    const Vector gy = (t == 0) ? gx : oracle.gradient(y);
    Vector x_next = y - step * gy;
    const double momentum = strong ? q : static_cast<double>(t) / (static_cast<double>(t) + 3.0);
    y = x_next + momentum * (x_next - x);
    auto& row = trace.rows.back();
    row.eta = 0.0;
    row.mu = config.lipschitz;
    row.step_norm = (x_next - x).norm();
    x = std::move(x_next);
  }
  trace.final_point = x;
  return trace;
}

}  // namespace incr
