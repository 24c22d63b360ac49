#pragma once

// Inexact Newton method with cubic regularization: at every iterate, build a
// cubic model around x_t with an approximate Hessian H_t and jump to its
// global minimizer.

#include <cmath>
#include <cstdint>
#include <utility>

#include "incr/cubic.hpp"
#include "incr/problem.hpp"
#include "incr/schedules.hpp"
#include "incr/trace.hpp"

namespace incr {

/// Keeps the cubic model well posed when gamma = 0 (quadratic fixtures).
inline constexpr double kEtaFloor = 1e-12;

enum class SubproblemMethod { exact, lanczos, automatic };

struct SubproblemOptions {
  SubproblemMethod method = SubproblemMethod::automatic;
  Index lanczos_threshold = 200;  // automatic switches to Lanczos above this dimension
  Index max_dim = 50;
  double tol = 1e-10;
};

inline CubicSolution solve_cubic(const CubicModel& model, const SubproblemOptions& opts) {
  const bool lanczos = opts.method == SubproblemMethod::lanczos ||
                       (opts.method == SubproblemMethod::automatic &&
                        model.g.size() > opts.lanczos_threshold);
  return lanczos ? solve_lanczos(model, opts.max_dim, opts.tol) : solve_exact(model, opts.tol);
}

struct EtaPolicy {
  enum class Kind { fixed_gamma, adaptive };
  Kind kind = Kind::fixed_gamma;
  double mu_u = 0.0;
  double radius = 1e6;

  static EtaPolicy fixed_gamma() { return {}; }
  static EtaPolicy adaptive(double mu_u, double radius = 1e6) {
    return {Kind::adaptive, mu_u, radius};
  }
};

enum class AlphaKind { convex, strong };

struct IncrConfig {
  EtaPolicy eta_policy;
  AlphaKind alpha_schedule = AlphaKind::convex;
  HessianStrategy hessian;
  /// Replaces `hessian` when set (custom approximations in tests and tools).
  HessianProvider hessian_override;
  SmoothnessInfo smoothness;
  SubproblemOptions subproblem;
  RunOptions run;

  void validate() const {
    smoothness.validate();
    if (!(run.grad_tol > 0.0)) throw ConfigError("grad_tol must be positive");
    if (eta_policy.kind == EtaPolicy::Kind::adaptive) {
      if (!(eta_policy.mu_u >= 0.0)) throw ConfigError("adaptive eta: mu_u must be >= 0");
      if (!(eta_policy.radius > 0.0)) throw ConfigError("adaptive eta: R must be positive");
    }
  }
};

/// alpha_t of the configured schedule.
inline double incr_alpha(std::size_t t, const IncrConfig& config) {
  if (config.alpha_schedule == AlphaKind::convex) return alpha_convex(t);
  return alpha_strong(config.smoothness.lambda, config.eta_policy.mu_u, config.smoothness.gamma,
                      config.eta_policy.radius);
}

/// eta_t = gamma (fixed) or gamma + 2 mu_u / (alpha_t R) (adaptive), floored at kEtaFloor.
inline double eta_schedule(std::size_t t, const IncrConfig& config) {
  double eta = config.smoothness.gamma;
  if (config.eta_policy.kind == EtaPolicy::Kind::adaptive && config.eta_policy.mu_u > 0.0)
    eta += 2.0 * config.eta_policy.mu_u / (incr_alpha(t, config) * config.eta_policy.radius);
  return std::max(eta, kEtaFloor);
}

struct IncrStepInfo {
  Vector x_next;
  double eta = 0.0;
  double mu = 0.0;
  double step_norm = 0.0;
  double kkt_residual = 0.0;
  bool approximate = false;
};

inline HessianProvider resolve_provider(const Objective& oracle, const HessianStrategy& strategy,
                                        const HessianProvider& override_provider) {
  return override_provider ? override_provider : make_hessian_provider(oracle, strategy);
}

namespace detail {

inline IncrStepInfo incr_step_with_gradient(const Vector& x, const Vector& grad,
                                            const HessianProvider& hessian,
                                            const IncrConfig& config, std::size_t t) {
  HessianSample approx = hessian(x, t);
  CubicModel model{grad, std::move(approx.matrix), eta_schedule(t, config), x};
  const CubicSolution sol = solve_cubic(model, config.subproblem);
  IncrStepInfo info;
  info.x_next = x + sol.step;
  info.eta = model.eta;
  info.mu = approx.mu;
  info.step_norm = sol.step.norm();
  info.kkt_residual = sol.kkt_residual;
  info.approximate = sol.approximate;
  return info;
}

}  // namespace detail

/// One INCR iteration from x_t.
inline IncrStepInfo incr_step(const Vector& x, const Objective& oracle, const IncrConfig& config,
                              std::size_t t) {
  detail::require_dim(x, oracle.dim(), "incr_step");
  if (!x.allFinite()) throw ContractViolation("incr_step: non-finite iterate");
  const auto provider = resolve_provider(oracle, config.hessian, config.hessian_override);
  return detail::incr_step_with_gradient(x, oracle.gradient(x), provider, config, t);
}

/// Runs INCR until ||grad f(x_t)|| <= grad_tol or t = max_iters.
inline IterateTrace run_incr(const Vector& x0, const Objective& oracle, const IncrConfig& config) {
  config.validate();
  detail::require_dim(x0, oracle.dim(), "run_incr");
  const auto provider = resolve_provider(oracle, config.hessian, config.hessian_override);
  IterateTrace trace;
  detail::Stopwatch clock;
  Vector x = x0;
  for (std::size_t t = 0;; ++t) {
    const Vector grad = oracle.gradient(x);
    const double gn = grad.norm();
    detail::record(trace, config.run, t, x, oracle.value(x), gn, clock);
    if (gn <= config.run.grad_tol || t >= config.run.max_iters) break;
    IncrStepInfo step = detail::incr_step_with_gradient(x, grad, provider, config, t);
    auto& row = trace.rows.back();
    row.eta = step.eta;
    row.mu = step.mu;
    row.step_norm = step.step_norm;
    x = std::move(step.x_next);
  }
  trace.final_point = x;
  return trace;
}

}  // namespace incr
