#pragma once

// Accelerated inexact Newton method with cubic regularization.
//
// Three sequences are maintained: x_t (cubic-model minimizers), y_t
// (minimizers of the estimate functions phi_t) and w_t, their convex
// combination, at which the next cubic model is built. phi_t is kept in the
// closed form
//
//   phi_t(x) = f(x_1) + C + <v, x - x0> + (b/2)||x - x0||^2 + (beta/6)||x - x0||^3,
//
// with v and C accumulating the weighted linear lower models and
// b = mu_bar_{t-1} + lambda (1/A_{t-1} - 1).

#include <cmath>
#include <limits>
#include <utility>

#include "incr/incr.hpp"

namespace incr {

struct AincrParams {
  AlphaSchedule alpha;
  double mu_bar_slope = 0.0;  // mu_bar_t = slope * t + offset
  double mu_bar_offset = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;  // for the initial step x_1
  double mu_u = 0.0;
  double r_bar = 0.0;  // strong mode only

  /// alpha_t = 3/(t+3), mu_bar_t = 2 mu_u (t+2), beta = 96 gamma, eta = 4 gamma.
  /// A positive lambda adds the strong-convexity term to the lower models;
  /// it only relaxes the step-weight conditions, so the convex rate still holds.
  static AincrParams convex(double gamma, double mu_u, double lambda = 0.0) {
    if (!(gamma >= 0.0) || !(mu_u >= 0.0)) throw ConfigError("aincr: gamma and mu_u must be >= 0");
    if (!(lambda >= 0.0)) throw ConfigError("aincr: lambda must be >= 0");
    AincrParams p;
    p.alpha = AlphaSchedule::convex();
    p.mu_bar_slope = 2.0 * mu_u;
    p.mu_bar_offset = 4.0 * mu_u;
    p.beta = std::max(96.0 * gamma, kEtaFloor);
    p.eta = std::max(4.0 * gamma, kEtaFloor);
    p.lambda = lambda;
    p.gamma = gamma;
    p.mu_u = mu_u;
    return p;
  }

  /// Constant alpha = min(8/9, sqrt(lambda / (18 sqrt3 mu_u)), (lambda / (gamma R))^{1/3} / 4),
  /// mu_bar = lambda/4, beta = 3 lambda / (2 R), eta = 4 gamma.
  /// R must bound every ||y_t - xbar_t||; there is no way to compute it up front.
  static AincrParams strong(double lambda, double gamma, double mu_u, double r_bar) {
    if (!(lambda > 0.0)) throw ConfigError("aincr strong mode: lambda must be positive");
    if (!(r_bar > 0.0)) throw ConfigError("aincr strong mode: R_bar must be positive");
    if (!(gamma >= 0.0) || !(mu_u >= 0.0)) throw ConfigError("aincr: gamma and mu_u must be >= 0");
    double a = 8.0 / 9.0;
    if (mu_u > 0.0) a = std::min(a, std::sqrt(lambda / (18.0 * std::sqrt(3.0) * mu_u)));
    if (gamma > 0.0) a = std::min(a, 0.25 * std::cbrt(lambda / (gamma * r_bar)));
    AincrParams p;
    p.alpha = AlphaSchedule::constant(a);
    p.mu_bar_offset = 0.25 * lambda;
    p.beta = 1.5 * lambda / r_bar;
    p.eta = std::max(4.0 * gamma, kEtaFloor);
    p.lambda = lambda;
    p.gamma = gamma;
    p.mu_u = mu_u;
    p.r_bar = r_bar;
    return p;
  }

  double mu_bar(std::size_t t) const { return mu_bar_slope * static_cast<double>(t) + mu_bar_offset; }

  /// A_t for this schedule.
  double a_value(std::size_t t) const {
    if (t == 0) return 1.0;
    if (alpha.kind == AlphaSchedule::Kind::convex) return a_sequence_convex_closed(t);
    return std::pow(1.0 - alpha.value, static_cast<double>(t));
  }

  void validate() const {
    if (!(beta > 0.0) || !(eta > 0.0)) throw ConfigError("aincr: beta and eta must be positive");
    if (!(lambda >= 0.0) || !(mu_bar_offset >= 0.0) || !(mu_bar_slope >= 0.0))
      throw ConfigError("aincr: lambda and mu_bar must be nonnegative and nondecreasing");
  }
};

struct AincrState {
  std::size_t t = 1;
  Vector x;   // x_t
  Vector y;   // y_t
  Vector w;   // last w (w_0 = x0)
  Vector x0;
  double a_prev = 1.0;  // A_{t-1}
  Vector v;             // v_{t-1}
  double c = 0.0;       // constant part of the accumulated lower models
  double f_x1 = 0.0;
  double f_x = 0.0;     // f(x_t)
  Vector grad_x;        // grad f(x_t)
  std::size_t draws = 0;
};

/// w = (1 - alpha) x + alpha y.
inline Vector w_update(const Vector& x, const Vector& y, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("w_update: alpha must lie in (0, 1]");
  return (1.0 - alpha) * x + alpha * y;
}

/// Minimizer of <v, x - x0> + (b/2)||x - x0||^2 + (beta/6)||x - x0||^3:
/// x0 - 2 v / (b + sqrt(b^2 + 2 beta ||v||)).
inline Vector y_update(const Vector& x0, const Vector& v, double b, double beta) {
  if (b < 0.0) throw ContractViolation("y_update: negative quadratic coefficient");
  const double vn = v.norm();
  if (vn == 0.0) return x0;
  const double denom = b + std::sqrt(b * b + 2.0 * beta * vn);
  if (!(denom > 0.0)) throw ConfigError("y_update: unbounded estimate function (b = beta = 0)");
  return x0 - (2.0 / denom) * v;
}

/// b_t = mu_bar_t + lambda (1/A_t - 1).
inline double estimate_quadratic_coeff(const AincrParams& params, std::size_t t, double a_t) {
  return params.mu_bar(t) + params.lambda * (1.0 / a_t - 1.0);
}

/// y_{t+1} from a state whose accumulator already holds the step-t term.
inline Vector y_update(const AincrState& state, const AincrParams& params) {
  // state.t has been advanced to t+1, so a_prev = A_t and mu_bar index is t.
  const double b = estimate_quadratic_coeff(params, state.t - 1, state.a_prev);
  return y_update(state.x0, state.v, b, params.beta);
}

/// phi_t(x) for the current state.
inline double estimate_function(const AincrState& s, const AincrParams& params, const Vector& x) {
  const Vector d = x - s.x0;
  const double r = d.norm();
  const double b = estimate_quadratic_coeff(params, s.t - 1, s.a_prev);
  return s.f_x1 + s.c + s.v.dot(d) + 0.5 * b * r * r + params.beta / 6.0 * r * r * r;
}

/// min phi_t, attained at y_t.
inline double estimate_minimum(const AincrState& s, const AincrParams& params) {
  return estimate_function(s, params, s.y);
}

struct ConditionReport {
  double lhs1 = 0.0, rhs1 = 0.0;
  double lhs2 = 0.0, rhs2 = 0.0;
  bool pass = true;
};

/// Checks the two step-weight conditions behind the accelerated rate at
/// iteration t >= 1, with R_t taken as its computable upper bound.
inline ConditionReport check_conditions(std::size_t t, const AincrParams& params, double mu_t,
                                        double grad_next_norm) {
  if (t < 1) throw ContractViolation("check_conditions: t must be >= 1");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double alpha = params.alpha(t);
  const double a_t = params.a_value(t);
  const double a_prev = params.a_value(t - 1);
  const double mu_bar_prev = params.mu_bar(t - 1);
  const double lambda_bar = 0.5 * params.lambda * (1.0 / a_prev - 1.0);

  ConditionReport rep;
  rep.lhs1 = alpha * alpha / a_t;
  rep.rhs1 = mu_t > 0.0 ? (2.0 * mu_bar_prev + lambda_bar) / (std::sqrt(3.0) * mu_t) : inf;
  // 3 lambda_bar / R_t with R_t = (alpha/A_t) ||grad|| / (mu_bar_prev + lambda_bar).
  double curvature_term = 0.0;
  if (lambda_bar > 0.0) {
    curvature_term = grad_next_norm > 0.0
                         ? 3.0 * lambda_bar * (mu_bar_prev + lambda_bar) /
                               (alpha / a_t * grad_next_norm)
                         : inf;
  }
  rep.lhs2 = alpha * alpha * alpha / a_t;
  rep.rhs2 = 9.0 * (params.beta + curvature_term) / (32.0 * (2.0 * params.gamma + params.eta));
  rep.pass = rep.lhs1 <= rep.rhs1 && rep.lhs2 <= rep.rhs2;
  return rep;
}

struct AincrConfig {
  HessianStrategy hessian;
  HessianProvider hessian_override;
  SubproblemOptions subproblem;
  RunOptions run;
};

struct AincrStepInfo {
  double eta = 0.0;
  double mu = 0.0;
  double step_norm = 0.0;  // ||x_{t+1} - w_t||
  ConditionReport conditions;
};

namespace detail {

inline CubicSolution aincr_model_step(const Vector& at, const Vector& grad, HessianSample approx,
                                      double eta, const SubproblemOptions& opts) {
  CubicModel model{grad, std::move(approx.matrix), eta, at};
  return solve_cubic(model, opts);
}

}  // namespace detail

/// Step 0: x_1 minimizes the cubic model at x0 with eta = gamma; y_1 = w_0 = x0.
inline std::pair<AincrState, AincrStepInfo> aincr_init(const Vector& x0, const Objective& oracle,
                                                       const AincrParams& params,
                                                       const HessianProvider& hessian,
                                                       const SubproblemOptions& opts = {}) {
  params.validate();
  detail::require_dim(x0, oracle.dim(), "aincr_init");
  AincrState s;
  s.x0 = x0;
  s.w = x0;
  s.y = x0;
  s.v = Vector::Zero(x0.size());
  const Vector g0 = oracle.gradient(x0);
  HessianSample approx = hessian(x0, s.draws++);
  AincrStepInfo info;
  info.mu = approx.mu;
  info.eta = std::max(params.gamma, kEtaFloor);
  const CubicSolution sol = detail::aincr_model_step(x0, g0, std::move(approx), info.eta, opts);
  info.step_norm = sol.step.norm();
  s.x = x0 + sol.step;
  s.f_x1 = oracle.value(s.x);
  s.f_x = s.f_x1;
  s.grad_x = oracle.gradient(s.x);
  return {std::move(s), info};
}

/// One accelerated iteration: t -> t+1.
inline AincrStepInfo aincr_iterate(AincrState& s, const Objective& oracle, const AincrParams& params,
                                   const HessianProvider& hessian,
                                   const SubproblemOptions& opts = {}) {
  const std::size_t t = s.t;
  const double alpha = params.alpha(t);
  s.w = w_update(s.x, s.y, alpha);
  HessianSample approx = hessian(s.w, s.draws++);
  AincrStepInfo info;
  info.mu = approx.mu;
  info.eta = params.eta;
  const CubicSolution sol =
      detail::aincr_model_step(s.w, oracle.gradient(s.w), std::move(approx), params.eta, opts);
  info.step_norm = sol.step.norm();
  const Vector x_next = s.w + sol.step;
  const double f_next = oracle.value(x_next);
  const Vector g_next = oracle.gradient(x_next);

  const double a_t = (1.0 - alpha) * s.a_prev;
  info.conditions = check_conditions(t, params, info.mu, g_next.norm());
  const double weight = alpha / a_t;
  const Vector gap = s.x0 - x_next;
  s.v += weight * (g_next + params.lambda * gap);
  s.c += weight * (f_next + g_next.dot(gap) + 0.5 * params.lambda * gap.squaredNorm());
  s.a_prev = a_t;
  s.t = t + 1;
  s.x = x_next;
  s.f_x = f_next;
  s.grad_x = g_next;
  s.y = y_update(s, params);
  return info;
}

/// Runs AINCR until ||grad f(x_t)|| <= grad_tol or t = max_iters.
inline IterateTrace run_aincr(const Vector& x0, const Objective& oracle, const AincrParams& params,
                              const AincrConfig& config) {
  const auto provider = resolve_provider(oracle, config.hessian, config.hessian_override);
  IterateTrace trace;
  detail::Stopwatch clock;
  const Vector g0 = oracle.gradient(x0);
  detail::record(trace, config.run, 0, x0, oracle.value(x0), g0.norm(), clock);
  if (g0.norm() <= config.run.grad_tol || config.run.max_iters == 0) {
    trace.final_point = x0;
    return trace;
  }
  auto [state, info] = aincr_init(x0, oracle, params, provider, config.subproblem);
  for (;;) {
    auto& prev = trace.rows.back();
    prev.eta = info.eta;
    prev.mu = info.mu;
    prev.step_norm = info.step_norm;
    const double gn = state.grad_x.norm();
    detail::record(trace, config.run, state.t, state.x, state.f_x, gn, clock);
    if (gn <= config.run.grad_tol || state.t >= config.run.max_iters) break;
    info = aincr_iterate(state, oracle, params, provider, config.subproblem);
    if (!info.conditions.pass) ++trace.condition_failures;
  }
  trace.final_point = state.x;
  return trace;
}

}  // namespace incr
