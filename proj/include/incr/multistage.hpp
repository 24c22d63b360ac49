#pragma once

// Restarted AINCR for strongly convex problems: each stage runs the convex
// parameter set for a fixed number of iterations from the previous stage's
// output, and the distance bound R_s halves from stage to stage.

#include <cmath>
#include <optional>
#include <vector>

#include "incr/aincr.hpp"

namespace incr {

struct StagePlan {
  std::size_t s = 0;
  double radius = 0.0;        // R_s = R0 / 2^s
  std::size_t length = 0;     // T_s
  Vector output;              // z_s
};

struct MultistageConfig {
  SmoothnessInfo smoothness;  // lambda > 0 and gamma are required
  double mu_u = 0.0;
  HessianStrategy hessian;
  HessianProvider hessian_override;
  SubproblemOptions subproblem;
  std::size_t stages = 10;
  /// Stop after the first stage whose output has ||grad f|| <= this.
  std::optional<double> grad_tol;
  /// Leave a stage early once ||grad f(x_t)|| <= this; off by default.
  std::optional<double> stage_grad_tol;
  RunOptions run;  // only metrics / record_iterates are used
};

struct MultistageResult {
  IterateTrace trace;
  std::vector<StagePlan> stages;
};

/// Caller guarantees ||z0 - x*|| <= r0.
inline MultistageResult run_multistage(const Vector& z0, double r0, const Objective& oracle,
                                       const MultistageConfig& config) {
  config.smoothness.validate();
  if (!(config.smoothness.lambda > 0.0)) throw ConfigError("multistage: lambda must be positive");
  if (!(r0 > 0.0)) throw ConfigError("multistage: R0 must be positive");
  detail::require_dim(z0, oracle.dim(), "run_multistage");

  const auto provider = resolve_provider(oracle, config.hessian, config.hessian_override);
  std::uint64_t draw_base = 0;
  // Fresh subsamples across stages.
  HessianProvider staged = [&provider, &draw_base](const Vector& x, std::uint64_t draw) {
    return provider(x, draw_base + draw);
  };

  const AincrParams params = AincrParams::convex(config.smoothness.gamma, config.mu_u);
  MultistageResult out;
  detail::Stopwatch clock;
  std::size_t iter = 0;
  Vector z = z0;
  double radius_prev = r0;

  auto append = [&](const Vector& x, double f, double gn, const AincrStepInfo* step) {
    detail::record(out.trace, config.run, iter++, x, f, gn, clock);
    if (step) {
      auto& row = out.trace.rows.back();
      row.eta = step->eta;
      row.mu = step->mu;
      row.step_norm = step->step_norm;
    }
  };

  for (std::size_t s = 1; s <= config.stages; ++s) {
    StagePlan plan;
    plan.s = s;
    plan.radius = r0 / std::pow(2.0, static_cast<double>(s));
    plan.length = stage_length(config.smoothness.gamma, radius_prev, config.smoothness.lambda,
                               config.mu_u);
    out.trace.stage_starts.push_back(out.trace.rows.size());

    const Vector g0 = oracle.gradient(z);
    auto [state, info] = aincr_init(z, oracle, params, staged, config.subproblem);
    append(z, oracle.value(z), g0.norm(), &info);
    while (state.t < plan.length) {
      const double gn = state.grad_x.norm();
      if (config.stage_grad_tol && gn <= *config.stage_grad_tol) break;
      const Vector x = state.x;
      const double f = state.f_x;
      info = aincr_iterate(state, oracle, params, staged, config.subproblem);
      if (!info.conditions.pass) ++out.trace.condition_failures;
      append(x, f, gn, &info);
    }
    draw_base += state.draws;
    z = state.x;
    plan.output = z;
    out.stages.push_back(plan);
    radius_prev = plan.radius;
    if (config.grad_tol && state.grad_x.norm() <= *config.grad_tol) break;
  }
  const Vector gz = oracle.gradient(z);
  append(z, oracle.value(z), gz.norm(), nullptr);
  out.trace.final_point = z;
  return out;
}

}  // namespace incr
