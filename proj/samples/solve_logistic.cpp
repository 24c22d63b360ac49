// Fits a logistic model with INCR and AINCR and prints the final objective values.

#include <cstdio>

#include "incr/aincr.hpp"
#include "incr/incr.hpp"
#include "incr/synthetic.hpp"

int main() {
  const auto data = incr::synthetic::gaussian_logistic(1000, 10, 42);
  const auto f = incr::make_logistic_problem(data, 1e-3);
  const incr::Vector x0 = incr::Vector::Zero(f.dim());

  incr::IncrConfig ic;
  ic.smoothness = f.smoothness();
  ic.hessian = {incr::HessianMode::shifted_a1, 100, 0.01, 1, {}};
  const auto a = incr::run_incr(x0, f, ic);

  incr::AincrConfig ac;
  ac.hessian = {incr::HessianMode::shifted_a4, 100, 0.01, 1, {}};
  ac.run.max_iters = 300;
  const auto params = incr::AincrParams::convex(f.smoothness().gamma, 0.04);
  const auto b = incr::run_aincr(x0, f, params, ac);

  std::printf("INCR : %zu iterations, f = %.12f, |grad| = %.2e\n", a.last().t, a.last().f, a.last().grad_norm);
  std::printf("AINCR: %zu iterations, f = %.12f, |grad| = %.2e\n", b.last().t, b.last().f, b.last().grad_norm);
}
