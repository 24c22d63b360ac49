#include <gtest/gtest.h>

#include <cmath>

#include "incr/data_io.hpp"
#include "incr/multistage.hpp"
#include "incr/synthetic.hpp"
#include "oracles.hpp"

namespace {

using incr::SymMatrix;
using incr::Vector;

TEST(StageLength, Examples) {
  EXPECT_EQ(incr::stage_length(1.0, 1.0, 1.0, 0.0), 12u);
  EXPECT_EQ(incr::stage_length(0.0, 1.0, 1.0, 1.0), 10u);
  EXPECT_EQ(incr::stage_length(0.0, 1.0, 1.0, 0.0), 1u);
  EXPECT_THROW(incr::stage_length(1.0, 1.0, 0.0, 0.0), incr::ConfigError);
  EXPECT_THROW(incr::stage_length(1.0, 0.0, 1.0, 0.0), incr::ConfigError);
}

incr::MultistageConfig config_for(const incr::Objective& f, std::size_t stages) {
  incr::MultistageConfig c;
  c.smoothness = f.smoothness();
  c.stages = stages;
  return c;
}

TEST(RunMultistage, StartAtMinimizer) {
  const auto q = incr::synthetic::random_quadratic(4, 0.5, 2.0, 1);
  const Vector xstar = q.minimizer();
  auto c = config_for(q, 3);
  c.smoothness.gamma = 0.1;
  const auto res = incr::run_multistage(xstar, 1.0, q, c);
  ASSERT_EQ(res.stages.size(), 3u);
  for (const auto& st : res.stages) EXPECT_LE((st.output - xstar).norm(), 1e-12);
}

TEST(RunMultistage, QuadraticDistanceAndGapBounds) {
  const auto q = incr::synthetic::random_quadratic(6, 0.2, 5.0, 4);
  const Vector xstar = q.minimizer();
  const Vector z0 = Vector::Zero(6);
  const double r0 = (z0 - xstar).norm() * 1.01;
  auto c = config_for(q, 5);
  const auto res = incr::run_multistage(z0, r0, q, c);
  const double fstar = q.value(xstar);
  const double gap0 = q.value(z0) - fstar;
  ASSERT_EQ(res.stages.size(), 5u);
  for (const auto& st : res.stages) {
    const double s = static_cast<double>(st.s);
    EXPECT_LE((st.output - xstar).squaredNorm(), r0 * r0 / std::pow(2.0, s));
    EXPECT_LE(q.value(st.output) - fstar, gap0 / std::pow(4.0, s) + 1e-15);
    EXPECT_DOUBLE_EQ(st.radius, r0 / std::pow(2.0, s));
  }
}

TEST(RunMultistage, LogisticGapQuartering) {
  const auto f = incr::make_logistic_problem(incr::synthetic::gaussian_logistic(150, 5, 2), 0.05);
  const Eigen::MatrixXd u(f.features());
  const Vector xstar = oracle::logistic_minimizer(u, f.labels(), 0.05, Vector::Zero(5));
  const double fstar = f.value(xstar);
  const Vector z0 = Vector::Zero(5);
  auto c = config_for(f, 4);
  const auto res = incr::run_multistage(z0, xstar.norm() * 1.01, f, c);
  for (const auto& st : res.stages) {
    const double s = static_cast<double>(st.s);
    EXPECT_LE(f.value(st.output) - fstar, (f.value(z0) - fstar) / std::pow(4.0, s) + 1e-14);
    EXPECT_LE((st.output - xstar).squaredNorm(), std::pow(xstar.norm() * 1.01, 2) / std::pow(2.0, s));
  }
}

TEST(RunMultistage, StageBudget) {
  const auto f = incr::make_logistic_problem(incr::synthetic::gaussian_logistic(100, 4, 5), 0.02);
  auto c = config_for(f, 6);
  c.mu_u = 0.01;
  c.hessian = {incr::HessianMode::raw, 50, 0.01, 3, {}};
  const double r0 = 3.0;
  const auto res = incr::run_multistage(Vector::Zero(4), r0, f, c);
  std::size_t total = 0;
  for (const auto& st : res.stages) total += st.length;
  const double lambda = c.smoothness.lambda, gamma = c.smoothness.gamma, s = 6.0;
  EXPECT_LE(static_cast<double>(total),
            8.0 * std::cbrt(392.0 * gamma * r0 / lambda) + 4.0 * std::sqrt(6.0 * c.mu_u / lambda) * s + s);
  EXPECT_EQ(res.trace.stage_starts.size(), 6u);
  EXPECT_EQ(res.trace.rows.size(), total + 1);
}

TEST(RunMultistage, StagePlanHalvesRadius) {
  const auto q = incr::synthetic::random_quadratic(3, 1.0, 2.0, 7);
  auto c = config_for(q, 4);
  c.smoothness.gamma = 1.0;
  const auto res = incr::run_multistage(Vector::Zero(3), 8.0, q, c);
  double prev = 8.0;
  for (const auto& st : res.stages) {
    EXPECT_EQ(st.length, incr::stage_length(1.0, prev, c.smoothness.lambda, 0.0));
    EXPECT_DOUBLE_EQ(st.radius, prev / 2.0);
    prev = st.radius;
  }
}

TEST(RunMultistage, Errors) {
  const auto q = incr::synthetic::random_quadratic(3, 1.0, 2.0, 7);
  auto c = config_for(q, 2);
  EXPECT_THROW(incr::run_multistage(Vector::Zero(3), 0.0, q, c), incr::ConfigError);
  c.smoothness.lambda = 0.0;
  EXPECT_THROW(incr::run_multistage(Vector::Zero(3), 1.0, q, c), incr::ConfigError);
}

}  // namespace
