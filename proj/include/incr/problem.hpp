#pragma once

// Objective oracles: the abstract evaluation surface, the regularized
// logistic finite sum, quadratic fixtures, and Hessian approximations built
// from uniform component subsamples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "incr/types.hpp"

namespace incr {

/// Curvature constants of an objective.
///
/// `lambda` is the strong convexity modulus (0 for plain convexity), `gamma`
/// the Lipschitz constant of the Hessian in spectral norm, and
/// `lipschitz_grad` the Lipschitz constant of the gradient when known.
struct SmoothnessInfo {
  double lambda = 0.0;
  double gamma = 0.0;
  std::optional<double> lipschitz_grad;

  void validate() const {
    if (!(lambda >= 0.0) || !(gamma >= 0.0))
      throw ConfigError("smoothness constants must be nonnegative");
    if (lipschitz_grad) {
      if (!(*lipschitz_grad > 0.0)) throw ConfigError("gradient Lipschitz constant must be positive");
      if (lambda > *lipschitz_grad * (1.0 + 1e-12))
        throw ConfigError("strong convexity modulus exceeds gradient Lipschitz constant");
    }
  }
};

/// Twice differentiable objective, optionally a finite sum f = (1/m) sum_i f_i.
///
/// Implementations are immutable after construction and every member is a
/// pure function of its arguments, so one instance may be shared across
/// threads.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual SymMatrix hessian(const Vector& x) const = 0;
  virtual SmoothnessInfo smoothness() const = 0;

  virtual std::size_t component_count() const { return 1; }

  virtual SymMatrix component_hessian(std::size_t i, const Vector& x) const {
    if (i != 0) throw ContractViolation("component index out of range");
    return hessian(x);
  }

  /// Mean of the component Hessians over `indices`.
  virtual SymMatrix mean_component_hessian(const Vector& x,
                                           std::span<const std::size_t> indices) const {
    if (indices.empty()) throw ConfigError("empty component subset");
    SymMatrix sum = SymMatrix::Zero(dim(), dim());
    for (std::size_t i : indices) sum += component_hessian(i, x);
    return sum / static_cast<double>(indices.size());
  }
};

// ---------------------------------------------------------------------------
// Quadratic fixture

/// f(x) = 1/2 x'Qx - b'x with constant Hessian (gamma = 0).
class QuadraticProblem final : public Objective {
 public:
  QuadraticProblem(SymMatrix q, Vector b) : q_(std::move(q)), b_(std::move(b)) {
    if (!detail::is_symmetric(q_)) throw ContractViolation("quadratic: Q is not symmetric");
    detail::require_dim(b_, q_.rows(), "quadratic");
    Eigen::SelfAdjointEigenSolver<SymMatrix> eig(q_, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (lo < -1e-12 * std::max(1.0, std::abs(hi)))
      throw ContractViolation("quadratic: Q is not positive semidefinite");
    info_.lambda = std::max(0.0, lo);
    info_.gamma = 0.0;
    info_.lipschitz_grad = std::max(hi, std::numeric_limits<double>::min());
  }

  Index dim() const override { return b_.size(); }

  double value(const Vector& x) const override {
    detail::require_dim(x, dim(), "quadratic value");
    return 0.5 * x.dot(q_ * x) - b_.dot(x);
  }

  Vector gradient(const Vector& x) const override {
    detail::require_dim(x, dim(), "quadratic gradient");
    return q_ * x - b_;
  }

  SymMatrix hessian(const Vector& x) const override {
    detail::require_dim(x, dim(), "quadratic hessian");
    return q_;
  }

  SmoothnessInfo smoothness() const override { return info_; }

  /// Solves Qx = b; only meaningful when Q is nonsingular.
  Vector minimizer() const { return q_.ldlt().solve(b_); }

  const SymMatrix& matrix() const { return q_; }
  const Vector& linear_term() const { return b_; }

 private:
  SymMatrix q_;
  Vector b_;
  SmoothnessInfo info_;
};

inline QuadraticProblem make_quadratic_problem(SymMatrix q, Vector b) {
  return QuadraticProblem(std::move(q), std::move(b));
}

// ---------------------------------------------------------------------------
// Logistic loss

namespace detail {

// log(1 + e^z) without overflow.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// sigma(z) (1 - sigma(z)), symmetric in z.
inline double sigmoid_slope(double z) { return sigmoid(z) * sigmoid(-z); }

}  // namespace detail

/// f(x) = (1/m) sum_i log(1 + exp(-v_i <u_i, x>)) + (lambda/2) ||x||^2.
///
/// Component i is f_i(x) = log(1 + exp(-v_i <u_i, x>)) + (lambda/2)||x||^2,
/// so the full Hessian is exactly the mean of the component Hessians.
class LogisticProblem final : public Objective {
 public:
  using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  LogisticProblem(RowMatrix features, Vector labels, double lambda)
      : u_(std::move(features)), v_(std::move(labels)), lambda_(lambda) {
    u_.makeCompressed();
    if (u_.rows() == 0) throw ConfigError("logistic: no samples");
    if (v_.size() != u_.rows()) throw ContractViolation("logistic: label count != sample count");
    for (Index i = 0; i < v_.size(); ++i)
      if (v_[i] != 1.0 && v_[i] != -1.0) throw ContractViolation("logistic: labels must be +1/-1");
    if (!(lambda_ >= 0.0)) throw ConfigError("logistic: regularization must be nonnegative");

    double max_sq = 0.0, sum_sq = 0.0, sum_cube = 0.0;
    for (Index i = 0; i < u_.rows(); ++i) {
      const double sq = u_.row(i).squaredNorm();
      max_sq = std::max(max_sq, sq);
      sum_sq += sq;
      sum_cube += sq * std::sqrt(sq);
    }
    const double m = static_cast<double>(u_.rows());
    // |sigma''| <= 1/(6 sqrt 3) gives the Hessian Lipschitz bound below.
    constexpr double kMaxCurvatureSlope = 0.096225044864937627;  // 1 / (6 sqrt(3))
    info_.lambda = lambda_;
    info_.gamma = kMaxCurvatureSlope * sum_cube / m;
    info_.lipschitz_grad = lambda_ + 0.25 * max_sq;
    mean_curvature_ = lambda_ + 0.25 * sum_sq / m;
    if (!(*info_.lipschitz_grad > 0.0)) info_.lipschitz_grad = std::numeric_limits<double>::min();
  }

  /// Regularization defaults to 1/m.
  static LogisticProblem with_default_reg(RowMatrix features, Vector labels) {
    const double m = static_cast<double>(features.rows());
    return LogisticProblem(std::move(features), std::move(labels), m > 0 ? 1.0 / m : 0.0);
  }

  Index dim() const override { return u_.cols(); }
  std::size_t component_count() const override { return static_cast<std::size_t>(u_.rows()); }
  SmoothnessInfo smoothness() const override { return info_; }

  /// lambda + (1/4m) sum ||u_i||^2, a trace bound on the mean curvature.
  double mean_curvature_bound() const { return mean_curvature_; }
  double regularization() const { return lambda_; }
  const RowMatrix& features() const { return u_; }
  const Vector& labels() const { return v_; }

  double value(const Vector& x) const override {
    detail::require_dim(x, dim(), "logistic value");
    const Vector z = u_ * x;
    double sum = 0.0;
    for (Index i = 0; i < z.size(); ++i) sum += detail::softplus(-v_[i] * z[i]);
    return sum / static_cast<double>(z.size()) + 0.5 * lambda_ * x.squaredNorm();
  }

  Vector gradient(const Vector& x) const override {
    detail::require_dim(x, dim(), "logistic gradient");
    const Vector z = u_ * x;
    Vector r(z.size());
    for (Index i = 0; i < z.size(); ++i) r[i] = -v_[i] * detail::sigmoid(-v_[i] * z[i]);
    Vector g = u_.transpose() * r;
    g /= static_cast<double>(z.size());
    g += lambda_ * x;
    return g;
  }

  SymMatrix hessian(const Vector& x) const override {
    detail::require_dim(x, dim(), "logistic hessian");
    SymMatrix h = SymMatrix::Zero(dim(), dim());
    for (Index i = 0; i < u_.rows(); ++i) accumulate_row(h, i, x, 1.0);
    h /= static_cast<double>(u_.rows());
    h.diagonal().array() += lambda_;
    return h;
  }

  SymMatrix component_hessian(std::size_t i, const Vector& x) const override {
    detail::require_dim(x, dim(), "logistic component hessian");
    if (i >= component_count()) throw ContractViolation("component index out of range");
    SymMatrix h = SymMatrix::Zero(dim(), dim());
    accumulate_row(h, static_cast<Index>(i), x, 1.0);
    h.diagonal().array() += lambda_;
    return h;
  }

  SymMatrix mean_component_hessian(const Vector& x,
                                   std::span<const std::size_t> indices) const override {
    detail::require_dim(x, dim(), "logistic subsampled hessian");
    if (indices.empty()) throw ConfigError("empty component subset");
    SymMatrix h = SymMatrix::Zero(dim(), dim());
    for (std::size_t i : indices) {
      if (i >= component_count()) throw ContractViolation("component index out of range");
      accumulate_row(h, static_cast<Index>(i), x, 1.0);
    }
    h /= static_cast<double>(indices.size());
    h.diagonal().array() += lambda_;
    return h;
  }

 private:
  void accumulate_row(SymMatrix& h, Index i, const Vector& x, double scale) const {
    double z = 0.0;
    for (RowMatrix::InnerIterator it(u_, i); it; ++it) z += it.value() * x[it.col()];
    const double w = scale * detail::sigmoid_slope(z);
    if (w == 0.0) return;
    for (RowMatrix::InnerIterator a(u_, i); a; ++a)
      for (RowMatrix::InnerIterator b(u_, i); b; ++b) h(a.col(), b.col()) += w * (a.value() * b.value());
  }

  RowMatrix u_;
  Vector v_;
  double lambda_;
  double mean_curvature_ = 0.0;
  SmoothnessInfo info_;
};

// ---------------------------------------------------------------------------
// Hessian approximations

enum class HessianMode {
  exact,            // H = hessian(x), mu = 0
  shifted_a1,       // H = subsample + delta I, mu = 2 delta
  shifted_a4,       // H = subsample + 3 delta I, mu = 4 delta
  raw,              // H = subsample, mu = delta
  scaled_identity,  // H = L I, mu = L
};

struct HessianStrategy {
  HessianMode mode = HessianMode::exact;
  std::size_t sample_count = 0;
  double delta = 0.0;
  std::uint64_t rng_seed = 0;
  /// Used by scaled_identity; falls back to the oracle's lipschitz_grad.
  std::optional<double> lipschitz;
};

struct HessianSample {
  SymMatrix matrix;
  double mu = 0.0;
};

inline bool is_subsampled(HessianMode mode) {
  return mode == HessianMode::shifted_a1 || mode == HessianMode::shifted_a4 ||
         mode == HessianMode::raw;
}

/// Indices drawn uniformly without replacement from {0..m-1}, ascending.
inline std::vector<std::size_t> sample_indices(std::size_t m, std::size_t count, std::uint64_t seed) {
  if (count < 1 || count > m) throw ConfigError("sample count must lie in [1, m]");
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> out;
  out.reserve(count);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(out), count, rng);
  return out;
}

/// Builds the Hessian approximation requested by `strategy` at x, together
/// with the error level mu it certifies.
inline HessianSample subsampled_hessian(const Objective& oracle, const Vector& x,
                                        const HessianStrategy& strategy) {
  detail::require_dim(x, oracle.dim(), "subsampled_hessian");
  if (!x.allFinite()) throw ContractViolation("subsampled_hessian: non-finite point");
  const Index n = oracle.dim();
  switch (strategy.mode) {
    case HessianMode::exact:
      return {oracle.hessian(x), 0.0};
    case HessianMode::scaled_identity: {
      const auto lip = strategy.lipschitz ? strategy.lipschitz : oracle.smoothness().lipschitz_grad;
      if (!lip || !(*lip > 0.0)) throw ConfigError("scaled_identity needs a positive L");
      return {*lip * SymMatrix::Identity(n, n), *lip};
    }
    case HessianMode::shifted_a1:
    case HessianMode::shifted_a4:
    case HessianMode::raw:
      break;
  }
  if (!(strategy.delta > 0.0)) throw ConfigError("subsampled Hessian needs delta > 0");
  const auto idx = sample_indices(oracle.component_count(), strategy.sample_count, strategy.rng_seed);
  HessianSample out{oracle.mean_component_hessian(x, idx), strategy.delta};
  if (strategy.mode == HessianMode::shifted_a1) {
    out.matrix.diagonal().array() += strategy.delta;
    out.mu = 2.0 * strategy.delta;
  } else if (strategy.mode == HessianMode::shifted_a4) {
    out.matrix.diagonal().array() += 3.0 * strategy.delta;
    out.mu = 4.0 * strategy.delta;
  }
  return out;
}

/// Per-iteration Hessian source used by the outer solvers. The second
/// argument is a draw counter so repeated calls see fresh subsamples.
using HessianProvider = std::function<HessianSample(const Vector& x, std::uint64_t draw)>;

inline HessianProvider make_hessian_provider(const Objective& oracle, HessianStrategy strategy) {
  if (is_subsampled(strategy.mode) &&
      (strategy.sample_count < 1 || strategy.sample_count > oracle.component_count()))
    throw ConfigError("sample count must lie in [1, m]");
  return [&oracle, strategy](const Vector& x, std::uint64_t draw) {
    HessianStrategy s = strategy;
    s.rng_seed = detail::mix_seed(strategy.rng_seed, draw);
    return subsampled_hessian(oracle, x, s);
  };
}

/// Subsample size guaranteeing eigenvalue error <= delta with probability
/// 1 - confidence: ceil(c L^2 ln(2n/confidence) / delta^2), with c = 16, or
/// c = 4 when every component is convex.
inline std::size_t sample_size_bound(double lipschitz, double delta, double confidence, Index n,
                                     bool components_convex) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("confidence must lie in (0,1)");
  if (!(lipschitz > 0.0)) throw ConfigError("L must be positive");
  if (n < 1) throw ConfigError("dimension must be >= 1");
  const double c = components_convex ? 4.0 : 16.0;
  const double raw = c * lipschitz * lipschitz * std::log(2.0 * static_cast<double>(n) / confidence) /
                     (delta * delta);
  return static_cast<std::size_t>(std::ceil(raw));
}

/// Largest Hessian eigenvalue at x by power iteration.
inline double estimate_lipschitz(const Objective& oracle, const Vector& x, int max_iters = 20,
                                 double tol = 1e-6) {
  const SymMatrix h = oracle.hessian(x);
  Vector v = Vector::Ones(h.rows()).normalized();
  double est = 0.0;
  for (int k = 0; k < max_iters; ++k) {
    Vector w = h * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - est) <= tol * std::max(1.0, std::abs(next))) return next;
    est = next;
  }
  return est;
}

}  // namespace incr
