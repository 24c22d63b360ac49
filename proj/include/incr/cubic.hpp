#pragma once

// Solvers for the cubic-regularized model
//
//   m(h) = <g, h> + 1/2 <H h, h> + (eta/6) ||h||^3.
//
// The global minimizer h* is characterized by (H + lambda* I) h* = -g with
// lambda* = (eta/2)||h*|| and H + lambda* I positive semidefinite.

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "incr/types.hpp"

namespace incr {

struct CubicModel {
  Vector g;
  SymMatrix H;
  double eta = 1.0;
  Vector anchor;  // optional; solve results are steps relative to it
};

struct CubicSolution {
  Vector step;
  double multiplier = 0.0;       // (eta/2) ||step||
  double model_decrease = 0.0;   // m(0) - m(step)
  double kkt_residual = 0.0;     // ||(H + multiplier I) step + g||
  double psd_certificate = 0.0;  // lambda_min(H + multiplier I)
  bool approximate = false;
  int iterations = 0;
  Index krylov_dim = 0;

  /// anchor + step, for callers that carried an anchor in the model.
  Vector point(const CubicModel& model) const {
    return model.anchor.size() == step.size() ? Vector(model.anchor + step) : step;
  }
};

inline double cubic_model_value(const Vector& g, const SymMatrix& H, double eta, const Vector& h) {
  const double r = h.norm();
  return g.dot(h) + 0.5 * h.dot(H * h) + eta / 6.0 * r * r * r;
}

inline double cubic_model_value(const CubicModel& m, const Vector& h) {
  return cubic_model_value(m.g, m.H, m.eta, h);
}

/// Upper bound on ||h*||: (||H|| + sqrt(||H||^2 + 2 eta ||g||)) / eta.
inline double cubic_radius_bound(double h_norm, double g_norm, double eta) {
  return (h_norm + std::sqrt(h_norm * h_norm + 2.0 * eta * g_norm)) / eta;
}

namespace detail {

inline void validate_model(const CubicModel& m) {
  if (!(m.eta > 0.0) || !std::isfinite(m.eta)) throw ConfigError("cubic model: eta must be positive");
  if (m.H.rows() != m.H.cols() || m.H.rows() != m.g.size())
    throw ContractViolation("cubic model: dimension mismatch between g and H");
  if (m.anchor.size() != 0 && m.anchor.size() != m.g.size())
    throw ContractViolation("cubic model: anchor dimension mismatch");
  if (!is_symmetric(m.H, 1e-12 * std::max(1.0, m.H.cwiseAbs().maxCoeff())))
    throw ContractViolation("cubic model: H is not symmetric");
}

struct SecularResult {
  Vector s;  // step in eigen coordinates
  int iterations = 0;
};

// Solves the secular equation in eigen coordinates of H:
//   phi(r) = ||(Theta + (eta/2) r I)^{-1} ghat|| - r = 0,   r > max(0, -2 theta_min / eta).
// phi is convex and decreasing there, so Newton from the left of the root is
// monotone; bisection catches every step that would leave the bracket.
inline SecularResult solve_secular(const Vector& theta, const Vector& ghat, double eta,
                                   double residual_target, int max_iters = 200) {
  const Index n = theta.size();
  const double g_norm = ghat.norm();
  const double theta_min = theta.minCoeff();
  const double h_norm = theta.cwiseAbs().maxCoeff();
  const double r_low = std::max(0.0, -2.0 * theta_min / eta);

  // Bottom eigenspace and whether g is (numerically) orthogonal to it.
  const double eig_tol = 1e-12 * std::max(1.0, h_norm);
  std::vector<bool> bottom(static_cast<std::size_t>(n), false);
  double bottom_mass = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (theta[i] <= theta_min + eig_tol) {
      bottom[static_cast<std::size_t>(i)] = true;
      bottom_mass += ghat[i] * ghat[i];
    }
  }
  const bool orthogonal_to_bottom = bottom_mass <= 1e-24 * g_norm * g_norm;

  SecularResult out;
  out.s = Vector::Zero(n);

  if (g_norm == 0.0) {
    if (r_low > 0.0) out.s[0] = r_low;  // nonconvex, g = 0: move along the bottom eigenvector
    return out;
  }

  auto shift = [&](Index i, double r) { return theta[i] + 0.5 * eta * r; };
  auto skip = [&](Index i) { return orthogonal_to_bottom && bottom[static_cast<std::size_t>(i)]; };
  // Returns (||s(r)||, d||s||/dr); +inf norm at a pole.
  auto norm_and_slope = [&](double r) -> std::pair<double, double> {
    double sq = 0.0, dsq = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (skip(i)) continue;
      const double d = shift(i, r);
      if (d <= 0.0) {
        if (ghat[i] == 0.0) continue;
        return {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
      }
      const double q = ghat[i] * ghat[i] / (d * d);
      sq += q;
      dsq += -eta * q / d;  // d/dr of ghat^2 / d^2
    }
    const double nrm = std::sqrt(sq);
    return {nrm, nrm > 0.0 ? 0.5 * dsq / nrm : 0.0};
  };
  auto fill = [&](double r) {
    for (Index i = 0; i < n; ++i) {
      const double d = shift(i, r);
      out.s[i] = (skip(i) || d <= 0.0) ? 0.0 : -ghat[i] / d;
    }
  };

  if (orthogonal_to_bottom && r_low > 0.0) {
    const double at_low = norm_and_slope(r_low).first;
    if (at_low <= r_low) {
      // Hard case: fill the missing length with a bottom eigenvector.
      fill(r_low);
      Index b = 0;
      while (!bottom[static_cast<std::size_t>(b)]) ++b;
      out.s[b] = std::sqrt(std::max(0.0, r_low * r_low - at_low * at_low));
      return out;
    }
  }

  double lo = r_low;
  double hi = std::max(cubic_radius_bound(h_norm, g_norm, eta), r_low);
  while (norm_and_slope(hi).first - hi > 0.0) hi *= 2.0;

  double r = lo;
  auto [nrm, slope] = norm_and_slope(r);
  if (!std::isfinite(nrm)) {
    r = 0.5 * (lo + hi);
    std::tie(nrm, slope) = norm_and_slope(r);
  }
  double best_resid = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iters; ++it) {
    const double phi = nrm - r;
    const double resid = 0.5 * eta * std::abs(phi) * nrm;  // KKT residual at this r
    best_resid = std::min(best_resid, resid);
    out.iterations = it;
    if (resid <= residual_target || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      fill(r);
      return out;
    }
    if (phi > 0.0) lo = r; else hi = r;
    double next = r - phi / (slope - 1.0);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    r = next;
    std::tie(nrm, slope) = norm_and_slope(r);
  }
  throw NonconvergenceError("secular equation did not converge", best_resid);
}

inline CubicSolution certify(const Vector& g, const SymMatrix& H, double eta, Vector h,
                             double lambda_min_h) {
  CubicSolution sol;
  sol.multiplier = 0.5 * eta * h.norm();
  sol.kkt_residual = (H * h + sol.multiplier * h + g).norm();
  sol.psd_certificate = lambda_min_h + sol.multiplier;
  sol.model_decrease = -cubic_model_value(g, H, eta, h);
  sol.step = std::move(h);
  return sol;
}

}  // namespace detail

/// Global minimizer of the cubic model via eigendecomposition of H and the
/// scalar secular equation in r = ||h||. Handles indefinite H, including the
/// hard case.
inline CubicSolution solve_exact(const CubicModel& model, double tol = 1e-12) {
  detail::validate_model(model);
  if (!(tol > 0.0)) throw ConfigError("solve_exact: tol must be positive");
  const Index n = model.g.size();
  if (n == 0) return {};
  Eigen::SelfAdjointEigenSolver<SymMatrix> eig(model.H);
  const Vector ghat = eig.eigenvectors().transpose() * model.g;
  const double target = 0.1 * tol * std::max(1.0, model.g.norm());
  auto sec = detail::solve_secular(eig.eigenvalues(), ghat, model.eta, target);
  CubicSolution sol = detail::certify(model.g, model.H, model.eta, eig.eigenvectors() * sec.s,
                                      eig.eigenvalues().minCoeff());
  sol.iterations = sec.iterations;
  sol.krylov_dim = n;
  return sol;
}

/// Lanczos/Krylov reduction of the cubic model with an arbitrary symmetric
/// operator `apply(v) -> H v`.
///
/// The reduced model on span{g, Hg, ..., H^{k-1} g} is tridiagonal and is
/// solved exactly; k grows until the full-space KKT residual (obtained from
/// the Lanczos relation) is below tol * max(1, ||g||) or k reaches
/// min(n, max_dim). The psd certificate is the Ritz estimate
/// lambda_min(T_k) + lambda*; the dense overload replaces it with the exact one.
template <class MatVec>
CubicSolution solve_lanczos_op(MatVec&& apply, const Vector& g, double eta, Index max_dim,
                               double tol = 1e-10) {
  if (!(eta > 0.0)) throw ConfigError("solve_lanczos: eta must be positive");
  if (max_dim < 1) throw ConfigError("solve_lanczos: max_dim must be >= 1");
  const Index n = g.size();
  const double g_norm = g.norm();
  CubicSolution best;
  best.step = Vector::Zero(n);
  if (g_norm == 0.0) return best;

  const Index k_max = std::min(n, max_dim);
  const double target = tol * std::max(1.0, g_norm);
  Eigen::MatrixXd q(n, k_max + 1);
  std::vector<double> alpha, beta;
  q.col(0) = g / g_norm;
  double best_resid = std::numeric_limits<double>::infinity();
  double scale = 0.0;

  for (Index k = 1; k <= k_max; ++k) {
    const Index j = k - 1;
    Vector w = apply(Vector(q.col(j)));
    const double a = q.col(j).dot(w);
    alpha.push_back(a);
    w -= a * q.col(j);
    if (j > 0) w -= beta.back() * q.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(k) * (q.leftCols(k).transpose() * w);
    const double b = w.norm();
    scale = std::max({scale, std::abs(a), b});
    const bool breakdown = b <= 1e-13 * std::max(1.0, scale);

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Index i = 0; i < k; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    Vector ghat = g_norm * eig.eigenvectors().row(0).transpose();
    auto sec = detail::solve_secular(eig.eigenvalues(), ghat, eta, 0.1 * target);
    const Vector hk = eig.eigenvectors() * sec.s;
    const double mult = 0.5 * eta * hk.norm();
    Vector reduced = t * hk + mult * hk;
    reduced[0] += g_norm;
    const double tail = breakdown ? 0.0 : b * hk[k - 1];
    const double resid = std::sqrt(reduced.squaredNorm() + tail * tail);

    if (resid < best_resid) {
      best_resid = resid;
      best.step = q.leftCols(k) * hk;
      best.multiplier = 0.5 * eta * best.step.norm();
      best.kkt_residual = resid;
      best.psd_certificate = eig.eigenvalues().minCoeff() + best.multiplier;
      best.krylov_dim = k;
      best.model_decrease = -(g.dot(best.step) + 0.5 * hk.dot(t * hk) +
                              eta / 6.0 * std::pow(best.step.norm(), 3));
    }
    best.iterations = static_cast<int>(k);
    if (resid <= target || breakdown) {
      best.approximate = false;
      return best;
    }
    beta.push_back(b);
    q.col(k) = w / b;
  }
  best.approximate = best_resid > target;
  return best;
}

/// Dense-matrix Lanczos solve; certificate fields are recomputed in the full
/// space.
inline CubicSolution solve_lanczos(const CubicModel& model, Index max_dim = 50, double tol = 1e-10) {
  detail::validate_model(model);
  const SymMatrix& H = model.H;
  CubicSolution sol = solve_lanczos_op([&H](const Vector& v) { return Vector(H * v); }, model.g,
                                       model.eta, max_dim, tol);
  if (model.g.norm() == 0.0) return sol;
  const bool approx = sol.approximate;
  const int iters = sol.iterations;
  const Index dim = sol.krylov_dim;
  Eigen::SelfAdjointEigenSolver<SymMatrix> eig(H, Eigen::EigenvaluesOnly);
  sol = detail::certify(model.g, H, model.eta, std::move(sol.step), eig.eigenvalues().minCoeff());
  sol.approximate = approx || sol.kkt_residual > tol * std::max(1.0, model.g.norm());
  sol.iterations = iters;
  sol.krylov_dim = dim;
  return sol;
}

namespace detail {
struct NoObserver {
  void operator()(int, double) const noexcept {}
};
}  // namespace detail

/// Gradient descent on the cubic model from h = 0.
///
/// `step_size <= 0` selects 1 / (||H|| + eta r_max). `observer(iter, m(h))`
/// sees the model value after every iteration. Runs until the KKT residual
/// falls below tol * max(1, ||g||); hitting max_iters first sets
/// `approximate`.
template <class Observer = detail::NoObserver>
CubicSolution solve_gd(const CubicModel& model, int max_iters, double step_size = 0.0,
                       double tol = 1e-10, Observer&& observer = {}) {
  detail::validate_model(model);
  const Index n = model.g.size();
  const double g_norm = model.g.norm();
  Eigen::SelfAdjointEigenSolver<SymMatrix> eig(model.H, Eigen::EigenvaluesOnly);
  const double lambda_min = n > 0 ? eig.eigenvalues().minCoeff() : 0.0;
  if (g_norm == 0.0) {
    CubicSolution sol = detail::certify(model.g, model.H, model.eta, Vector::Zero(n), lambda_min);
    return sol;
  }
  const double h_norm = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double bound = 1.0 / (h_norm + model.eta * cubic_radius_bound(h_norm, g_norm, model.eta));
  if (step_size <= 0.0) step_size = bound;
  if (step_size > bound * (1.0 + 1e-12))
    throw ConfigError("solve_gd: step size exceeds 1/(||H|| + eta r_max)");

  const double target = tol * std::max(1.0, g_norm);
  Vector h = Vector::Zero(n);
  int it = 0;
  for (; it < max_iters; ++it) {
    Vector grad = model.g + model.H * h + 0.5 * model.eta * h.norm() * h;
    if (grad.norm() <= target) break;
    h -= step_size * grad;
    observer(it + 1, cubic_model_value(model, h));
  }
  CubicSolution sol = detail::certify(model.g, model.H, model.eta, std::move(h), lambda_min);
  sol.iterations = it;
  sol.approximate = sol.kkt_residual > 1e-4 * std::max(1.0, g_norm);
  return sol;
}

}  // namespace incr
