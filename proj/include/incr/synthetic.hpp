#pragma once

// Seeded synthetic problem generators used by tests, the acceptance suite and
// the CLI when no dataset file is given.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "incr/data_io.hpp"
#include "incr/problem.hpp"

namespace incr::synthetic {

/// Category counts of 22 one-hot encoded attributes, 112 columns in total.
inline constexpr std::array<std::size_t, 22> kMushroomGroups = {
    6, 4, 10, 2, 9, 2, 2, 2, 12, 2, 5, 4, 4, 9, 9, 1, 4, 3, 5, 9, 6, 2};

struct MushroomLikeOptions {
  std::size_t samples = 8124;  // 6499 train + 1625 test
  double label_noise = 0.02;
  double positive_rate = 0.48;
  std::uint64_t seed = 7;
};

/// Binary one-hot dataset with the shape of the LIBSVM "mushrooms" file:
/// 22 categorical attributes expanded to 112 indicator features, labels from
/// a two-class latent model with a small fraction of flipped labels.
inline Dataset mushroom_like(const MushroomLikeOptions& opts = {}) {
  std::mt19937_64 rng(opts.seed);
  std::gamma_distribution<double> concentration(0.6, 1.0);
  // Class-conditional category probabilities per attribute.
  std::array<std::vector<std::vector<double>>, 2> probs;
  for (auto& cls : probs) {
    for (std::size_t card : kMushroomGroups) {
      std::vector<double> p(card);
      double sum = 0.0;
      for (auto& v : p) sum += (v = concentration(rng) + 1e-3);
      for (auto& v : p) v /= sum;
      cls.push_back(std::move(p));
    }
  }
  std::bernoulli_distribution positive(opts.positive_rate);
  std::bernoulli_distribution flip(opts.label_noise);
  Dataset ds;
  ds.name = "mushrooms-synthetic";
  ds.dim = 112;
  ds.samples.reserve(opts.samples);
  for (std::size_t i = 0; i < opts.samples; ++i) {
    const int cls = positive(rng) ? 1 : 0;
    SparseSample s;
    std::size_t offset = 0;
    for (std::size_t g = 0; g < kMushroomGroups.size(); ++g) {
      const auto& p = probs[static_cast<std::size_t>(cls)][g];
      std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
      s.indices.push_back(offset + pick(rng) + 1);
      s.values.push_back(1.0);
      offset += kMushroomGroups[g];
    }
    s.label = cls == 1 ? 1 : -1;
    if (flip(rng)) s.label = -s.label;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

/// Dense Gaussian features with labels drawn from a logistic model around a
/// random weight vector (never separable for moderate m/n).
inline Dataset gaussian_logistic(std::size_t m, std::size_t n, std::uint64_t seed,
                                 double signal = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> w(n);
  for (auto& v : w) v = normal(rng) * signal / std::sqrt(static_cast<double>(n));
  Dataset ds;
  ds.name = "gaussian-logistic";
  ds.dim = n;
  for (std::size_t i = 0; i < m; ++i) {
    SparseSample s;
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double u = normal(rng);
      s.indices.push_back(j + 1);
      s.values.push_back(u);
      z += u * w[j];
    }
    const double p = 1.0 / (1.0 + std::exp(-z));
    s.label = unif(rng) < p ? 1 : -1;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

/// Symmetric matrix V diag(eigs) V' with a Haar-random orthogonal V.
inline SymMatrix with_spectrum(const Vector& eigs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = eigs.size();
  Eigen::MatrixXd a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ();
  SymMatrix m = q * eigs.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

/// Positive definite quadratic with eigenvalues spread log-uniformly in [lo, hi].
inline QuadraticProblem random_quadratic(Index n, double lo, double hi, std::uint64_t seed) {
  Vector eigs(n);
  for (Index i = 0; i < n; ++i)
    eigs[i] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  std::mt19937_64 rng(detail::mix_seed(seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector b(n);
  for (Index i = 0; i < n; ++i) b[i] = normal(rng);
  return QuadraticProblem(with_spectrum(eigs, seed), b);
}

}  // namespace incr::synthetic
