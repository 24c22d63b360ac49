#pragma once

// LIBSVM-format datasets: parsing, writing, seeded splits and
// misclassification error.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "incr/problem.hpp"

namespace incr {

struct SparseSample {
  std::vector<std::size_t> indices;  // 1-based, strictly increasing
  std::vector<double> values;
  int label = 1;                     // -1 or +1

  bool operator==(const SparseSample&) const = default;
};

struct Dataset {
  std::vector<SparseSample> samples;
  std::size_t dim = 0;
  std::string name;
  std::size_t remapped_labels = 0;  // labels 0/2 rewritten to -1/+1 while parsing

  std::size_t size() const { return samples.size(); }
};

struct ParseOptions {
  /// Receives one notice line when labels were remapped.
  std::ostream* notice = nullptr;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_real(std::string_view tok, std::size_t line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
    throw ParseError("non-numeric token '" + std::string(tok) + "'", line);
  return v;
}

inline std::size_t parse_index(std::string_view tok, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
    throw ParseError("bad feature index '" + std::string(tok) + "'", line);
  if (v == 0) throw ParseError("feature index 0 (indices are 1-based)", line);
  return v;
}

}  // namespace detail

/// Parses `<label> <idx>:<val> ...` lines. Blank lines and `#` comments are
/// skipped; labels 0 and 2 are mapped to -1 and +1.
inline Dataset parse_libsvm(std::istream& in, std::string name = {}, const ParseOptions& opts = {}) {
  Dataset ds;
  ds.name = std::move(name);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    SparseSample sample;
    std::size_t pos = 0;
    bool first = true;
    while (pos < line.size()) {
      const auto end = line.find_first_of(" \t", pos);
      const auto tok = line.substr(pos, end == std::string_view::npos ? line.size() - pos : end - pos);
      pos = end == std::string_view::npos ? line.size() : line.find_first_not_of(" \t", end);
      if (pos == std::string_view::npos) pos = line.size();
      if (first) {
        first = false;
        const double lab = detail::parse_real(tok, lineno);
        if (lab == 1.0) {
          sample.label = 1;
        } else if (lab == -1.0) {
          sample.label = -1;
        } else if (lab == 0.0) {
          sample.label = -1;
          ++ds.remapped_labels;
        } else if (lab == 2.0) {
          sample.label = 1;
          ++ds.remapped_labels;
        } else {
          throw ParseError("unmappable label '" + std::string(tok) + "'", lineno);
        }
        continue;
      }
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) throw ParseError("expected idx:value, got '" + std::string(tok) + "'", lineno);
      const std::size_t idx = detail::parse_index(tok.substr(0, colon), lineno);
      const double val = detail::parse_real(tok.substr(colon + 1), lineno);
      if (!sample.indices.empty() && idx <= sample.indices.back())
        throw ParseError("feature indices not strictly increasing", lineno);
      sample.indices.push_back(idx);
      sample.values.push_back(val);
    }
    if (!sample.indices.empty()) ds.dim = std::max(ds.dim, sample.indices.back());
    ds.samples.push_back(std::move(sample));
  }
  if (ds.remapped_labels > 0 && opts.notice)
    *opts.notice << "notice: remapped " << ds.remapped_labels << " labels from {0,2} to {-1,+1}\n";
  return ds;
}

/// Writes the dataset in LIBSVM format with round-trip precision.
inline void write_libsvm(std::ostream& os, const Dataset& ds) {
  char buf[64];
  for (const auto& s : ds.samples) {
    os << (s.label > 0 ? "+1" : "-1");
    for (std::size_t k = 0; k < s.indices.size(); ++k) {
      const auto res = std::to_chars(buf, buf + sizeof buf, s.values[k]);
      os << ' ' << s.indices[k] << ':' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    os << '\n';
  }
}

/// Seeded shuffle, then the first round(test_fraction * m) samples go to test.
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                                    std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("test_fraction must lie in (0, 1)");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(ds.size())));
  Dataset train, test;
  train.name = ds.name + ".train";
  test.name = ds.name + ".test";
  train.dim = test.dim = ds.dim;
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < n_test ? test : train).samples.push_back(ds.samples[order[k]]);
  return {std::move(train), std::move(test)};
}

/// Fraction of samples with sign(<u, x>) != label, sign(0) = +1.
inline double misclassification_error(const Vector& x, const Dataset& ds) {
  if (static_cast<std::size_t>(x.size()) < ds.dim)
    throw ContractViolation("misclassification_error: weight vector shorter than dataset dim");
  if (ds.samples.empty()) return 0.0;
  std::size_t wrong = 0;
  for (const auto& s : ds.samples) {
    double z = 0.0;
    for (std::size_t k = 0; k < s.indices.size(); ++k) z += s.values[k] * x[static_cast<Index>(s.indices[k] - 1)];
    const int pred = z >= 0.0 ? 1 : -1;
    if (pred != s.label) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(ds.samples.size());
}

/// Row-major feature matrix with `dim` columns (0 = the dataset's own dim).
inline LogisticProblem::RowMatrix feature_matrix(const Dataset& ds, std::size_t dim = 0) {
  if (dim == 0) dim = ds.dim;
  if (dim < ds.dim) throw ContractViolation("feature_matrix: dim smaller than dataset dim");
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    for (std::size_t k = 0; k < s.indices.size(); ++k)
      trips.emplace_back(static_cast<int>(i), static_cast<int>(s.indices[k] - 1), s.values[k]);
  }
  LogisticProblem::RowMatrix u(static_cast<Index>(ds.samples.size()), static_cast<Index>(dim));
  u.setFromTriplets(trips.begin(), trips.end());
  return u;
}

/// Logistic objective over the dataset; lambda defaults to 1/m.
inline LogisticProblem make_logistic_problem(const Dataset& ds, std::optional<double> lambda = {},
                                             std::size_t dim = 0) {
  Vector labels(static_cast<Index>(ds.samples.size()));
  for (std::size_t i = 0; i < ds.samples.size(); ++i) labels[static_cast<Index>(i)] = ds.samples[i].label;
  const double reg = lambda ? *lambda : 1.0 / static_cast<double>(std::max<std::size_t>(1, ds.size()));
  return LogisticProblem(feature_matrix(ds, dim), std::move(labels), reg);
}

}  // namespace incr
