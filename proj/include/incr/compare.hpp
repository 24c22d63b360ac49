#pragma once

// Threshold-crossing comparison of solver traces: how many iterations (and
// seconds) each run needs to bring f within tau of the best value seen in
// any trace.

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "incr/trace.hpp"

namespace incr {

struct ThresholdHit {
  std::optional<std::size_t> iterations;
  std::optional<double> seconds;
};

/// First row with f <= level.
inline ThresholdHit first_reach(const IterateTrace& trace, double level) {
  for (const auto& r : trace.rows)
    if (r.f <= level) return {r.t, r.elapsed};
  return {};
}

inline double best_value(const std::vector<IterateTrace>& traces) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tr : traces)
    for (const auto& r : tr.rows) best = std::min(best, r.f);
  return best;
}

struct CompareReport {
  double f_best = 0.0;
  std::vector<double> taus;
  std::vector<std::string> names;
  std::vector<std::vector<ThresholdHit>> hits;  // [trace][tau]
  std::vector<std::size_t> order;               // by iterations to the last tau, unreached last
  std::vector<std::vector<std::string>> ties;
};

inline const std::vector<double>& default_taus() {
  static const std::vector<double> taus = {1e-2, 1e-4, 1e-6, 1e-8};
  return taus;
}

inline CompareReport compare_traces(const std::vector<std::string>& names,
                                    const std::vector<IterateTrace>& traces,
                                    const std::vector<double>& taus = default_taus()) {
  if (names.size() != traces.size()) throw ContractViolation("compare: names/traces size mismatch");
  if (traces.size() < 2) throw ConfigError("compare: need at least two traces");
  if (taus.empty()) throw ConfigError("compare: no thresholds");
  CompareReport rep;
  rep.f_best = best_value(traces);
  rep.taus = taus;
  rep.names = names;
  for (const auto& tr : traces) {
    std::vector<ThresholdHit> row;
    for (double tau : taus) row.push_back(first_reach(tr, rep.f_best + tau));
    rep.hits.push_back(std::move(row));
  }
  const std::size_t key = taus.size() - 1;
  auto iters = [&](std::size_t i) {
    const auto& h = rep.hits[i][key];
    return h.iterations ? *h.iterations : std::numeric_limits<std::size_t>::max();
  };
  rep.order.resize(traces.size());
  std::iota(rep.order.begin(), rep.order.end(), std::size_t{0});
  std::stable_sort(rep.order.begin(), rep.order.end(),
                   [&](std::size_t a, std::size_t b) { return iters(a) < iters(b); });
  for (std::size_t k = 0; k < rep.order.size();) {
    std::size_t e = k + 1;
    while (e < rep.order.size() && iters(rep.order[e]) == iters(rep.order[k]) &&
           iters(rep.order[k]) != std::numeric_limits<std::size_t>::max())
      ++e;
    if (e - k > 1) {
      std::vector<std::string> group;
      for (std::size_t j = k; j < e; ++j) group.push_back(names[rep.order[j]]);
      rep.ties.push_back(std::move(group));
    }
    k = e;
  }
  return rep;
}

inline void write_report(std::ostream& os, const CompareReport& rep) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", rep.f_best);
  os << "# f_best=" << buf << '\n';
  os << "rank,trace";
  for (double tau : rep.taus) {
    std::snprintf(buf, sizeof buf, "%.0e", tau);
    os << ",iters@" << buf << ",secs@" << buf;
  }
  os << '\n';
  for (std::size_t k = 0; k < rep.order.size(); ++k) {
    const std::size_t i = rep.order[k];
    os << k + 1 << ',' << rep.names[i];
    for (const auto& h : rep.hits[i]) {
      if (h.iterations) {
        std::snprintf(buf, sizeof buf, "%.6f", *h.seconds);
        os << ',' << *h.iterations << ',' << buf;
      } else {
        os << ",unreached,unreached";
      }
    }
    os << '\n';
  }
  for (const auto& group : rep.ties) {
    os << "# tie:";
    for (const auto& n : group) os << ' ' << n;
    os << '\n';
  }
}

}  // namespace incr
