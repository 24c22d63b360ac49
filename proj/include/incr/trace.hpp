#pragma once

// Per-iteration records shared by every solver, their CSV form, and the
// run-level options common to all drivers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "incr/types.hpp"

namespace incr {

struct IterateRow {
  std::size_t t = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double eta = 0.0;        // regularization used for the step leaving this iterate
  double step_norm = 0.0;  // ||x_{t+1} - x_t|| (or - w_t for accelerated methods)
  double mu = 0.0;         // Hessian error level reported by the approximation
  double elapsed = 0.0;    // seconds since the run started
  std::optional<double> train_err;
  std::optional<double> test_err;
};

struct IterateTrace {
  std::vector<IterateRow> rows;
  std::vector<Vector> points;          // x_t, filled when RunOptions::record_iterates
  std::vector<std::size_t> stage_starts;  // row index where each restart stage begins
  std::size_t condition_failures = 0;  // accelerated methods only
  Vector final_point;

  const IterateRow& last() const { return rows.back(); }
};

/// Train/test misclassification callback evaluated at each recorded iterate.
using MetricsFn = std::function<std::pair<double, double>(const Vector&)>;

struct RunOptions {
  std::size_t max_iters = 1000;
  double grad_tol = 1e-8;
  bool record_iterates = false;
  MetricsFn metrics;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Appends a row for iterate x; the step fields are filled in later.
inline void record(IterateTrace& trace, const RunOptions& opts, std::size_t t, const Vector& x,
                   double f, double grad_norm, const Stopwatch& clock) {
  IterateRow row;
  row.t = t;
  row.f = f;
  row.grad_norm = grad_norm;
  row.elapsed = clock.seconds();
  if (opts.metrics) {
    auto [train, test] = opts.metrics(x);
    // NaN marks a missing split.
    if (!std::isnan(train)) row.train_err = train;
    if (!std::isnan(test)) row.test_err = test;
  }
  trace.rows.push_back(row);
  if (opts.record_iterates) trace.points.push_back(x);
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kTraceHeader = "iter,time_s,f,grad_norm,eta,step_norm,mu_t,train_err,test_err";

/// Writes the trace as CSV. All columns except time_s are printed with
/// round-trip precision so equal runs give equal bytes.
inline void write_trace_csv(std::ostream& os, const IterateTrace& trace) {
  os << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    char time_buf[32];
    std::snprintf(time_buf, sizeof time_buf, "%.6f", r.elapsed);
    os << r.t << ',' << time_buf << ',' << detail::format_real(r.f) << ','
       << detail::format_real(r.grad_norm) << ',' << detail::format_real(r.eta) << ','
       << detail::format_real(r.step_norm) << ',' << detail::format_real(r.mu) << ','
       << (r.train_err ? detail::format_real(*r.train_err) : "") << ','
       << (r.test_err ? detail::format_real(*r.test_err) : "") << '\n';
  }
}

/// Reads a trace written by write_trace_csv. Throws FormatError on a header
/// mismatch or a malformed row.
inline IterateTrace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("trace: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw FormatError("trace: unexpected header '" + line + "'");
  IterateTrace trace;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 9) throw FormatError("trace: line " + std::to_string(lineno) + " has " +
                                             std::to_string(cells.size()) + " columns");
    auto num = [&](const std::string& s) {
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw FormatError("");
        return v;
      } catch (const std::exception&) {
        throw FormatError("trace: line " + std::to_string(lineno) + ": bad number '" + s + "'");
      }
    };
    IterateRow r;
    r.t = static_cast<std::size_t>(num(cells[0]));
    r.elapsed = num(cells[1]);
    r.f = num(cells[2]);
    r.grad_norm = num(cells[3]);
    r.eta = num(cells[4]);
    r.step_norm = num(cells[5]);
    r.mu = num(cells[6]);
    if (!cells[7].empty()) r.train_err = num(cells[7]);
    if (!cells[8].empty()) r.test_err = num(cells[8]);
    trace.rows.push_back(r);
  }
  return trace;
}

}  // namespace incr
