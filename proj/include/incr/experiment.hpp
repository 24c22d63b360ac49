#pragma once

// Experiment description shared by the command-line runner and the
// acceptance suite: which problem to build, which solver to run on it, and
// with what Hessian approximation.

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>

#include "incr/aincr.hpp"
#include "incr/baselines.hpp"
#include "incr/data_io.hpp"
#include "incr/incr.hpp"
#include "incr/multistage.hpp"
#include "incr/synthetic.hpp"
#include "incr/trace.hpp"

namespace incr {

struct ExperimentConfig {
  // Problem. `data` takes precedence over `synthetic`.
  std::string data;
  std::string test_data;
  double test_fraction = 0.2;          // used when data is set and test_data is not; 0 disables
  std::string synthetic = "mushrooms";  // mushrooms | logistic | quadratic
  std::size_t synthetic_m = 1000;
  std::size_t synthetic_n = 20;
  std::uint64_t data_seed = 7;

  // Solver.
  std::string solver = "incr";     // incr | aincr | multistage | cubic_gd | ag
  std::string hessian = "exact";   // exact | a1 | a4 | raw | identity
  std::string sample_size = "0.005m";
  double delta = 1e-2;
  std::optional<double> gamma, lambda, lipschitz, mu_u;
  std::string eta_policy = "fixed";      // fixed | adaptive
  std::string alpha_schedule = "convex";  // convex | strong
  double radius = 1e6;                    // R of the adaptive policy
  std::string aincr_mode = "convex";      // convex | strong
  bool aincr_lambda = false;              // convex mode: keep lambda in the lower models
  std::optional<double> r_bar;
  std::optional<double> r0;
  std::size_t stages = 10;
  std::string subproblem = "auto";  // exact | lanczos | auto
  std::size_t max_iters = 100;
  double grad_tol = 1e-8;
  std::uint64_t seed = 1;
  bool metrics = true;
  std::string output;
};

/// |S_H| from "32", "0.005" or "0.005m"; fractions must lie in (0, 1].
inline std::size_t resolve_sample_size(const std::string& spec, std::size_t m) {
  if (spec.empty()) throw ConfigError("sample_size is empty");
  std::string body = spec;
  const bool suffixed = body.back() == 'm';
  if (suffixed) body.pop_back();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (ec != std::errc() || ptr != body.data() + body.size())
    throw ConfigError("sample_size: cannot parse '" + spec + "'");
  const bool fractional = suffixed || body.find_first_of(".eE") != std::string::npos;
  std::size_t count = 0;
  if (fractional) {
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError("sample_size fraction must lie in (0, 1]");
    count = static_cast<std::size_t>(std::ceil(v * static_cast<double>(m) - 1e-9));
  } else {
    if (!(v >= 1.0)) throw ConfigError("sample_size must be >= 1");
    count = static_cast<std::size_t>(v);
  }
  if (count < 1 || count > m) throw ConfigError("sample_size resolves outside [1, m]");
  return count;
}

inline HessianMode parse_hessian_mode(const std::string& s) {
  if (s == "exact") return HessianMode::exact;
  if (s == "a1") return HessianMode::shifted_a1;
  if (s == "a4") return HessianMode::shifted_a4;
  if (s == "raw") return HessianMode::raw;
  if (s == "identity") return HessianMode::scaled_identity;
  throw ConfigError("unknown hessian mode '" + s + "'");
}

inline SubproblemMethod parse_subproblem(const std::string& s) {
  if (s == "exact") return SubproblemMethod::exact;
  if (s == "lanczos") return SubproblemMethod::lanczos;
  if (s == "auto") return SubproblemMethod::automatic;
  throw ConfigError("unknown subproblem method '" + s + "'");
}

/// Error level certified by each Hessian mode for a given delta.
inline double default_mu_u(HessianMode mode, double delta, double lipschitz) {
  switch (mode) {
    case HessianMode::exact: return 0.0;
    case HessianMode::shifted_a1: return 2.0 * delta;
    case HessianMode::shifted_a4: return 4.0 * delta;
    case HessianMode::raw: return delta;
    case HessianMode::scaled_identity: return lipschitz;
  }
  return 0.0;
}

/// An instantiated problem plus the data needed for metrics.
struct ProblemInstance {
  std::unique_ptr<Objective> oracle;
  std::optional<Dataset> train;
  std::optional<Dataset> test;
  Vector x0;
  SmoothnessInfo smoothness;  // lipschitz_grad always set
};

/// Largest eigenvalue of a symmetric matrix.
inline double max_eigenvalue(const SymMatrix& h) {
  Eigen::SelfAdjointEigenSolver<SymMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset '" + path + "'");
  return parse_libsvm(in, path);
}

inline ProblemInstance build_problem(const ExperimentConfig& cfg) {
  ProblemInstance inst;
  const bool logistic = !cfg.data.empty() || cfg.synthetic != "quadratic";
  if (logistic) {
    Dataset all;
    if (!cfg.data.empty()) {
      all = load_dataset(cfg.data);
    } else if (cfg.synthetic == "mushrooms") {
      synthetic::MushroomLikeOptions opts;
      opts.seed = cfg.data_seed;
      all = synthetic::mushroom_like(opts);
    } else if (cfg.synthetic == "logistic") {
      all = synthetic::gaussian_logistic(cfg.synthetic_m, cfg.synthetic_n, cfg.data_seed);
    } else {
      throw ConfigError("unknown synthetic problem '" + cfg.synthetic + "'");
    }
    if (!cfg.test_data.empty()) {
      inst.train = std::move(all);
      inst.test = load_dataset(cfg.test_data);
    } else if (cfg.test_fraction > 0.0) {
      auto [train, test] = split_train_test(all, cfg.test_fraction, cfg.data_seed);
      inst.train = std::move(train);
      inst.test = std::move(test);
    } else {
      inst.train = std::move(all);
    }
    const std::size_t dim = std::max(inst.train->dim, inst.test ? inst.test->dim : std::size_t{0});
    inst.train->dim = dim;
    if (inst.test) inst.test->dim = dim;
    auto problem = std::make_unique<LogisticProblem>(make_logistic_problem(*inst.train, cfg.lambda, dim));
    inst.smoothness = problem->smoothness();
    // Every logistic Hessian is dominated by the one at the origin.
    inst.smoothness.lipschitz_grad = max_eigenvalue(problem->hessian(Vector::Zero(problem->dim())));
    inst.oracle = std::move(problem);
  } else {
    if (cfg.synthetic_n < 1) throw ConfigError("synthetic_n must be >= 1");
    auto problem = std::make_unique<QuadraticProblem>(
        synthetic::random_quadratic(static_cast<Index>(cfg.synthetic_n), 0.1, 10.0, cfg.data_seed));
    inst.smoothness = problem->smoothness();
    inst.oracle = std::move(problem);
  }
  if (cfg.lambda && !logistic) inst.smoothness.lambda = *cfg.lambda;
  inst.x0 = Vector::Zero(inst.oracle->dim());
  return inst;
}

struct ExperimentResult {
  IterateTrace trace;
  std::size_t sample_count = 0;
  double mu_u = 0.0;
  SmoothnessInfo smoothness;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProblemInstance& inst) {
  const Objective& oracle = *inst.oracle;
  SmoothnessInfo sm = inst.smoothness;
  if (cfg.gamma) sm.gamma = *cfg.gamma;
  if (cfg.lipschitz) sm.lipschitz_grad = *cfg.lipschitz;
  sm.validate();
  const double lip = *sm.lipschitz_grad;

  HessianStrategy hs;
  hs.mode = parse_hessian_mode(cfg.hessian);
  hs.delta = cfg.delta;
  hs.rng_seed = cfg.seed;
  hs.lipschitz = lip;
  ExperimentResult res;
  res.smoothness = sm;
  if (is_subsampled(hs.mode)) {
    if (oracle.component_count() < 2) throw ConfigError("subsampled Hessians need a finite-sum problem");
    hs.sample_count = resolve_sample_size(cfg.sample_size, oracle.component_count());
    res.sample_count = hs.sample_count;
  }
  res.mu_u = cfg.mu_u ? *cfg.mu_u : default_mu_u(hs.mode, hs.delta, lip);

  SubproblemOptions sub;
  sub.method = parse_subproblem(cfg.subproblem);

  RunOptions run;
  run.max_iters = cfg.max_iters;
  run.grad_tol = cfg.grad_tol;
  if (cfg.metrics && inst.train) {
    const Dataset* train = &*inst.train;
    const Dataset* test = inst.test ? &*inst.test : nullptr;
    run.metrics = [train, test](const Vector& x) {
      return std::pair<double, double>{misclassification_error(x, *train),
                                       test ? misclassification_error(x, *test)
                                            : std::numeric_limits<double>::quiet_NaN()};
    };
  }

  if (cfg.solver == "incr") {
    IncrConfig ic;
    if (cfg.eta_policy == "adaptive") {
      ic.eta_policy = EtaPolicy::adaptive(res.mu_u, cfg.radius);
    } else if (cfg.eta_policy == "fixed") {
      ic.eta_policy.mu_u = res.mu_u;
      ic.eta_policy.radius = cfg.radius;
    } else {
      throw ConfigError("unknown eta_policy '" + cfg.eta_policy + "'");
    }
    if (cfg.alpha_schedule == "strong") {
      ic.alpha_schedule = AlphaKind::strong;
    } else if (cfg.alpha_schedule != "convex") {
      throw ConfigError("unknown alpha_schedule '" + cfg.alpha_schedule + "'");
    }
    ic.hessian = hs;
    ic.smoothness = sm;
    ic.subproblem = sub;
    ic.run = run;
    res.trace = run_incr(inst.x0, oracle, ic);
  } else if (cfg.solver == "aincr") {
    AincrParams params;
    if (cfg.aincr_mode == "convex") {
      params = AincrParams::convex(sm.gamma, res.mu_u, cfg.aincr_lambda ? sm.lambda : 0.0);
    } else if (cfg.aincr_mode == "strong") {
      if (!cfg.r_bar) throw ConfigError("aincr strong mode needs R_bar");
      params = AincrParams::strong(sm.lambda, sm.gamma, res.mu_u, *cfg.r_bar);
    } else {
      throw ConfigError("unknown aincr_mode '" + cfg.aincr_mode + "'");
    }
    AincrConfig ac;
    ac.hessian = hs;
    ac.subproblem = sub;
    ac.run = run;
    res.trace = run_aincr(inst.x0, oracle, params, ac);
  } else if (cfg.solver == "multistage") {
    if (!cfg.r0) throw ConfigError("multistage needs R0 (a bound on ||z0 - x*||)");
    MultistageConfig mc;
    mc.smoothness = sm;
    mc.mu_u = res.mu_u;
    mc.hessian = hs;
    mc.subproblem = sub;
    mc.stages = cfg.stages;
    mc.grad_tol = cfg.grad_tol;
    mc.run = run;
    res.trace = run_multistage(inst.x0, *cfg.r0, oracle, mc).trace;
  } else if (cfg.solver == "cubic_gd" || cfg.solver == "ag") {
    BaselineConfig bc;
    bc.method = cfg.solver == "ag" ? BaselineConfig::Method::nesterov_ag : BaselineConfig::Method::cubic_gd;
    bc.lipschitz = lip;
    bc.lambda = sm.lambda;
    bc.eta = std::max(sm.gamma, kEtaFloor);
    bc.run = run;
    res.trace = bc.method == BaselineConfig::Method::nesterov_ag ? nesterov_ag_run(inst.x0, oracle, bc)
                                                                 : run_cubic_gd(inst.x0, oracle, bc);
  } else {
    throw ConfigError("unknown solver '" + cfg.solver + "'");
  }
  return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const ProblemInstance inst = build_problem(cfg);
  return run_experiment(cfg, inst);
}

/// Writes the trace of a finished run to cfg.output (no-op when empty).
inline void write_output(const ExperimentConfig& cfg, const IterateTrace& trace) {
  if (cfg.output.empty()) return;
  std::ofstream out(cfg.output);
  if (!out) throw ConfigError("cannot write '" + cfg.output + "'");
  write_trace_csv(out, trace);
  if (!out) throw ConfigError("write failed for '" + cfg.output + "'");
}

}  // namespace incr
