// Command-line experiment runner.
//
//   incr_bench run --config exp.cfg [--key value ...]
//   incr_bench bench a.cfg b.cfg ... [--jobs N] [--output-dir DIR]
//   incr_bench compare trace1.csv trace2.csv ... [--output report.csv]
//   incr_bench subproblem model.txt [--method exact|lanczos|gd]
//
// Exit status: 0 success, 1 runtime failure, 2 bad configuration, 3 malformed input file.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "incr/compare.hpp"
#include "incr/cubic.hpp"
#include "incr/experiment.hpp"

namespace {

using incr::ExperimentConfig;

// CLI11 has no std::optional support here, so optional reals are read into
// plain doubles and copied over when the option was given.
struct OptionalReal {
  std::optional<double>* target = nullptr;
  double value = 0.0;
  CLI::Option* option = nullptr;
};

struct ExperimentOptions {
  ExperimentConfig cfg;
  std::vector<OptionalReal> optionals;

  std::string config_path;

  // CLI11 only reads config files on the root app, so subcommands take the
  // path as a plain option and the caller loads it before parsing.
  void bind(CLI::App& app, bool root) {
    if (root)
      app.set_config("--config", "", "flat `key = value` experiment file");
    else
      app.add_option("--config", config_path, "flat `key = value` experiment file; flags override it")
          ->check(CLI::ExistingFile);
    app.add_option("--data", cfg.data, "LIBSVM training file (overrides --synthetic)");
    app.add_option("--test_data", cfg.test_data, "LIBSVM test file");
    app.add_option("--test_fraction", cfg.test_fraction, "held-out fraction when no test file");
    app.add_option("--synthetic", cfg.synthetic, "mushrooms | logistic | quadratic");
    app.add_option("--synthetic_m", cfg.synthetic_m, "samples of the synthetic logistic problem");
    app.add_option("--synthetic_n", cfg.synthetic_n, "dimension of synthetic logistic/quadratic problems");
    app.add_option("--data_seed", cfg.data_seed, "seed for synthetic data and the train/test split");
    app.add_option("--solver", cfg.solver, "incr | aincr | multistage | cubic_gd | ag");
    app.add_option("--hessian", cfg.hessian, "exact | a1 | a4 | raw | identity");
    app.add_option("--sample_size", cfg.sample_size, "|S_H|: absolute, fraction, or e.g. 0.005m");
    app.add_option("--delta", cfg.delta, "subsampling accuracy delta");
    add_optional(app, "--gamma", cfg.gamma, "Hessian Lipschitz constant (default: problem bound)");
    add_optional(app, "--lambda", cfg.lambda, "l2 regularization (default 1/m)");
    add_optional(app, "--L", cfg.lipschitz, "gradient Lipschitz constant (default: estimated)");
    add_optional(app, "--mu_u", cfg.mu_u, "Hessian error level (default: from hessian mode)");
    add_optional(app, "--R_bar", cfg.r_bar, "AINCR strong mode distance bound");
    add_optional(app, "--R0", cfg.r0, "multistage bound on ||z0 - x*||");
    app.add_option("--R", cfg.radius, "R of the adaptive eta policy");
    app.add_option("--eta_policy", cfg.eta_policy, "fixed | adaptive");
    app.add_option("--alpha_schedule", cfg.alpha_schedule, "convex | strong");
    app.add_option("--aincr_mode", cfg.aincr_mode, "convex | strong");
    app.add_option("--aincr_lambda", cfg.aincr_lambda, "keep lambda in AINCR convex-mode lower models");
    app.add_option("--stages", cfg.stages, "multistage stage count");
    app.add_option("--subproblem", cfg.subproblem, "exact | lanczos | auto");
    app.add_option("--max_iters", cfg.max_iters, "iteration limit");
    app.add_option("--grad_tol", cfg.grad_tol, "stop when ||grad f|| <= grad_tol");
    app.add_option("--seed", cfg.seed, "Hessian subsampling seed");
    app.add_option("--metrics", cfg.metrics, "record train/test misclassification");
    app.add_option("--output", cfg.output, "trace CSV path");
  }

  void add_optional(CLI::App& app, const std::string& name, std::optional<double>& target,
                    const std::string& help) {
    optionals.push_back({&target});
    // Options hold a pointer into `optionals`; reserve keeps it stable.
    auto& slot = optionals.back();
    slot.option = app.add_option(name, slot.value, help);
  }

  void finish() {
    for (auto& o : optionals)
      if (o.option->count() > 0) *o.target = o.value;
  }
};

int run_one(const ExperimentConfig& cfg, std::ostream& log) {
  const auto res = incr::run_experiment(cfg);
  incr::write_output(cfg, res.trace);
  const auto& last = res.trace.last();
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: solver=%s iters=%zu f=%.12g grad_norm=%.3e",
                cfg.output.empty() ? "(no output)" : cfg.output.c_str(), cfg.solver.c_str(), last.t,
                last.f, last.grad_norm);
  log << buf;
  if (res.sample_count > 0) log << " |S_H|=" << res.sample_count;
  if (res.trace.condition_failures > 0) log << " condition_failures=" << res.trace.condition_failures;
  log << '\n';
  return 0;
}

ExperimentConfig parse_config_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw incr::ConfigError("config file '" + path + "' not found");
  CLI::App app;
  ExperimentOptions opts;
  opts.optionals.reserve(16);
  opts.bind(app, true);
  const std::vector<std::string> args = {"bench", "--config", path};
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  app.parse(static_cast<int>(argv.size()), argv.data());
  opts.finish();
  return opts.cfg;
}

// Value of `--config` after a leading `run`, or empty.
std::string run_config_arg(int argc, char** argv) {
  if (argc < 2 || std::string(argv[1]) != "run") return {};
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

incr::CubicModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw incr::ConfigError("cannot open '" + path + "'");
  long n = 0;
  double eta = 0.0;
  if (!(in >> n >> eta) || n < 1) throw incr::FormatError("subproblem file: expected `n eta` header");
  incr::Vector g(n);
  for (long i = 0; i < n; ++i)
    if (!(in >> g[i])) throw incr::FormatError("subproblem file: gradient has fewer than n entries");
  incr::SymMatrix h(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      if (!(in >> h(i, j))) throw incr::FormatError("subproblem file: H has fewer than n*n entries");
  return {g, h, eta, incr::Vector::Zero(n)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact cubic-regularized Newton experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment");
  ExperimentOptions run_opts;
  run_opts.optionals.reserve(16);
  run_opts.bind(*run, false);

  auto* bench = app.add_subcommand("bench", "run a batch of experiment files");
  std::vector<std::string> bench_files;
  unsigned jobs = 1;
  std::string output_dir = ".";
  bench->add_option("configs", bench_files, "experiment files")->required()->check(CLI::ExistingFile);
  bench->add_option("--jobs,-j", jobs, "parallel runs")->check(CLI::PositiveNumber);
  bench->add_option("--output-dir", output_dir, "directory for traces of configs without `output`");

  auto* compare = app.add_subcommand("compare", "threshold report over trace CSVs");
  std::vector<std::string> traces;
  std::vector<double> taus = incr::default_taus();
  std::string report_path;
  compare->add_option("traces", traces, "trace CSV files")->required()->check(CLI::ExistingFile);
  compare->add_option("--taus", taus, "thresholds above f_best");
  compare->add_option("--output", report_path, "report path (default stdout)");

  auto* sub = app.add_subcommand("subproblem", "solve one cubic model from a text file");
  std::string model_path, method = "exact";
  long max_dim = 50, gd_iters = 100000;
  double tol = 1e-12;
  sub->add_option("model", model_path, "file: `n eta`, then g (n values), then H (n rows)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--method", method, "exact | lanczos | gd")
      ->check(CLI::IsMember({"exact", "lanczos", "gd"}));
  sub->add_option("--max-dim", max_dim, "Lanczos subspace limit");
  sub->add_option("--max-iters", gd_iters, "gradient descent iteration limit");
  sub->add_option("--tol", tol, "KKT residual tolerance");

  try {
    if (const auto path = run_config_arg(argc, argv); !path.empty()) run_opts.cfg = parse_config_file(path);
    app.parse(argc, argv);
  } catch (const incr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      run_opts.finish();
      return run_one(run_opts.cfg, std::cout);
    }
    if (*bench) {
      std::vector<ExperimentConfig> configs;
      for (const auto& f : bench_files) {
        auto cfg = parse_config_file(f);
        if (cfg.output.empty())
          cfg.output = (std::filesystem::path(output_dir) / std::filesystem::path(f).stem()).string() + ".csv";
        configs.push_back(std::move(cfg));
      }
      std::atomic<std::size_t> next{0};
      std::atomic<int> failures{0};
      std::mutex log_mutex;
      auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
          std::ostringstream line;
          try {
            run_one(configs[i], line);
          } catch (const std::exception& e) {
            line << bench_files[i] << ": error: " << e.what() << '\n';
            ++failures;
          }
          std::lock_guard lock(log_mutex);
          std::cout << line.str() << std::flush;
        }
      };
      std::vector<std::thread> pool;
      for (unsigned j = 0; j < std::min<std::size_t>(jobs, configs.size()); ++j) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      return failures > 0 ? 1 : 0;
    }
    if (*compare) {
      std::vector<incr::IterateTrace> loaded;
      for (const auto& p : traces) {
        std::ifstream in(p);
        if (!in) throw incr::ConfigError("cannot open '" + p + "'");
        try {
          loaded.push_back(incr::read_trace_csv(in));
        } catch (const incr::FormatError& e) {
          throw incr::FormatError(p + ": " + e.what());
        }
      }
      const auto rep = incr::compare_traces(traces, loaded, taus);
      if (report_path.empty()) {
        incr::write_report(std::cout, rep);
      } else {
        std::ofstream out(report_path);
        if (!out) throw incr::ConfigError("cannot write '" + report_path + "'");
        incr::write_report(out, rep);
      }
      return 0;
    }
    if (*sub) {
      const auto model = read_model(model_path);
      incr::CubicSolution sol;
      if (method == "exact") sol = incr::solve_exact(model, tol);
      else if (method == "lanczos") sol = incr::solve_lanczos(model, max_dim, tol);
      else sol = incr::solve_gd(model, static_cast<int>(gd_iters), 0.0, tol);
      std::printf("method %s\n", method.c_str());
      std::printf("model_value %.17g\n", incr::cubic_model_value(model, sol.step));
      std::printf("multiplier %.17g\n", sol.multiplier);
      std::printf("kkt_residual %.3e\n", sol.kkt_residual);
      std::printf("psd_certificate %.3e\n", sol.psd_certificate);
      std::printf("iterations %d\n", static_cast<int>(sol.iterations));
      std::printf("approximate %s\n", sol.approximate ? "yes" : "no");
      std::printf("step");
      for (long i = 0; i < sol.step.size(); ++i) std::printf(" %.17g", sol.step[i]);
      std::printf("\n");
      return 0;
    }
  } catch (const incr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const incr::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 3;
  } catch (const incr::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 3;
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
