// difftest: simulate diffusions, estimate them by quasi-likelihood and run
// phi-divergence tests and power studies.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "difftest/config.hpp"
#include "difftest/distributions.hpp"
#include "difftest/divergence_tests.hpp"
#include "difftest/errors.hpp"
#include "difftest/estimator.hpp"
#include "difftest/model.hpp"
#include "difftest/montecarlo.hpp"
#include "difftest/quasi_likelihood.hpp"
#include "difftest/report.hpp"
#include "difftest/simulator.hpp"

using namespace difftest;

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericFailure = 3, kPartial = 4 };

ParamVector params_or_default(const Model& model, const std::string& text, const ParamVector& fallback) {
  if (text.empty()) return fallback;
  const auto theta = parse_real_list(text);
  if (theta.size() != model.param_count()) {
    throw ConfigError("expected " + std::to_string(model.param_count()) + " parameter values, got '" + text + "'");
  }
  return ParamVector::from_theta(theta, model.drift_params());
}

Model with_cli_bounds(const Model& model, const std::string& lower, const std::string& upper) {
  if (lower.empty() && upper.empty()) return model;
  ParamBounds b = model.bounds();
  if (!lower.empty()) b.lower = parse_real_list(lower);
  if (!upper.empty()) b.upper = parse_real_list(upper);
  if (b.lower.size() != model.param_count() || b.upper.size() != model.param_count()) {
    throw ConfigError("bounds need one value per parameter");
  }
  return model.with_bounds(std::move(b));
}

Sample read_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sample file " + path);
  return read_sample_csv(in);
}

std::string format_params(const ParamVector& p) {
  std::ostringstream os;
  os << std::setprecision(10);
  const auto t = p.theta();
  for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
  return os.str();
}

std::size_t threads_from_env(std::size_t flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("DIFFTEST_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("DIFFTEST_THREADS must be a positive integer");
  }
  return resolve_thread_count(0);
}

struct SimulateArgs {
  std::string model, theta, x0, out;
  std::size_t n = 0, substeps = 10, burn_in = 0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
};

int run_simulate(const SimulateArgs& a) {
  const auto builtin = make_builtin_model(a.model);
  const auto theta = params_or_default(builtin.model, a.theta, builtin.theta0);
  const auto x0 = a.x0.empty() ? builtin.x0 : parse_real_list(a.x0);
  const auto scheme = a.horizon > 0.0 ? SamplingScheme::with_horizon(a.n, a.horizon, a.substeps)
                                      : SamplingScheme::rapidly_increasing(a.n, a.substeps);
  SimulationOptions opts;
  opts.burn_in = a.burn_in;
  const Sample sample = simulate(builtin.model, theta, x0, scheme, a.seed, opts);

  std::ostream& summary = a.out.empty() ? std::cerr : std::cout;
  summary << "model=" << builtin.model.name() << " theta=" << format_params(theta) << " n=" << scheme.n
          << " T=" << std::setprecision(10) << scheme.horizon() << " delta=" << scheme.delta
          << " substeps=" << scheme.substeps << " seed=" << a.seed << '\n';
  if (a.out.empty()) {
    write_sample_csv(sample, std::cout);
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + a.out);
    write_sample_csv(sample, out);
  }
  return kOk;
}

struct EstimateArgs {
  std::string model, sample, init, lower, upper;
  std::size_t max_evaluations = 0;
};

int run_estimate(const EstimateArgs& a) {
  const auto builtin = make_builtin_model(a.model);
  const Model model = with_cli_bounds(builtin.model, a.lower, a.upper);
  const auto init = params_or_default(model, a.init, builtin.theta0);
  const Sample sample = read_sample_file(a.sample);
  QmleOptions opts;
  opts.max_evaluations = a.max_evaluations;
  const Estimate est = qmle(model, sample, init, opts);
  std::cout << std::setprecision(10) << "theta_hat=" << format_params(est.theta_hat) << '\n'
            << "contrast=" << est.contrast_at_min << '\n'
            << "iterations=" << est.iterations << " evaluations=" << est.evaluations << '\n'
            << "converged=" << (est.converged ? "true" : "false") << '\n';
  if (!est.converged) {
    std::cerr << "warning: optimizer did not converge\n";
    return kPartial;
  }
  return kOk;
}

struct TestArgs {
  std::string model, sample, theta0, phi = "akl", init, lower, upper;
  double alpha = 0.05;
  double power_h = -1.0;
  std::size_t max_evaluations = 0;
};

int run_test(const TestArgs& a) {
  const auto builtin = make_builtin_model(a.model);
  const Model model = with_cli_bounds(builtin.model, a.lower, a.upper);
  const auto theta0 = params_or_default(model, a.theta0, builtin.theta0);
  const auto init = params_or_default(model, a.init, theta0);
  const auto phi = PhiFunction::parse(a.phi);
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  const Sample sample = read_sample_file(a.sample);

  QmleOptions opts;
  opts.max_evaluations = a.max_evaluations;
  const Estimate est = qmle(model, sample, init, opts);
  const TestStatistic stat = t_statistic(model, sample, est.theta_hat, theta0, phi);
  const double threshold = chisq_quantile(stat.df, 1.0 - a.alpha);
  const bool reject = stat.value > threshold;

  std::cout << std::setprecision(10) << "phi=" << phi.name() << '\n'
            << "theta_hat=" << format_params(est.theta_hat) << '\n'
            << "theta0=" << format_params(theta0) << '\n'
            << "statistic=" << stat.value << '\n'
            << "df=" << stat.df << '\n'
            << "threshold=" << threshold << " (chi-squared " << (1.0 - a.alpha) << " quantile)\n"
            << "decision=" << (reject ? "reject" : "accept") << '\n';
  if (a.power_h >= 0.0) {
    // Noncentrality h' I h with I estimated from the normalised score matrix at theta0.
    const auto info = score_matrix(model, sample, theta0).normalized;
    double mu = 0.0;
    for (std::size_t i = 0; i < info.rows(); ++i)
      for (std::size_t j = 0; j < info.cols(); ++j) mu += a.power_h * info(i, j) * a.power_h;
    std::cout << "noncentrality=" << mu << '\n'
              << "theoretical_power=" << theoretical_power(stat.df, std::max(mu, 0.0), a.alpha) << '\n';
  }
  bool warned = false;
  if (!stat.warning.empty()) {
    std::cerr << "warning: " << stat.warning << '\n';
  }
  if (!est.converged) {
    std::cerr << "warning: optimizer did not converge; decision based on the best point found\n";
    warned = true;
  }
  return warned ? kPartial : kOk;
}

struct PowerArgs {
  std::string config, csv, table;
  std::size_t threads = 0, replications = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool fast = false;
};

int run_power(const PowerArgs& a) {
  auto experiments = load_run_config(a.config);
  const std::size_t threads = threads_from_env(a.threads);
  std::vector<PowerTable> tables;
  std::size_t failed = 0;
  for (auto& exp : experiments) {
    exp.threads = threads;
    if (a.fast) exp.replications = 200;
    if (a.replications > 0) exp.replications = a.replications;
    if (a.seed_set) exp.master_seed = a.seed;
    for (std::size_t n : exp.n_list) {
      ExperimentConfig cell = exp;
      cell.n_list = {n};
      try {
        auto result = empirical_power(cell);
        for (auto& t : result) tables.push_back(std::move(t));
      } catch (const NumericDomainError& e) {
        ++failed;
        std::cerr << "error: " << exp.model_name << " n=" << n << ": " << e.what() << '\n';
      } catch (const SimulationBlowup& e) {
        ++failed;
        std::cerr << "error: " << exp.model_name << " n=" << n << ": " << e.what() << '\n';
      }
    }
  }

  if (!a.csv.empty()) {
    std::ofstream out(a.csv, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + a.csv);
    write_power_csv(tables, out);
  }
  std::ostringstream text;
  for (const auto& t : tables) text << render_power_table(t) << '\n';
  const auto dominance = dominance_summary(tables);
  for (const auto& f : dominance.findings) text << f << '\n';
  if (a.table.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream out(a.table, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + a.table);
    out << text.str();
  }
  if (failed > 0) {
    std::cerr << failed << " (model, n) cell(s) failed\n";
    return tables.empty() ? kNumericFailure : kPartial;
  }
  return kOk;
}

int run_tables(const std::string& csv) {
  std::ifstream in(csv);
  if (!in) throw ConfigError("cannot open " + csv);
  const auto tables = read_power_csv(in);
  for (const auto& t : tables) std::cout << render_power_table(t) << '\n';
  for (const auto& f : dominance_summary(tables).findings) std::cout << f << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-likelihood phi-divergence tests for discretely observed diffusions"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a sample path and write it as CSV");
  simulate_cmd->add_option("--model", sim.model, "OU, GBM, CIR or MOU")->required();
  simulate_cmd->add_option("--n", sim.n, "Number of observed increments")->required()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", sim.seed, "Random seed")->required();
  simulate_cmd->add_option("--theta", sim.theta, "Comma-separated parameters (default: model theta0)");
  simulate_cmd->add_option("--x0", sim.x0, "Comma-separated initial state (default: model x0)");
  simulate_cmd->add_option("--substeps", sim.substeps, "Euler steps per observation step")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--horizon", sim.horizon, "Observation horizon T (default n^(1/3))");
  simulate_cmd->add_option("--burn-in", sim.burn_in, "Discarded observation steps before X0");
  simulate_cmd->add_option("--out", sim.out, "Output CSV (default: stdout)");

  EstimateArgs est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Quasi-maximum-likelihood estimate from a sample CSV");
  estimate_cmd->add_option("--model", est.model)->required();
  estimate_cmd->add_option("--sample", est.sample)->required();
  estimate_cmd->add_option("--init", est.init, "Initial parameters")->required();
  estimate_cmd->add_option("--lower", est.lower, "Override lower parameter bounds");
  estimate_cmd->add_option("--upper", est.upper, "Override upper parameter bounds");
  estimate_cmd->add_option("--max-evaluations", est.max_evaluations, "Optimizer budget (default 2000 per parameter)");

  TestArgs test;
  auto* test_cmd = app.add_subcommand("test", "Test H0: theta = theta0 on one sample");
  test_cmd->add_option("--model", test.model)->required();
  test_cmd->add_option("--sample", test.sample)->required();
  test_cmd->add_option("--theta0", test.theta0, "Null parameters (default: model theta0)");
  test_cmd->add_option("--phi", test.phi, "akl, power:<lambda>, bs, bs:normalized or log");
  test_cmd->add_option("--alpha", test.alpha, "Significance level");
  test_cmd->add_option("--init", test.init, "Optimizer start (default: theta0)");
  test_cmd->add_option("--lower", test.lower, "Override lower parameter bounds");
  test_cmd->add_option("--upper", test.upper, "Override upper parameter bounds");
  test_cmd->add_option("--max-evaluations", test.max_evaluations, "Optimizer budget (default 2000 per parameter)");
  test_cmd->add_option("--power-h", test.power_h, "Report theoretical power at local alternative h");

  PowerArgs power;
  auto* power_cmd = app.add_subcommand("power", "Run a Monte Carlo power study from a JSON config");
  power_cmd->add_option("--config", power.config)->required();
  power_cmd->add_option("--csv", power.csv, "Write the power CSV here");
  power_cmd->add_option("--table", power.table, "Write text tables here (default: stdout)");
  power_cmd->add_option("--threads", power.threads, "Worker threads (default: DIFFTEST_THREADS or all cores)");
  power_cmd->add_option("--replications", power.replications, "Override replications");
  auto* seed_opt = power_cmd->add_option("--seed", power.seed, "Override master seed");
  power_cmd->add_flag("--fast", power.fast, "Use R = 200 replications");

  std::string tables_csv;
  auto* tables_cmd = app.add_subcommand("tables", "Render a power CSV as text tables");
  tables_cmd->add_option("--csv", tables_csv)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  power.seed_set = seed_opt->count() > 0;

  try {
    if (*simulate_cmd) return run_simulate(sim);
    if (*estimate_cmd) return run_estimate(est);
    if (*test_cmd) return run_test(test);
    if (*power_cmd) return run_power(power);
    if (*tables_cmd) return run_tables(tables_csv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SimulationBlowup& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const NumericDomainError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericFailure;
  }
  return kOk;
}
