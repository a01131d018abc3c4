#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "difftest/estimator.hpp"
#include "difftest/model.hpp"
#include "difftest/phi.hpp"
#include "difftest/simulator.hpp"

namespace difftest {

enum class ThresholdMode { Empirical, Theoretical };

std::string to_string(ThresholdMode mode);
ThresholdMode parse_threshold_mode(std::string_view text);

/// How a power row at h > 0 is generated.
///  ShiftedNull: paths simulated under theta0, statistic T(theta_hat, theta0 + h-shift).
///  ShiftedData: paths simulated under theta0 + h-shift, statistic T(theta_hat, theta0).
/// Both are asymptotically equivalent; they differ at small n.
enum class AlternativeMode { ShiftedNull, ShiftedData };

std::string to_string(AlternativeMode mode);
AlternativeMode parse_alternative_mode(std::string_view text);

/// {0, 0.01, 0.05, 0.1, 0.2, ..., 1.0}
std::vector<double> default_h_grid();
/// AKL, GQLRT (log), BS, power lambda in {-20, -10, -3}: the table column order.
std::vector<PhiFunction> default_phis();

/// One power study on one model. theta0 and x0 must be set; use
/// ExperimentConfig::for_builtin to start from the shipped defaults.
struct ExperimentConfig {
  std::string model_name = "OU";
  ParamVector theta0;
  std::vector<double> x0;
  std::vector<std::size_t> n_list{50, 100, 250, 500, 1000};
  std::vector<double> h_grid = default_h_grid();
  /// Which parameter components receive the local shift (empty: all).
  std::vector<bool> shift_mask;
  std::vector<PhiFunction> phis = default_phis();
  std::size_t replications = 1000;
  double alpha_level = 0.05;
  std::uint64_t master_seed = 1;
  std::size_t substeps = 10;
  std::size_t burn_in = 0;
  ThresholdMode threshold_mode = ThresholdMode::Empirical;
  AlternativeMode alternative = AlternativeMode::ShiftedNull;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  std::size_t threads = 0;
  /// Fresh draws allowed per replication after a failure.
  std::size_t max_retries = 5;

  static ExperimentConfig for_builtin(std::string_view model_name);

  /// Throws ConfigError unless h_grid contains 0, replications >= 100,
  /// alpha_level in (0,1), phis and n_list are non-empty and theta0/x0 fit
  /// the model.
  void validate(const Model& model) const;
};

/// theta0 + h / sqrt(n delta) on drift components and theta0 + h / sqrt(n)
/// on diffusion components (restricted to shift_mask when given). Throws
/// ConfigError if the result leaves the model bounds.
ParamVector local_alternative(const ParamVector& theta0, double h, const SamplingScheme& scheme, const Model& model,
                              const std::vector<bool>& shift_mask = {});

/// k-th order statistic with k = ceil((1 - alpha) R), 1-based.
double empirical_quantile(std::vector<double> values, double alpha);

/// Statistics of R replications of simulate -> qmle -> statistics for a
/// single parameter value. stats[phi][r] holds the successful replications
/// in replication order.
struct ReplicationBatch {
  std::vector<std::vector<double>> stats;
  std::size_t requested = 0;
  std::size_t failures = 0;
  std::size_t retries = 0;
  std::size_t effective() const noexcept { return requested - failures; }
};

/// Runs one batch. `stream` separates the null calibration run from power
/// rows; `h` is part of the seed key. Replication r, attempt a uses
/// derive_seed(master_seed, {model, n, stream, bits(h), r, a}). The
/// optimizer starts at theta0.
ReplicationBatch run_batch(const ExperimentConfig& config, const Model& model, std::size_t n, double h,
                           std::string_view stream);

/// Null statistics for every configured phi at sample size n.
ReplicationBatch null_distribution(const ExperimentConfig& config, const Model& model, std::size_t n);

/// Empirical (1 - alpha) quantile of the null statistics of `phi`.
double calibrate_threshold(const ExperimentConfig& config, const Model& model, std::size_t n, const PhiFunction& phi);

struct PowerRow {
  double h = 0.0;
  std::vector<double> power;  ///< one entry per phi
  std::size_t effective_reps = 0;
  std::size_t failures = 0;
};

struct PowerTable {
  std::string model;
  std::size_t n = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double alpha_level = 0.05;
  ThresholdMode threshold_mode = ThresholdMode::Empirical;
  AlternativeMode alternative = AlternativeMode::ShiftedNull;
  std::vector<PhiFunction> phis;
  std::vector<double> thresholds;  ///< one entry per phi
  std::vector<PowerRow> rows;      ///< one entry per h
};

/// One table per n in config.n_list. The h = 0 row is the rejection rate
/// of the calibration sample itself, so under empirical thresholds it is
/// alpha up to 1/R. Rows with h > 0 use fresh paths (never the calibration
/// paths), shared across phis; under ShiftedNull they are also shared
/// across h.
std::vector<PowerTable> empirical_power(const ExperimentConfig& config);

/// Same, with an explicit model (user-defined coefficients).
std::vector<PowerTable> empirical_power(const ExperimentConfig& config, const Model& model);

struct DominanceEntry {
  std::string model;
  std::size_t n = 0;
  double h = 0.0;
  double best_power = 0.0;
  std::vector<std::string> winners;  ///< labels of every maximiser
};

struct DominanceReport {
  std::vector<DominanceEntry> entries;
  std::vector<std::string> findings;
};

/// Marks the most powerful statistic for every h > 0 row, listing ties.
DominanceReport dominance_summary(const std::vector<PowerTable>& tables);

/// Calls fn(i) for i in [0, count) on `threads` workers. Results must be
/// written by index; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

std::size_t resolve_thread_count(std::size_t requested);

}  // namespace difftest
