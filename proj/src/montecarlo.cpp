#include "difftest/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <span>
#include <sstream>
#include <thread>

#include "difftest/distributions.hpp"
#include "difftest/divergence_tests.hpp"
#include "difftest/errors.hpp"
#include "difftest/rng.hpp"

namespace difftest {

std::string to_string(ThresholdMode mode) {
  return mode == ThresholdMode::Empirical ? "empirical" : "theoretical";
}

std::string to_string(AlternativeMode mode) {
  return mode == AlternativeMode::ShiftedNull ? "shifted_null" : "shifted_data";
}

AlternativeMode parse_alternative_mode(std::string_view text) {
  if (text == "shifted_null") return AlternativeMode::ShiftedNull;
  if (text == "shifted_data") return AlternativeMode::ShiftedData;
  throw ConfigError("alternative must be 'shifted_null' or 'shifted_data', got '" + std::string(text) + "'");
}

ThresholdMode parse_threshold_mode(std::string_view text) {
  if (text == "empirical") return ThresholdMode::Empirical;
  if (text == "theoretical") return ThresholdMode::Theoretical;
  throw ConfigError("threshold mode must be 'empirical' or 'theoretical', got '" + std::string(text) + "'");
}

std::vector<double> default_h_grid() {
  return {0.0, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

std::vector<PhiFunction> default_phis() {
  return {PhiFunction::akl(),         PhiFunction::log(),         PhiFunction::bs(),
          PhiFunction::power(-20.0), PhiFunction::power(-10.0), PhiFunction::power(-3.0)};
}

ExperimentConfig ExperimentConfig::for_builtin(std::string_view model_name) {
  const auto builtin = make_builtin_model(model_name);
  ExperimentConfig config;
  config.model_name = builtin.model.name();
  config.theta0 = builtin.theta0;
  config.x0 = builtin.x0;
  return config;
}

void ExperimentConfig::validate(const Model& model) const {
  if (std::find(h_grid.begin(), h_grid.end(), 0.0) == h_grid.end()) {
    throw ConfigError("h grid must contain 0 (the null point)");
  }
  for (double h : h_grid)
    if (!(h >= 0.0 && h <= 1.0)) throw ConfigError("h grid values must lie in [0, 1]");
  if (replications < 100) throw ConfigError("power studies need at least 100 replications");
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw ConfigError("alpha level must lie in (0, 1)");
  if (phis.empty()) throw ConfigError("no phi functions configured");
  if (n_list.empty()) throw ConfigError("no sample sizes configured");
  for (std::size_t n : n_list)
    if (n < 2) throw ConfigError("sample sizes must be >= 2");
  if (substeps == 0) throw ConfigError("substeps must be >= 1");
  model.check_params(theta0);
  if (x0.size() != model.state_dim()) throw ConfigError("x0 has wrong dimension for model '" + model.name() + "'");
  if (!shift_mask.empty() && shift_mask.size() != model.param_count()) {
    throw ConfigError("shift mask must have one entry per parameter");
  }
}

ParamVector local_alternative(const ParamVector& theta0, double h, const SamplingScheme& scheme, const Model& model,
                              const std::vector<bool>& shift_mask) {
  const double n = static_cast<double>(scheme.n);
  const double drift_shift = h / std::sqrt(n * scheme.delta);
  const double diffusion_shift = h / std::sqrt(n);
  ParamVector out = theta0;
  const std::size_t p = theta0.alpha.size();
  auto shifted = [&](std::size_t k) { return shift_mask.empty() || shift_mask.at(k); };
  for (std::size_t j = 0; j < out.alpha.size(); ++j)
    if (shifted(j)) out.alpha[j] += drift_shift;
  for (std::size_t j = 0; j < out.beta.size(); ++j)
    if (shifted(p + j)) out.beta[j] += diffusion_shift;
  if (!model.within_bounds(out)) {
    std::ostringstream os;
    os << "local alternative at h = " << h << ", n = " << scheme.n << " leaves the bounds of model '"
       << model.name() << "'; shrink the h grid";
    throw ConfigError(os.str());
  }
  return out;
}

double empirical_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw NumericDomainError("empirical quantile of an empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw NumericDomainError("quantile level must lie in (0, 1)");
  const double r = static_cast<double>(values.size());
  // The 1e-9 slack keeps products like 0.95 * 1000 from rounding up.
  auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * r - 1e-9));
  k = std::clamp<std::size_t>(k, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end());
  return values[k - 1];
}

std::size_t resolve_thread_count(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::min(resolve_thread_count(threads), std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      while (!stop.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          stop = true;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

namespace {

struct ReplicationResult {
  bool ok = false;
  std::size_t attempts = 0;
  std::vector<double> stats;  ///< [null][phi], flattened
};

// Simulates one path under `truth`, estimates from theta0 and evaluates
// every phi against every null point.
ReplicationResult run_replication(const ExperimentConfig& config, const Model& model, const ParamVector& truth,
                                  std::span<const ParamVector> nulls, const SamplingScheme& scheme,
                                  std::uint64_t base_seed) {
  ReplicationResult out;
  SimulationOptions sim;
  sim.burn_in = config.burn_in;
  QmleOptions qopt;
  const std::size_t k_phi = config.phis.size();
  for (std::size_t attempt = 0; attempt <= config.max_retries; ++attempt) {
    ++out.attempts;
    const std::uint64_t seed = derive_seed(base_seed, {attempt});
    try {
      const Sample sample = simulate(model, truth, config.x0, scheme, seed, sim);
      const Estimate est = qmle(model, sample, config.theta0, qopt);
      if (!est.converged) continue;
      out.stats.assign(nulls.size() * k_phi, 0.0);
      for (std::size_t j = 0; j < nulls.size(); ++j) {
        const auto lr = log_ratios(model, sample, est.theta_hat, nulls[j]);
        for (std::size_t k = 0; k < k_phi; ++k) {
          out.stats[j * k_phi + k] = statistic_from_log_ratios(lr, config.phis[k], model.param_count()).value;
        }
      }
      out.ok = true;
      return out;
    } catch (const SimulationBlowup&) {
    } catch (const NumericDomainError&) {
    }
  }
  return out;
}

// R replications under `truth`; one ReplicationBatch per null point.
std::vector<ReplicationBatch> run_replications(const ExperimentConfig& config, const Model& model, std::size_t n,
                                               const ParamVector& truth, std::span<const ParamVector> nulls,
                                               double h, std::string_view stream) {
  const auto scheme = SamplingScheme::rapidly_increasing(n, config.substeps);
  const std::uint64_t model_key = hash_tag(model.name());
  const std::uint64_t stream_key = hash_tag(stream);
  const std::uint64_t h_key = std::bit_cast<std::uint64_t>(h == 0.0 ? 0.0 : h);

  std::vector<ReplicationResult> results(config.replications);
  parallel_for(config.replications, config.threads, [&](std::size_t r) {
    const std::uint64_t base = derive_seed(config.master_seed, {model_key, n, stream_key, h_key, r});
    results[r] = run_replication(config, model, truth, nulls, scheme, base);
  });

  const std::size_t k_phi = config.phis.size();
  std::vector<ReplicationBatch> batches(nulls.size());
  for (auto& batch : batches) {
    batch.requested = config.replications;
    batch.stats.assign(k_phi, {});
    for (auto& s : batch.stats) s.reserve(config.replications);
  }
  for (const auto& res : results) {
    for (auto& batch : batches) {
      batch.retries += res.attempts - 1;
      if (!res.ok) ++batch.failures;
    }
    if (!res.ok) continue;
    for (std::size_t j = 0; j < nulls.size(); ++j)
      for (std::size_t k = 0; k < k_phi; ++k) batches[j].stats[k].push_back(res.stats[j * k_phi + k]);
  }
  return batches;
}

}  // namespace

ReplicationBatch run_batch(const ExperimentConfig& config, const Model& model, std::size_t n, double h,
                           std::string_view stream) {
  const auto scheme = SamplingScheme::rapidly_increasing(n, config.substeps);
  const ParamVector truth = local_alternative(config.theta0, h, scheme, model, config.shift_mask);
  const ParamVector nulls[] = {config.theta0};
  return std::move(run_replications(config, model, n, truth, nulls, h, stream).front());
}

ReplicationBatch null_distribution(const ExperimentConfig& config, const Model& model, std::size_t n) {
  config.validate(model);
  return run_batch(config, model, n, 0.0, "null");
}

double calibrate_threshold(const ExperimentConfig& config, const Model& model, std::size_t n, const PhiFunction& phi) {
  ExperimentConfig single = config;
  single.phis = {phi};
  const auto batch = null_distribution(single, model, n);
  if (batch.effective() == 0) throw NumericDomainError("every null replication failed");
  return empirical_quantile(batch.stats[0], config.alpha_level);
}

namespace {

double exceedance_rate(const std::vector<double>& stats, double threshold) {
  if (stats.empty()) return 0.0;
  const auto count = std::count_if(stats.begin(), stats.end(), [&](double v) { return v > threshold; });
  return static_cast<double>(count) / static_cast<double>(stats.size());
}

}  // namespace

std::vector<PowerTable> empirical_power(const ExperimentConfig& config) {
  const auto builtin = make_builtin_model(config.model_name);
  return empirical_power(config, builtin.model);
}

std::vector<PowerTable> empirical_power(const ExperimentConfig& config, const Model& model) {
  config.validate(model);
  std::vector<PowerTable> tables;
  for (std::size_t n : config.n_list) {
    PowerTable table;
    table.model = model.name();
    table.n = n;
    table.replications = config.replications;
    table.seed = config.master_seed;
    table.alpha_level = config.alpha_level;
    table.threshold_mode = config.threshold_mode;
    table.alternative = config.alternative;
    table.phis = config.phis;

    const auto null = run_batch(config, model, n, 0.0, "null");
    if (null.effective() == 0) throw NumericDomainError("every null replication failed");
    for (std::size_t k = 0; k < config.phis.size(); ++k) {
      if (config.threshold_mode == ThresholdMode::Empirical) {
        table.thresholds.push_back(empirical_quantile(null.stats[k], config.alpha_level));
      } else {
        table.thresholds.push_back(chisq_quantile(model.param_count(), 1.0 - config.alpha_level));
      }
    }

    // Power rows. ShiftedNull: one fresh batch of paths under theta0, tested
    // against every shifted null. ShiftedData: fresh paths per h under the
    // shifted parameter, tested against theta0.
    const auto scheme = SamplingScheme::rapidly_increasing(n, config.substeps);
    std::vector<double> alt_h;
    for (double h : config.h_grid)
      if (h != 0.0) alt_h.push_back(h);
    std::vector<ReplicationBatch> alt_batches;
    if (config.alternative == AlternativeMode::ShiftedNull && !alt_h.empty()) {
      std::vector<ParamVector> nulls;
      for (double h : alt_h) nulls.push_back(local_alternative(config.theta0, h, scheme, model, config.shift_mask));
      alt_batches = run_replications(config, model, n, config.theta0, nulls, 0.0, "power");
    } else {
      for (double h : alt_h) alt_batches.push_back(run_batch(config, model, n, h, "power"));
    }

    std::size_t next_alt = 0;
    for (double h : config.h_grid) {
      PowerRow row;
      row.h = h;
      const ReplicationBatch& batch = h == 0.0 ? null : alt_batches[next_alt++];
      row.effective_reps = batch.effective();
      row.failures = batch.failures;
      for (std::size_t k = 0; k < config.phis.size(); ++k) {
        row.power.push_back(exceedance_rate(batch.stats[k], table.thresholds[k]));
      }
      table.rows.push_back(std::move(row));
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

DominanceReport dominance_summary(const std::vector<PowerTable>& tables) {
  DominanceReport report;
  for (const auto& table : tables) {
    std::map<std::string, std::size_t> wins;
    std::size_t rows = 0;
    for (const auto& row : table.rows) {
      if (row.h <= 0.0 || row.power.empty()) continue;
      ++rows;
      DominanceEntry entry;
      entry.model = table.model;
      entry.n = table.n;
      entry.h = row.h;
      entry.best_power = *std::max_element(row.power.begin(), row.power.end());
      for (std::size_t k = 0; k < row.power.size(); ++k) {
        if (row.power[k] == entry.best_power) {
          entry.winners.push_back(table.phis[k].label());
          ++wins[table.phis[k].label()];
        }
      }
      report.entries.push_back(std::move(entry));
    }
    if (rows == 0) continue;

    std::ostringstream head;
    head << table.model << " n=" << table.n << ": ";
    std::vector<std::string> uniform;
    for (const auto& [label, count] : wins)
      if (count == rows) uniform.push_back(label);
    if (uniform.empty()) {
      report.findings.push_back(head.str() + "no statistic is most powerful at every h > 0");
    } else {
      std::string names;
      for (const auto& u : uniform) names += (names.empty() ? "" : ", ") + u;
      report.findings.push_back(head.str() + names + " most powerful at every h > 0");
    }
    const auto gq = wins.find(PhiFunction::log().label());
    std::ostringstream gqs;
    gqs << head.str() << "GQLRT most powerful at " << (gq == wins.end() ? 0 : gq->second) << " of " << rows
        << " alternatives";
    report.findings.push_back(gqs.str());
  }
  return report;
}

}  // namespace difftest
