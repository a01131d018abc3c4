#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "difftest/montecarlo.hpp"

namespace difftest {

/// Parses a power-study manifest. The document is either one experiment
/// object or `{"experiments": [ ... ]}`. Experiment keys:
///
///   model (required), theta0, x0, n, h, phis, replications, alpha, seed,
///   substeps, burn_in, threshold ("empirical" | "theoretical"),
///   shift_mask, max_retries, profile ("full" | "fast"),
///   alternative ("shifted_null" | "shifted_data")
///
/// Missing keys take the shipped defaults of the named model; `profile:
/// "fast"` sets replications to 200 unless given explicitly. Unknown keys
/// and type mismatches raise ConfigError before anything runs.
std::vector<ExperimentConfig> parse_run_config(const std::string& json_text);

std::vector<ExperimentConfig> load_run_config(const std::filesystem::path& path);

/// Comma-separated list of reals, e.g. "0.5,0.5,0.25".
std::vector<double> parse_real_list(const std::string& text);

}  // namespace difftest
