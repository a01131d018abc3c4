#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "difftest/linalg.hpp"
#include "difftest/model.hpp"

namespace difftest {

/// Observation grid t_i = i * delta, i = 0..n. The horizon is derived as
/// n * delta and never stored separately.
struct SamplingScheme {
  std::size_t n = 0;
  double delta = 0.0;
  /// Euler-Maruyama steps per observation step.
  std::size_t substeps = 10;

  double horizon() const noexcept { return static_cast<double>(n) * delta; }

  /// T = n^{1/3}, delta = n^{-2/3}: n*delta -> inf, delta -> 0 and
  /// n*delta^2 = n^{-1/3} -> 0.
  static SamplingScheme rapidly_increasing(std::size_t n, std::size_t substeps = 10);
  static SamplingScheme with_horizon(std::size_t n, double horizon, std::size_t substeps = 10);
};

/// Discretely observed path X_{t_0}, ..., X_{t_n}, stored row-major.
struct Sample {
  std::vector<double> observations;
  std::size_t dim = 0;
  SamplingScheme scheme;
  std::string model_name;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return dim == 0 ? 0 : observations.size() / dim; }
  std::size_t increments() const noexcept { return size() == 0 ? 0 : size() - 1; }
  std::span<const double> state(std::size_t i) const noexcept { return {observations.data() + i * dim, dim}; }
  double time(std::size_t i) const noexcept { return static_cast<double>(i) * scheme.delta; }
};

struct SimulationOptions {
  /// Observation-length steps simulated and discarded before X_{t_0}.
  std::size_t burn_in = 0;
  double blowup_limit = 1e8;
};

/// Euler-Maruyama with step delta/M, recording every M-th state.
/// Bit-identical output for identical inputs and seed; the generator is
/// local to the call. Throws SimulationBlowup on non-finite states or
/// |X| > blowup_limit, ConfigError on invalid parameters.
Sample simulate(const Model& model, const ParamVector& theta, std::span<const double> x0, const SamplingScheme& scheme,
                std::uint64_t seed, const SimulationOptions& options = {});

/// Monte Carlo moments of the Euler residual
/// Xbar = X_{t_1} - X_{t_0} - delta * b(alpha, X_{t_0}) started at a fixed state.
struct MomentReport {
  double delta = 0.0;
  std::size_t reps = 0;
  std::vector<double> mean;           ///< E Xbar
  Matrix second;                      ///< E Xbar Xbar'
  std::vector<double> fourth;         ///< E Xbar_k^4 per component
  Matrix sigma;                       ///< Sigma(beta, x_start)
  double mean_ratio = 0.0;            ///< max_k |E Xbar_k| / delta^2
  double second_ratio = 0.0;          ///< max_jk |E Xbar Xbar' - delta Sigma|_jk / delta^2
  Matrix second_over_delta;           ///< E Xbar Xbar' / delta
  std::vector<double> fourth_over_delta_sq;  ///< E Xbar_k^4 / delta^2
  std::vector<double> second_over_delta_se;  ///< Monte Carlo SE of the diagonal of second_over_delta
};

/// Requires reps >= 1000.
MomentReport validate_conditional_moments(const Model& model, const ParamVector& theta,
                                          std::span<const double> x_start, const SamplingScheme& scheme,
                                          std::size_t reps, std::uint64_t seed);

/// CSV with header `t,x1,...,xd` and one row per observation.
void write_sample_csv(const Sample& sample, std::ostream& os);

/// Reads the CSV written by write_sample_csv. The step is recovered as
/// t_n / n; model name and seed are not part of the format.
Sample read_sample_csv(std::istream& is);

}  // namespace difftest
