#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "difftest/model.hpp"
#include "difftest/nelder_mead.hpp"
#include "difftest/simulator.hpp"

namespace difftest {

struct QmleOptions {
  /// 0 means 2000 * (p + q).
  std::size_t max_evaluations = 0;
  double xtol = 1e-8;
  double ftol = 1e-10;
  bool polish = true;
  /// Initial simplex edge per coordinate is edge_scale * max(1, |theta_k|).
  double edge_scale = 0.05;
  /// When set (Monte Carlo use), the estimate carries the standardized error.
  std::optional<ParamVector> theta0;
};

struct Estimate {
  ParamVector theta_hat;
  double contrast_at_min = 0.0;
  double contrast_at_init = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::optional<std::vector<double>> standardized_error;
};

/// Quasi-maximum-likelihood estimate argmin_theta H_n(theta).
///
/// Nelder-Mead runs in an unconstrained coordinate system: components with
/// one finite bound are mapped through an exponential, two-sided bounds
/// through a logistic map, and fixed components (lower == upper) are
/// removed from the search. A non-converged run is returned with
/// converged = false; contrast evaluation errors propagate.
Estimate qmle(const Model& model, const Sample& sample, const ParamVector& init, const QmleOptions& options = {});

/// phi(n)^{-1/2} (theta_hat - theta0): drift components scaled by
/// sqrt(n delta), diffusion components by sqrt(n).
std::vector<double> standardize_error(const ParamVector& theta_hat, const ParamVector& theta0,
                                      const SamplingScheme& scheme);

}  // namespace difftest
