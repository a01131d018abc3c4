#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace difftest {

struct NelderMeadOptions {
  std::size_t max_evaluations = 2000;
  /// Converged once every vertex lies within xtol * max(1, |x_best_k|) of
  /// the best vertex in every coordinate and f(worst) - f(best) < ftol.
  double xtol = 1e-8;
  double ftol = 1e-10;
  /// Coordinate-wise golden-section refinement after the simplex stops.
  bool polish = true;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Unconstrained Nelder-Mead simplex minimisation with the standard
/// coefficients (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
/// The initial simplex is x0 plus one vertex x0 + steps[k] e_k per
/// coordinate. Deterministic: no randomised restarts. Exceptions thrown by
/// the objective propagate; NaN values are treated as +inf.
NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0, std::span<const double> steps,
                             const NelderMeadOptions& options = {});

/// Golden-section search for a minimum of a one-dimensional function on
/// [lo, hi]. Returns the best abscissa found (lo, hi and interior probes
/// included) and adds the number of evaluations to `evaluations`.
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol,
                               std::size_t& evaluations);

}  // namespace difftest
