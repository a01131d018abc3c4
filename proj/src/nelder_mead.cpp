#include "difftest/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace difftest {

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

double sanitize(double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : v; }

bool simplex_small(const std::vector<Vertex>& simplex, double xtol) {
  const auto& best = simplex.front().x;
  for (std::size_t j = 1; j < simplex.size(); ++j)
    for (std::size_t k = 0; k < best.size(); ++k)
      if (std::abs(simplex[j].x[k] - best[k]) > xtol * std::max(1.0, std::abs(best[k]))) return false;
  return true;
}

}  // namespace

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol,
                               std::size_t& evaluations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = sanitize(f(c));
  double fd = sanitize(f(d));
  evaluations += 2;
  while (std::abs(b - a) > tol * std::max(1.0, std::abs(c) + std::abs(d))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = sanitize(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = sanitize(f(d));
    }
    ++evaluations;
  }
  return fc < fd ? c : d;
}

NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0, std::span<const double> steps,
                             const NelderMeadOptions& options) {
  const std::size_t k = x0.size();
  if (steps.size() != k) throw std::invalid_argument("nelder_mead: steps and x0 differ in size");

  NelderMeadResult result;
  if (k == 0) {
    result.f = sanitize(f(x0));
    result.evaluations = 1;
    result.converged = true;
    return result;
  }

  auto eval = [&](std::span<const double> x) {
    ++result.evaluations;
    return sanitize(f(x));
  };

  std::vector<Vertex> simplex;
  simplex.reserve(k + 1);
  simplex.push_back({std::vector<double>(x0.begin(), x0.end()), 0.0});
  simplex.back().f = eval(simplex.back().x);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> x(x0.begin(), x0.end());
    x[j] += steps[j];
    const double fx = eval(x);
    simplex.push_back({std::move(x), fx});
  }
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  std::stable_sort(simplex.begin(), simplex.end(), by_value);

  std::vector<double> centroid(k), trial(k), trial2(k);
  auto along = [&](double t, std::vector<double>& out) {
    const auto& worst = simplex.back().x;
    for (std::size_t i = 0; i < k; ++i) out[i] = centroid[i] + t * (worst[i] - centroid[i]);
  };

  while (true) {
    const double spread = simplex.back().f - simplex.front().f;
    if (simplex_small(simplex, options.xtol) && spread < options.ftol) {
      result.converged = true;
      break;
    }
    if (result.evaluations >= options.max_evaluations) break;
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < k; ++i) centroid[i] += simplex[j].x[i];
    for (double& c : centroid) c /= static_cast<double>(k);

    along(-1.0, trial);
    const double fr = eval(trial);
    if (fr < simplex.front().f) {
      along(-2.0, trial2);
      const double fe = eval(trial2);
      if (fe < fr) {
        simplex.back() = {trial2, fe};
      } else {
        simplex.back() = {trial, fr};
      }
    } else if (fr < simplex[k - 1].f) {
      simplex.back() = {trial, fr};
    } else {
      const bool outside = fr < simplex.back().f;
      along(outside ? -0.5 : 0.5, trial2);
      const double fc = eval(trial2);
      if (fc < (outside ? fr : simplex.back().f)) {
        simplex.back() = {trial2, fc};
      } else {
        const auto best = simplex.front().x;
        for (std::size_t j = 1; j <= k; ++j) {
          for (std::size_t i = 0; i < k; ++i) simplex[j].x[i] = best[i] + 0.5 * (simplex[j].x[i] - best[i]);
          simplex[j].f = eval(simplex[j].x);
        }
      }
    }
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
  }

  result.x = simplex.front().x;
  result.f = simplex.front().f;

  if (options.polish && std::isfinite(result.f)) {
    std::vector<double> extent(k, 0.0);
    for (const auto& v : simplex)
      for (std::size_t i = 0; i < k; ++i) extent[i] = std::max(extent[i], std::abs(v.x[i] - result.x[i]));
    std::vector<double> probe = result.x;
    for (std::size_t i = 0; i < k; ++i) {
      const double width = std::max(2.0 * extent[i], 1e-6 * std::max(1.0, std::abs(result.x[i])));
      auto line = [&](double u) {
        probe[i] = u;
        return f(probe);
      };
      const double u = golden_section_minimize(line, result.x[i] - width, result.x[i] + width, 1e-12,
                                               result.evaluations);
      probe[i] = u;
      const double fu = sanitize(f(probe));
      ++result.evaluations;
      if (fu < result.f) {
        result.x[i] = u;
        result.f = fu;
      } else {
        probe[i] = result.x[i];
      }
    }
  }
  return result;
}

}  // namespace difftest
