#include "difftest/estimator.hpp"

#include <cmath>

#include "difftest/errors.hpp"
#include "difftest/quasi_likelihood.hpp"

namespace difftest {

namespace {

// Maps one parameter between its bounded range and the real line.
class BoundTransform {
 public:
  BoundTransform(double lower, double upper) : lo_(lower), hi_(upper) {}

  double to_param(double u) const {
    const bool has_lo = std::isfinite(lo_);
    const bool has_hi = std::isfinite(hi_);
    double t = u;
    if (has_lo && has_hi) {
      t = lo_ + (hi_ - lo_) / (1.0 + std::exp(-u));
    } else if (has_lo) {
      t = lo_ + std::exp(u);
    } else if (has_hi) {
      t = hi_ - std::exp(u);
    }
    // Rounding can land exactly on a bound; keep the value strictly inside.
    if (has_lo && t <= lo_) t = std::nextafter(lo_, has_hi ? hi_ : HUGE_VAL);
    if (has_hi && t >= hi_) t = std::nextafter(hi_, has_lo ? lo_ : -HUGE_VAL);
    return t;
  }

  double to_free(double theta) const {
    const bool has_lo = std::isfinite(lo_);
    const bool has_hi = std::isfinite(hi_);
    if (has_lo && has_hi) {
      const double s = (theta - lo_) / (hi_ - lo_);
      return std::log(s / (1.0 - s));
    }
    if (has_lo) return std::log(theta - lo_);
    if (has_hi) return std::log(hi_ - theta);
    return theta;
  }

  // Free-coordinate step giving a parameter displacement of about `edge`.
  double free_step(double theta, double edge) const {
    const double u0 = to_free(theta);
    double target = theta + edge;
    if (std::isfinite(hi_) && target >= hi_) target = theta - edge;
    if (std::isfinite(lo_) && target <= lo_) target = 0.5 * (theta + (std::isfinite(hi_) ? hi_ : lo_));
    const double step = to_free(target) - u0;
    return step != 0.0 && std::isfinite(step) ? step : 1e-3;
  }

 private:
  double lo_;
  double hi_;
};

}  // namespace

Estimate qmle(const Model& model, const Sample& sample, const ParamVector& init, const QmleOptions& options) {
  model.check_params(init);
  const auto& bounds = model.bounds();
  const std::size_t k = model.param_count();

  std::vector<std::size_t> free_index;
  std::vector<BoundTransform> transforms;
  for (std::size_t j = 0; j < k; ++j) {
    if (bounds.is_fixed(j)) continue;
    free_index.push_back(j);
    transforms.emplace_back(bounds.lower[j], bounds.upper[j]);
  }

  const auto theta_init = init.theta();
  std::vector<double> u0(free_index.size()), steps(free_index.size());
  for (std::size_t f = 0; f < free_index.size(); ++f) {
    const double t = theta_init[free_index[f]];
    u0[f] = transforms[f].to_free(t);
    steps[f] = transforms[f].free_step(t, options.edge_scale * std::max(1.0, std::abs(t)));
  }

  QuasiLikelihood ql(model, sample);
  std::vector<double> theta = theta_init;
  auto to_theta = [&](std::span<const double> u) {
    for (std::size_t f = 0; f < free_index.size(); ++f) theta[free_index[f]] = transforms[f].to_param(u[f]);
  };
  auto objective = [&](std::span<const double> u) {
    to_theta(u);
    return ql.total(theta);
  };

  NelderMeadOptions nm;
  nm.max_evaluations = options.max_evaluations ? options.max_evaluations : 2000 * k;
  nm.xtol = options.xtol;
  nm.ftol = options.ftol;
  nm.polish = options.polish;

  Estimate est;
  est.contrast_at_init = ql.total(theta_init);
  const auto res = nelder_mead(objective, u0, steps, nm);
  to_theta(res.x);
  est.theta_hat = ParamVector::from_theta(theta, model.drift_params());
  est.contrast_at_min = res.f;
  est.iterations = res.iterations;
  est.evaluations = res.evaluations;
  est.converged = res.converged && std::isfinite(res.f);
  if (est.contrast_at_min > est.contrast_at_init) {
    // The initial point is a simplex vertex, so this only happens if the
    // transform round trip moved it; fall back to the initial value.
    est.theta_hat = init;
    est.contrast_at_min = est.contrast_at_init;
  }
  if (!model.within_bounds(est.theta_hat)) est.converged = false;
  if (options.theta0) est.standardized_error = standardize_error(est.theta_hat, *options.theta0, sample.scheme);
  return est;
}

std::vector<double> standardize_error(const ParamVector& theta_hat, const ParamVector& theta0,
                                      const SamplingScheme& scheme) {
  if (theta_hat.alpha.size() != theta0.alpha.size() || theta_hat.beta.size() != theta0.beta.size()) {
    throw ConfigError("standardize_error: parameter shapes differ");
  }
  const double n = static_cast<double>(scheme.n);
  const double drift_scale = std::sqrt(n * scheme.delta);
  const double diffusion_scale = std::sqrt(n);
  std::vector<double> out;
  out.reserve(theta_hat.size());
  for (std::size_t j = 0; j < theta_hat.alpha.size(); ++j)
    out.push_back(drift_scale * (theta_hat.alpha[j] - theta0.alpha[j]));
  for (std::size_t j = 0; j < theta_hat.beta.size(); ++j)
    out.push_back(diffusion_scale * (theta_hat.beta[j] - theta0.beta[j]));
  return out;
}

}  // namespace difftest
