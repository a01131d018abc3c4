#include "difftest/quasi_likelihood.hpp"

#include <cmath>
#include <sstream>

#include "difftest/errors.hpp"

namespace difftest {

namespace {

[[noreturn]] void not_positive_definite(std::size_t i) {
  std::ostringstream os;
  os << "Sigma not positive definite at observation " << (i - 1) << " while evaluating the contrast";
  throw NumericDomainError(os.str());
}

// Per-component finite-difference steps, shrunk once if a perturbed point
// would leave the bounds.
std::vector<double> finite_difference_steps(const Model& model, std::span<const double> theta, double step) {
  const auto& bounds = model.bounds();
  std::vector<double> steps(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    double h = step * std::max(1.0, std::abs(theta[k]));
    auto inside = [&](double hh) {
      if (bounds.is_fixed(k)) return true;
      return theta[k] - hh > bounds.lower[k] && theta[k] + hh < bounds.upper[k];
    };
    if (!inside(h)) {
      h /= 10.0;
      if (!inside(h)) {
        std::ostringstream os;
        os << "finite-difference step for parameter " << k << " leaves the bounds of model '" << model.name()
           << "' at value " << theta[k];
        throw NumericDomainError(os.str());
      }
    }
    steps[k] = h;
  }
  return steps;
}

}  // namespace

QuasiLikelihood::QuasiLikelihood(const Model& model, const Sample& sample)
    : model_(model),
      sample_(sample),
      drift_(model.state_dim()),
      diffusion_(model.state_dim() * model.noise_dim()),
      sigma_(model.state_dim() * model.state_dim()),
      resid_(model.state_dim()),
      solved_(model.state_dim()) {
  if (sample.dim != model.state_dim()) {
    throw ConfigError("sample dimension does not match model '" + model.name() + "'");
  }
  if (sample.increments() < 1) throw ConfigError("contrast needs at least one increment");
  if (!(sample.scheme.delta > 0.0)) throw ConfigError("sample has non-positive observation step");
}

double QuasiLikelihood::term(std::size_t i, std::span<const double> alpha, std::span<const double> beta) const {
  const std::size_t d = model_.state_dim();
  const std::size_t m = model_.noise_dim();
  const double delta = sample_.scheme.delta;
  const auto prev = sample_.state(i - 1);
  const auto curr = sample_.state(i);

  model_.drift(alpha, prev, drift_);
  model_.diffusion(beta, prev, diffusion_);
  for (std::size_t k = 0; k < d; ++k) resid_[k] = curr[k] - prev[k] - delta * drift_[k];

  if (d == 1) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += diffusion_[k] * diffusion_[k];
    if (!(s > 0.0) || !std::isfinite(s)) not_positive_definite(i);
    return 0.5 * (std::log(s) + resid_[0] * resid_[0] / (delta * s));
  }

  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c <= r; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += diffusion_[r * m + k] * diffusion_[c * m + k];
      sigma_[r * d + c] = s;
      sigma_[c * d + r] = s;
    }
  if (!cholesky_in_place(sigma_, d)) not_positive_definite(i);
  const double log_det = log_det_from_cholesky(sigma_, d);
  std::copy(resid_.begin(), resid_.end(), solved_.begin());
  cholesky_solve_in_place(sigma_, d, solved_);
  double quad = 0.0;
  for (std::size_t k = 0; k < d; ++k) quad += resid_[k] * solved_[k];
  return 0.5 * (log_det + quad / delta);
}

double QuasiLikelihood::total(std::span<const double> theta) const {
  const std::size_t p = model_.drift_params();
  const auto alpha = theta.subspan(0, p);
  const auto beta = theta.subspan(p);
  CompensatedSum sum;
  const std::size_t n = terms_count();
  for (std::size_t i = 1; i <= n; ++i) sum.add(term(i, alpha, beta));
  return sum.value();
}

void QuasiLikelihood::terms(std::span<const double> theta, std::span<double> out) const {
  const std::size_t p = model_.drift_params();
  const auto alpha = theta.subspan(0, p);
  const auto beta = theta.subspan(p);
  const std::size_t n = terms_count();
  for (std::size_t i = 1; i <= n; ++i) out[i - 1] = term(i, alpha, beta);
}

ContrastValue contrast(const Model& model, const Sample& sample, const ParamVector& theta) {
  model.check_params(theta);
  QuasiLikelihood ql(model, sample);
  ContrastValue value;
  value.per_term.resize(ql.terms_count());
  ql.terms(theta.theta(), value.per_term);
  CompensatedSum sum;
  for (double t : value.per_term) sum.add(t);
  value.total = sum.value();
  return value;
}

std::vector<double> contrast_gradient(const Model& model, const Sample& sample, const ParamVector& theta,
                                      double step) {
  model.check_params(theta);
  QuasiLikelihood ql(model, sample);
  auto point = theta.theta();
  const auto steps = finite_difference_steps(model, point, step);
  std::vector<double> grad(point.size());
  for (std::size_t k = 0; k < point.size(); ++k) {
    const double saved = point[k];
    point[k] = saved + steps[k];
    const double up = ql.total(point);
    point[k] = saved - steps[k];
    const double down = ql.total(point);
    point[k] = saved;
    grad[k] = (up - down) / (2.0 * steps[k]);
  }
  return grad;
}

Matrix per_term_gradients(const Model& model, const Sample& sample, const ParamVector& theta, double step) {
  model.check_params(theta);
  QuasiLikelihood ql(model, sample);
  auto point = theta.theta();
  const auto steps = finite_difference_steps(model, point, step);
  const std::size_t n = ql.terms_count();
  Matrix grads(n, point.size());
  std::vector<double> up(n), down(n);
  for (std::size_t k = 0; k < point.size(); ++k) {
    const double saved = point[k];
    point[k] = saved + steps[k];
    ql.terms(point, up);
    point[k] = saved - steps[k];
    ql.terms(point, down);
    point[k] = saved;
    for (std::size_t i = 0; i < n; ++i) grads(i, k) = (up[i] - down[i]) / (2.0 * steps[k]);
  }
  return grads;
}

RateMatrix RateMatrix::for_scheme(const SamplingScheme& scheme, std::size_t drift_params,
                                  std::size_t diffusion_params) {
  const double n = static_cast<double>(scheme.n);
  return {1.0 / (n * scheme.delta), 1.0 / n, drift_params, diffusion_params};
}

Matrix RateMatrix::as_matrix() const {
  std::vector<double> diag(drift_params + diffusion_params);
  for (std::size_t k = 0; k < diag.size(); ++k) diag[k] = rate(k);
  return Matrix::diagonal(diag);
}

ScoreMatrix score_matrix(const Model& model, const Sample& sample, const ParamVector& theta, double step) {
  const Matrix grads = per_term_gradients(model, sample, theta, step);
  const std::size_t k = grads.cols();
  ScoreMatrix out{Matrix(k, k), RateMatrix::for_scheme(sample.scheme, model.drift_params(), model.diffusion_params()),
                  Matrix(k, k)};
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      CompensatedSum s;
      for (std::size_t i = 0; i < grads.rows(); ++i) s.add(grads(i, a) * grads(i, b));
      out.lambda_n(a, b) = s.value();
      out.lambda_n(b, a) = s.value();
    }
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      out.normalized(a, b) = std::sqrt(out.rate.rate(a) * out.rate.rate(b)) * out.lambda_n(a, b);
  return out;
}

}  // namespace difftest
