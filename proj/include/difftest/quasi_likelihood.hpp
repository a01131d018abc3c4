#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "difftest/linalg.hpp"
#include "difftest/model.hpp"
#include "difftest/simulator.hpp"

namespace difftest {

/// Gaussian (Euler) contrast of a discretely observed diffusion:
///
///   H_i(theta) = 1/2 [ log det Sigma_{i-1}(beta)
///                      + (1/delta) Xbar_i' Xi_{i-1}(beta) Xbar_i ],
///   Xbar_i     = X_{t_i} - X_{t_{i-1}} - delta * b(alpha, X_{t_{i-1}}),
///
/// with both coefficients evaluated at the left endpoint X_{t_{i-1}}.
/// H_n = sum_i H_i is the negative quasi log-likelihood; the QMLE
/// minimises it.
///
/// Holds scratch buffers, so one instance must not be shared between
/// threads. The model and sample must outlive the evaluator.
class QuasiLikelihood {
 public:
  QuasiLikelihood(const Model& model, const Sample& sample);

  const Model& model() const noexcept { return model_; }
  const Sample& sample() const noexcept { return sample_; }
  std::size_t terms_count() const noexcept { return sample_.increments(); }

  /// H_n(theta), compensated summation. Throws NumericDomainError if some
  /// Sigma_{i-1}(beta) is not positive definite.
  double total(std::span<const double> theta) const;

  /// Writes H_i(theta) for i = 1..n into `out` (size n).
  void terms(std::span<const double> theta, std::span<double> out) const;

 private:
  double term(std::size_t i, std::span<const double> alpha, std::span<const double> beta) const;

  const Model& model_;
  const Sample& sample_;
  mutable std::vector<double> drift_;
  mutable std::vector<double> diffusion_;
  mutable std::vector<double> sigma_;
  mutable std::vector<double> resid_;
  mutable std::vector<double> solved_;
};

struct ContrastValue {
  double total = 0.0;
  std::vector<double> per_term;
};

ContrastValue contrast(const Model& model, const Sample& sample, const ParamVector& theta);

inline constexpr double kDefaultGradientStep = 1e-6;

/// Central finite-difference gradient of H_n. Component k uses the step
/// step * max(1, |theta_k|); if a perturbed point leaves the parameter
/// bounds the step is shrunk tenfold once, and a second violation throws
/// NumericDomainError.
std::vector<double> contrast_gradient(const Model& model, const Sample& sample, const ParamVector& theta,
                                      double step = kDefaultGradientStep);

/// Finite-difference gradients of every H_i, as an n x (p+q) matrix. Uses
/// the same steps as contrast_gradient, so the column sums reproduce it.
Matrix per_term_gradients(const Model& model, const Sample& sample, const ParamVector& theta,
                          double step = kDefaultGradientStep);

/// phi(n) = diag(1/(n delta) I_p, 1/n I_q).
struct RateMatrix {
  double drift_rate = 0.0;
  double diffusion_rate = 0.0;
  std::size_t drift_params = 0;
  std::size_t diffusion_params = 0;

  static RateMatrix for_scheme(const SamplingScheme& scheme, std::size_t drift_params, std::size_t diffusion_params);

  double rate(std::size_t k) const noexcept { return k < drift_params ? drift_rate : diffusion_rate; }
  Matrix as_matrix() const;
};

struct ScoreMatrix {
  /// Lambda_n = sum_i g_i g_i' with g_i the gradient of H_i.
  Matrix lambda_n;
  RateMatrix rate;
  /// phi(n)^{1/2} Lambda_n phi(n)^{1/2}, an estimate of the Fisher information.
  Matrix normalized;
};

ScoreMatrix score_matrix(const Model& model, const Sample& sample, const ParamVector& theta,
                         double step = kDefaultGradientStep);

}  // namespace difftest
