#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "difftest/linalg.hpp"

namespace difftest {

/// Parameter vector theta = (alpha, beta): alpha enters the drift only,
/// beta the diffusion only.
struct ParamVector {
  std::vector<double> alpha;
  std::vector<double> beta;

  std::size_t drift_size() const noexcept { return alpha.size(); }
  std::size_t diffusion_size() const noexcept { return beta.size(); }
  std::size_t size() const noexcept { return alpha.size() + beta.size(); }

  /// Concatenation (alpha, beta).
  std::vector<double> theta() const;
  double operator[](std::size_t k) const { return k < alpha.size() ? alpha[k] : beta[k - alpha.size()]; }

  /// Splits a concatenated vector after the first `drift_size` entries.
  static ParamVector from_theta(std::span<const double> theta, std::size_t drift_size);

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

/// Box bounds on the concatenated parameter vector. A component is valid
/// when lower < value < upper, or when lower == upper == value (a fixed
/// component).
struct ParamBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  bool contains(std::span<const double> theta) const noexcept;
  bool is_fixed(std::size_t k) const noexcept { return lower[k] == upper[k]; }
};

/// Parametric diffusion dX = b(alpha, X) dt + sigma(beta, X) dW.
///
/// Coefficients are supplied as callbacks that write into caller-owned
/// buffers: the drift writes d values, the diffusion a d x m matrix in
/// row-major order. Callbacks must be pure and re-entrant, and for every
/// valid (beta, x) the matrix sigma sigma' must be positive definite.
class Model {
 public:
  using DriftFn = std::function<void(std::span<const double> alpha, std::span<const double> x, std::span<double> out)>;
  using DiffusionFn =
      std::function<void(std::span<const double> beta, std::span<const double> x, std::span<double> out)>;

  Model(std::string name, std::size_t state_dim, std::size_t noise_dim, std::size_t drift_params,
        std::size_t diffusion_params, DriftFn drift, DiffusionFn diffusion, ParamBounds bounds,
        std::vector<double> state_floor = {});

  const std::string& name() const noexcept { return name_; }
  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t noise_dim() const noexcept { return noise_dim_; }
  std::size_t drift_params() const noexcept { return drift_params_; }
  std::size_t diffusion_params() const noexcept { return diffusion_params_; }
  std::size_t param_count() const noexcept { return drift_params_ + diffusion_params_; }
  const ParamBounds& bounds() const noexcept { return bounds_; }

  /// Per-component lower limit applied to simulated states (-inf when the
  /// state space is unconstrained).
  std::span<const double> state_floor() const noexcept { return state_floor_; }

  void drift(std::span<const double> alpha, std::span<const double> x, std::span<double> out) const {
    drift_(alpha, x, out);
  }
  void diffusion(std::span<const double> beta, std::span<const double> x, std::span<double> out) const {
    diffusion_(beta, x, out);
  }

  std::vector<double> drift(const ParamVector& theta, std::span<const double> x) const;
  Matrix diffusion(const ParamVector& theta, std::span<const double> x) const;

  bool within_bounds(const ParamVector& theta) const noexcept;
  /// Throws ConfigError if theta has the wrong shape or leaves the bounds.
  void check_params(const ParamVector& theta) const;

  /// Copy of this model with different parameter bounds.
  Model with_bounds(ParamBounds bounds) const;

 private:
  std::string name_;
  std::size_t state_dim_;
  std::size_t noise_dim_;
  std::size_t drift_params_;
  std::size_t diffusion_params_;
  DriftFn drift_;
  DiffusionFn diffusion_;
  ParamBounds bounds_;
  std::vector<double> state_floor_;
};

/// A shipped benchmark model with its experiment defaults.
struct BuiltinModel {
  Model model;
  ParamVector theta0;
  std::vector<double> x0;
};

/// Lower bound used for every diffusion parameter of the shipped models.
inline constexpr double kDiffusionParamFloor = 1e-6;

/// One of "OU", "GBM", "CIR", "MOU" (case-insensitive).
BuiltinModel make_builtin_model(std::string_view name);

std::vector<std::string> builtin_model_names();

/// Sigma = sigma sigma', its inverse Xi and log det Sigma at one state.
struct SigmaOps {
  Matrix sigma_mat;
  Matrix xi_mat;
  double log_det = 0.0;
};

/// Throws NumericDomainError naming x and beta if Sigma is not positive
/// definite.
SigmaOps sigma_ops(const Model& model, std::span<const double> beta, std::span<const double> x);

}  // namespace difftest
