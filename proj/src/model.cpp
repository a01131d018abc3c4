#include "difftest/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "difftest/errors.hpp"

namespace difftest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_vector(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

ParamBounds shipped_bounds(std::size_t p, std::size_t q) {
  ParamBounds b;
  b.lower.assign(p, -kInf);
  b.upper.assign(p, kInf);
  b.lower.insert(b.lower.end(), q, kDiffusionParamFloor);
  b.upper.insert(b.upper.end(), q, kInf);
  return b;
}

// b(alpha, x) = alpha_0 - alpha_1 x, shared by OU, GBM and CIR.
void linear_mean_reverting_drift(std::span<const double> alpha, std::span<const double> x, std::span<double> out) {
  out[0] = alpha[0] - alpha[1] * x[0];
}

}  // namespace

std::vector<double> ParamVector::theta() const {
  std::vector<double> t(alpha);
  t.insert(t.end(), beta.begin(), beta.end());
  return t;
}

ParamVector ParamVector::from_theta(std::span<const double> theta, std::size_t drift_size) {
  ParamVector pv;
  pv.alpha.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(drift_size));
  pv.beta.assign(theta.begin() + static_cast<std::ptrdiff_t>(drift_size), theta.end());
  return pv;
}

bool ParamBounds::contains(std::span<const double> theta) const noexcept {
  if (theta.size() != lower.size()) return false;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double v = theta[k];
    if (!std::isfinite(v)) return false;
    if (is_fixed(k)) {
      if (v != lower[k]) return false;
    } else if (!(v > lower[k] && v < upper[k])) {
      return false;
    }
  }
  return true;
}

Model::Model(std::string name, std::size_t state_dim, std::size_t noise_dim, std::size_t drift_params,
             std::size_t diffusion_params, DriftFn drift, DiffusionFn diffusion, ParamBounds bounds,
             std::vector<double> state_floor)
    : name_(std::move(name)),
      state_dim_(state_dim),
      noise_dim_(noise_dim),
      drift_params_(drift_params),
      diffusion_params_(diffusion_params),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      bounds_(std::move(bounds)),
      state_floor_(std::move(state_floor)) {
  if (state_dim_ == 0 || noise_dim_ == 0) throw ConfigError("model '" + name_ + "': dimensions must be positive");
  if (drift_params_ == 0 || diffusion_params_ == 0) {
    throw ConfigError("model '" + name_ + "': needs at least one drift and one diffusion parameter");
  }
  if (!drift_ || !diffusion_) throw ConfigError("model '" + name_ + "': missing coefficient callback");
  const std::size_t k = param_count();
  if (bounds_.lower.size() != k || bounds_.upper.size() != k) {
    throw ConfigError("model '" + name_ + "': bounds do not match parameter count");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(bounds_.lower[i] <= bounds_.upper[i])) throw ConfigError("model '" + name_ + "': empty parameter bound");
  }
  if (state_floor_.empty()) state_floor_.assign(state_dim_, -kInf);
  if (state_floor_.size() != state_dim_) throw ConfigError("model '" + name_ + "': state floor has wrong size");
}

std::vector<double> Model::drift(const ParamVector& theta, std::span<const double> x) const {
  std::vector<double> out(state_dim_);
  drift_(theta.alpha, x, out);
  return out;
}

Matrix Model::diffusion(const ParamVector& theta, std::span<const double> x) const {
  Matrix out(state_dim_, noise_dim_);
  diffusion_(theta.beta, x, out.data());
  return out;
}

bool Model::within_bounds(const ParamVector& theta) const noexcept {
  if (theta.alpha.size() != drift_params_ || theta.beta.size() != diffusion_params_) return false;
  return bounds_.contains(theta.theta());
}

void Model::check_params(const ParamVector& theta) const {
  if (theta.alpha.size() != drift_params_ || theta.beta.size() != diffusion_params_) {
    std::ostringstream os;
    os << "model '" << name_ << "' expects " << drift_params_ << " drift and " << diffusion_params_
       << " diffusion parameters, got " << theta.alpha.size() << " and " << theta.beta.size();
    throw ConfigError(os.str());
  }
  if (!within_bounds(theta)) {
    throw ConfigError("parameter " + format_vector(theta.theta()) + " outside the bounds of model '" + name_ + "'");
  }
}

Model Model::with_bounds(ParamBounds bounds) const {
  return Model(name_, state_dim_, noise_dim_, drift_params_, diffusion_params_, drift_, diffusion_, std::move(bounds),
               state_floor_);
}

BuiltinModel make_builtin_model(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::toupper(c); });

  if (key == "OU") {
    Model m("OU", 1, 1, 2, 1, linear_mean_reverting_drift,
            [](std::span<const double> beta, std::span<const double>, std::span<double> out) { out[0] = beta[0]; },
            shipped_bounds(2, 1));
    return {std::move(m), ParamVector{{0.5, 0.5}, {0.25}}, {1.0}};
  }
  if (key == "GBM") {
    Model m("GBM", 1, 1, 2, 1, linear_mean_reverting_drift,
            [](std::span<const double> beta, std::span<const double> x, std::span<double> out) {
              out[0] = beta[0] * x[0];
            },
            shipped_bounds(2, 1));
    return {std::move(m), ParamVector{{0.5, 0.5}, {0.25}}, {1.0}};
  }
  if (key == "CIR") {
    // Full truncation: negative transient states contribute zero noise.
    Model m("CIR", 1, 1, 2, 1, linear_mean_reverting_drift,
            [](std::span<const double> beta, std::span<const double> x, std::span<double> out) {
              out[0] = beta[0] * std::sqrt(std::max(x[0], 0.0));
            },
            shipped_bounds(2, 1), {0.0});
    return {std::move(m), ParamVector{{0.5, 0.5}, {0.125}}, {1.0}};
  }
  if (key == "MOU") {
    Model m(
        "MOU", 2, 2, 2, 2,
        [](std::span<const double> alpha, std::span<const double> x, std::span<double> out) {
          out[0] = 2.0 - alpha[0] * x[0];
          out[1] = 2.0 - alpha[1] * x[1];
        },
        [](std::span<const double> beta, std::span<const double>, std::span<double> out) {
          out[0] = beta[0];
          out[1] = 0.0;
          out[2] = 0.0;
          out[3] = beta[1];
        },
        shipped_bounds(2, 2));
    return {std::move(m), ParamVector{{1.0, 1.0}, {0.3, 0.5}}, {1.0, 1.0}};
  }
  throw ConfigError("unknown model '" + std::string(name) + "' (expected one of OU, GBM, CIR, MOU)");
}

std::vector<std::string> builtin_model_names() { return {"OU", "GBM", "CIR", "MOU"}; }

SigmaOps sigma_ops(const Model& model, std::span<const double> beta, std::span<const double> x) {
  const std::size_t d = model.state_dim();
  const std::size_t m = model.noise_dim();
  std::vector<double> sig(d * m);
  model.diffusion(beta, x, sig);

  SigmaOps ops{Matrix(d, d), Matrix(d, d), 0.0};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += sig[i * m + k] * sig[j * m + k];
      ops.sigma_mat(i, j) = s;
    }

  auto fail = [&] {
    throw NumericDomainError("Sigma(beta, x) not positive definite at x = " + format_vector(x) +
                             ", beta = " + format_vector(beta));
  };

  if (d == 1) {
    const double s = ops.sigma_mat(0, 0);
    if (!(s > 0.0) || !std::isfinite(s)) fail();
    ops.xi_mat(0, 0) = 1.0 / s;
    ops.log_det = std::log(s);
    return ops;
  }

  std::vector<double> l(ops.sigma_mat.data().begin(), ops.sigma_mat.data().end());
  if (!cholesky_in_place(l, d)) fail();
  ops.log_det = log_det_from_cholesky(l, d);
  std::vector<double> col(d);
  for (std::size_t j = 0; j < d; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    cholesky_solve_in_place(l, d, col);
    for (std::size_t i = 0; i < d; ++i) ops.xi_mat(i, j) = col[i];
  }
  return ops;
}

}  // namespace difftest
