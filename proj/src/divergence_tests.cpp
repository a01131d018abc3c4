#include "difftest/divergence_tests.hpp"

#include <cmath>
#include <sstream>

#include "difftest/errors.hpp"
#include "difftest/linalg.hpp"
#include "difftest/quasi_likelihood.hpp"

namespace difftest {

std::vector<double> log_ratios(const Model& model, const Sample& sample, const ParamVector& theta,
                               const ParamVector& theta0) {
  model.check_params(theta);
  model.check_params(theta0);
  QuasiLikelihood ql(model, sample);
  const std::size_t n = ql.terms_count();
  std::vector<double> at_theta(n), out(n);
  ql.terms(theta.theta(), at_theta);
  ql.terms(theta0.theta(), out);
  for (std::size_t i = 0; i < n; ++i) out[i] -= at_theta[i];
  return out;
}

DivergenceValue divergence_from_log_ratios(std::span<const double> log_ratio, const PhiFunction& phi) {
  DivergenceValue out;
  out.terms = log_ratio.size();
  CompensatedSum sum;
  for (double lr : log_ratio) {
    if (phi.kind() == PhiKind::Log) {
      sum.add(phi.scale() * lr);
      continue;
    }
    if (lr > kLogRatioClamp) {
      lr = kLogRatioClamp;
      ++out.saturated;
    } else if (lr < -kLogRatioClamp) {
      lr = -kLogRatioClamp;
      ++out.saturated;
    }
    sum.add(phi.eval_log(lr));
  }
  out.sum = sum.value();
  out.value = out.terms ? out.sum / static_cast<double>(out.terms) : 0.0;
  return out;
}

DivergenceValue d_phi_n(const Model& model, const Sample& sample, const ParamVector& theta, const ParamVector& theta0,
                        const PhiFunction& phi) {
  const auto lr = log_ratios(model, sample, theta, theta0);
  return divergence_from_log_ratios(lr, phi);
}

TestStatistic statistic_from_log_ratios(std::span<const double> log_ratio, const PhiFunction& phi, std::size_t df) {
  const auto d = divergence_from_log_ratios(log_ratio, phi);
  TestStatistic stat;
  stat.value = 2.0 * d.sum;
  stat.df = df;
  stat.phi = phi;
  stat.saturated = d.saturated;
  if (d.saturated > 0) {
    std::ostringstream os;
    os << d.saturated << " log ratio(s) clamped to +-" << kLogRatioClamp;
    stat.warning = os.str();
  }
  if (phi.kind() == PhiKind::Log) {
    const double tolerance = 1e-6 * static_cast<double>(log_ratio.size());
    if (stat.value < -tolerance) {
      std::ostringstream os;
      os << "GQLRT statistic " << stat.value << " is negative: theta_hat does not minimise the contrast";
      stat.warning = os.str();
    }
  }
  return stat;
}

TestStatistic t_statistic(const Model& model, const Sample& sample, const ParamVector& theta_hat,
                          const ParamVector& theta0, const PhiFunction& phi) {
  const auto lr = log_ratios(model, sample, theta_hat, theta0);
  auto stat = statistic_from_log_ratios(lr, phi, model.param_count());
  stat.theta_hat = theta_hat;
  stat.theta0 = theta0;
  return stat;
}

TestStatistic gqlrt(const Model& model, const Sample& sample, const ParamVector& theta_hat, const ParamVector& theta0) {
  return t_statistic(model, sample, theta_hat, theta0, PhiFunction::log());
}

double u_phi_limit(const Model& model, const ParamVector& theta, const ParamVector& theta0,
                   std::span<const double> x0, const PhiFunction& phi, std::size_t draws, std::uint64_t seed,
                   const StationaryDrawOptions& options) {
  if (draws < 10000) throw ConfigError("u_phi_limit needs at least 10^4 stationary draws");
  model.check_params(theta);
  model.check_params(theta0);
  if (!(options.spacing > 0.0) || options.substeps == 0 || options.burn_in < 0.0) {
    throw ConfigError("invalid stationary draw options");
  }
  const std::size_t d = model.state_dim();

  // One observation step per draw; burn-in rounded up to whole spacings.
  const auto burn = static_cast<std::size_t>(std::ceil(options.burn_in / options.spacing));
  const SamplingScheme scheme{draws - 1, options.spacing, options.substeps};
  SimulationOptions sim;
  sim.burn_in = burn;
  const Sample path = simulate(model, theta0, x0, scheme, seed, sim);

  CompensatedSum sum;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto x = path.state(i);
    const auto alt = sigma_ops(model, theta.beta, x);
    const auto null = sigma_ops(model, theta0.beta, x);
    const double rho = std::exp(0.5 * (alt.log_det - null.log_det));
    double trace = 0.0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) trace += alt.xi_mat(a, b) * null.sigma_mat(b, a);
    sum.add(phi.eval(rho) + 0.5 * phi.d1(rho) * rho * (trace - static_cast<double>(d)));
  }
  return sum.value() / static_cast<double>(path.size());
}

}  // namespace difftest
