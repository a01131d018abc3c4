#include <gtest/gtest.h>

#include <cmath>

#include "difftest/divergence_tests.hpp"
#include "difftest/errors.hpp"
#include "difftest/estimator.hpp"
#include "difftest/quasi_likelihood.hpp"
#include "difftest/rng.hpp"

using namespace difftest;

namespace {

std::vector<PhiFunction> all_phis() {
  return {PhiFunction::akl(), PhiFunction::power(-20), PhiFunction::power(-10), PhiFunction::power(-3),
          PhiFunction::bs(), PhiFunction::log()};
}

Sample ou_sample(std::size_t n, std::uint64_t seed) {
  const auto ou = make_builtin_model("OU");
  return simulate(ou.model, ou.theta0, ou.x0, SamplingScheme::rapidly_increasing(n), seed);
}

// Constant-coefficient value of the limit integrand with r = sigma / sigma0.
double u_constant(const PhiFunction& phi, double sigma, double sigma0) {
  const double r = sigma / sigma0;
  return phi.eval(r) + 0.5 * phi.d1(r) * r * (sigma0 * sigma0 / (sigma * sigma) - 1.0);
}

}  // namespace

TEST(Divergence, ZeroAtNull) {
  const auto ou = make_builtin_model("OU");
  const Sample s = ou_sample(200, 1);
  for (const auto& phi : all_phis()) {
    const auto d = d_phi_n(ou.model, s, ou.theta0, ou.theta0, phi);
    EXPECT_EQ(d.value, 0.0) << phi.name();
    EXPECT_EQ(t_statistic(ou.model, s, ou.theta0, ou.theta0, phi).value, 0.0);
  }
}

TEST(Divergence, NonnegativeForFamilyMembers) {
  const auto ou = make_builtin_model("OU");
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Sample s = ou_sample(100, seed);
    const ParamVector theta{{0.5 + rng.normal(), 0.5 + 0.3 * rng.uniform()}, {0.1 + 0.4 * rng.uniform()}};
    for (const auto& phi : all_phis()) {
      if (!phi.is_family_member()) continue;
      EXPECT_GE(d_phi_n(ou.model, s, theta, ou.theta0, phi).value, 0.0) << phi.name();
      EXPECT_GE(t_statistic(ou.model, s, theta, ou.theta0, phi).value, 0.0) << phi.name();
    }
  }
}

TEST(Divergence, MatchesBruteForce) {
  const auto ou = make_builtin_model("OU");
  const Sample s = ou_sample(400, 31);
  const ParamVector theta{{0.6, 0.5}, {0.25}};
  const double dt = s.scheme.delta;
  auto h = [&](const ParamVector& p, std::size_t i) {
    const double prev = s.observations[i - 1];
    const double r = s.observations[i] - prev - dt * (p.alpha[0] - p.alpha[1] * prev);
    const double v = p.beta[0] * p.beta[0];
    return 0.5 * (std::log(v) + r * r / (dt * v));
  };
  for (const auto& phi : all_phis()) {
    double sum = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double ratio = std::exp(h(ou.theta0, i) - h(theta, i));
      sum += phi.kind() == PhiKind::Log ? std::log(ratio) : phi.eval(ratio);
    }
    const double oracle = sum / 400.0;
    const double value = d_phi_n(ou.model, s, theta, ou.theta0, phi).value;
    EXPECT_NEAR(value, oracle, 1e-10 * std::abs(oracle)) << phi.name();
  }
}

TEST(Statistic, ScalesWithPhi) {
  const auto ou = make_builtin_model("OU");
  const Sample s = ou_sample(300, 2);
  const auto est = qmle(ou.model, s, ou.theta0);
  for (const auto& phi : all_phis()) {
    const double base = t_statistic(ou.model, s, est.theta_hat, ou.theta0, phi).value;
    const double scaled = t_statistic(ou.model, s, est.theta_hat, ou.theta0, phi.scaled(2.5)).value;
    EXPECT_NEAR(scaled, 2.5 * base, 1e-12 * std::abs(scaled)) << phi.name();
  }
}

TEST(Statistic, GqlrtIsLogKindAndContrastDifference) {
  const auto ou = make_builtin_model("OU");
  const Sample s = ou_sample(500, 3);
  const auto est = qmle(ou.model, s, ou.theta0);
  const auto g = gqlrt(ou.model, s, est.theta_hat, ou.theta0);
  const auto t = t_statistic(ou.model, s, est.theta_hat, ou.theta0, PhiFunction::log());
  EXPECT_EQ(g.value, t.value);
  const auto d = d_phi_n(ou.model, s, est.theta_hat, ou.theta0, PhiFunction::log());
  EXPECT_EQ(g.value, 2.0 * d.sum);
  const double diff = contrast(ou.model, s, ou.theta0).total - contrast(ou.model, s, est.theta_hat).total;
  EXPECT_NEAR(g.value, 2.0 * diff, 1e-9 * std::abs(g.value));
  EXPECT_GE(g.value, 0.0);
  EXPECT_TRUE(g.warning.empty());
  EXPECT_EQ(g.df, 3u);

  const auto bad = gqlrt(ou.model, s, ou.theta0, est.theta_hat);
  EXPECT_LT(bad.value, 0.0);
  EXPECT_FALSE(bad.warning.empty());
}

TEST(Statistic, ExtremeRatiosSaturate) {
  std::vector<double> lr{900.0, -900.0, 0.1};
  const auto t = statistic_from_log_ratios(lr, PhiFunction::bs(), 3);
  EXPECT_EQ(t.saturated, 2u);
  EXPECT_FALSE(t.warning.empty());
  EXPECT_TRUE(std::isfinite(t.value));
  const auto g = statistic_from_log_ratios(lr, PhiFunction::log(), 3);
  EXPECT_EQ(g.saturated, 0u);
  EXPECT_NEAR(g.value, 0.2, 1e-12);
}

// Null mean of T for AKL against the chi-squared(3) mean. At n = 1000 the
// horizon is only T = 10 and the small-T bias of the drift estimate pushes
// the mean to about 3.6; n = 4000 (T ~ 16) is inside the band.
TEST(Statistic, NullMeanNearDegreesOfFreedom) {
  const auto ou = make_builtin_model("OU");
  const auto scheme = SamplingScheme::rapidly_increasing(4000);
  double sum = 0.0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r) {
    const Sample s = simulate(ou.model, ou.theta0, ou.x0, scheme, derive_seed(2718, {static_cast<std::uint64_t>(r)}));
    const auto est = qmle(ou.model, s, ou.theta0);
    sum += t_statistic(ou.model, s, est.theta_hat, ou.theta0, PhiFunction::akl()).value;
  }
  const double mean = sum / reps;
  EXPECT_GE(mean, 3.0 * 0.85);
  EXPECT_LE(mean, 3.0 * 1.15);
}

TEST(ULimit, ZeroWhenDiffusionParametersAgree) {
  const auto ou = make_builtin_model("OU");
  for (const auto& phi : all_phis()) {
    EXPECT_EQ(u_phi_limit(ou.model, ParamVector{{2.0, 0.1}, {0.25}}, ou.theta0, ou.x0, phi, 10000, 1), 0.0)
        << phi.name();
  }
}

TEST(ULimit, ConstantDiffusionClosedForm) {
  const auto ou = make_builtin_model("OU");
  for (const auto& phi : all_phis()) {
    for (double sigma : {0.2, 0.3, 0.5}) {
      const ParamVector theta{{0.5, 0.5}, {sigma}};
      const double expected = u_constant(phi, sigma, 0.25);
      const double got = u_phi_limit(ou.model, theta, ou.theta0, ou.x0, phi, 10000, 7);
      EXPECT_NEAR(got, expected, 1e-12 * std::max(1.0, std::abs(expected))) << phi.name() << " " << sigma;
    }
  }
  // Log kind reduces to the Gaussian Kullback-Leibler form.
  const double s = 0.3, s0 = 0.25;
  EXPECT_NEAR(u_constant(PhiFunction::log(), s, s0), 0.5 * (s0 * s0 / (s * s) - 1 + std::log(s * s / (s0 * s0))),
              1e-15);
}

TEST(ULimit, StateDependentDiffusionIsSampled) {
  const auto cir = make_builtin_model("CIR");
  const ParamVector theta{{0.5, 0.5}, {0.15}};
  // sqrt(x) cancels in the ratio, so CIR also has a state-free integrand.
  EXPECT_NEAR(u_phi_limit(cir.model, theta, cir.theta0, cir.x0, PhiFunction::akl(), 10000, 3),
              u_constant(PhiFunction::akl(), 0.15, 0.125), 1e-12);
  EXPECT_THROW(u_phi_limit(cir.model, theta, cir.theta0, cir.x0, PhiFunction::akl(), 9999, 3), ConfigError);
}
