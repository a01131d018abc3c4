#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "difftest/distributions.hpp"
#include "difftest/errors.hpp"
#include "difftest/rng.hpp"

using namespace difftest;

namespace {

double cdf3_closed(double x) {
  return std::erf(std::sqrt(x / 2)) - std::sqrt(2 * x / std::numbers::pi) * std::exp(-x / 2);
}
double cdf4_closed(double x) { return 1 - std::exp(-x / 2) * (1 + x / 2); }

double bisect(double (*f)(double), double p) {
  double lo = 0, hi = 100;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Gamma, SpecialCases) {
  for (double x : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0}) {
    EXPECT_NEAR(regularized_gamma_p(1.0, x), -std::expm1(-x), 1e-14);
    EXPECT_NEAR(regularized_gamma_p(0.5, x), std::erf(std::sqrt(x)), 1e-14);
    EXPECT_NEAR(regularized_gamma_q(0.5, x), std::erfc(std::sqrt(x)), 1e-12 * std::erfc(std::sqrt(x)));
  }
  EXPECT_EQ(regularized_gamma_p(2.0, 0.0), 0.0);
}

TEST(ChiSquared, CdfExamples) {
  for (std::size_t df : {1u, 3u, 7u}) EXPECT_EQ(chisq_cdf(df, 0.0), 0.0);
  EXPECT_NEAR(chisq_cdf(2, 2 * std::log(20.0)), 0.95, 1e-14);
  EXPECT_NEAR(chisq_cdf(3, 7.8147), 0.95, 5e-5);
  for (double x : {0.1, 1.0, 5.0, 12.0, 30.0}) {
    EXPECT_NEAR(chisq_cdf(3, x), cdf3_closed(x), 1e-13);
    EXPECT_NEAR(chisq_cdf(4, x), cdf4_closed(x), 1e-13);
    EXPECT_NEAR(chisq_sf(4, x), std::exp(-x / 2) * (1 + x / 2), 1e-13 * std::exp(-x / 2) * (1 + x / 2));
  }
}

TEST(ChiSquared, PdfClosedForm) {
  for (double x : {0.3, 2.0, 9.0}) {
    EXPECT_NEAR(chisq_pdf(2, x), 0.5 * std::exp(-x / 2), 1e-15);
    EXPECT_NEAR(chisq_pdf(3, x), std::sqrt(x / (2 * std::numbers::pi)) * std::exp(-x / 2), 1e-15);
  }
}

TEST(ChiSquared, QuantileMatchesBisectionOracle) {
  EXPECT_NEAR(chisq_quantile(3, 0.95), bisect(cdf3_closed, 0.95), 1e-6);
  EXPECT_NEAR(chisq_quantile(4, 0.95), bisect(cdf4_closed, 0.95), 1e-6);
  EXPECT_NEAR(chisq_quantile(3, 0.95), 7.8147, 1e-4);
  EXPECT_NEAR(chisq_quantile(4, 0.95), 9.4877, 1e-4);
}

TEST(ChiSquared, QuantileRoundTrip) {
  for (std::size_t df : {1u, 2u, 3u, 4u, 10u, 50u})
    for (double p : {1e-6, 0.001, 0.05, 0.3, 0.5, 0.9, 0.95, 0.999, 1 - 1e-8})
      EXPECT_NEAR(chisq_cdf(df, chisq_quantile(df, p)), p, 1e-10) << df << " " << p;
  EXPECT_THROW(chisq_quantile(3, 0.0), NumericDomainError);
  EXPECT_THROW(chisq_quantile(3, 1.0), NumericDomainError);
}

TEST(Noncentral, ZeroNoncentralityIsCentral) {
  for (double x : {0.5, 3.0, 7.8147, 20.0}) EXPECT_EQ(noncentral_chisq_cdf(3, 0.0, x), chisq_cdf(3, x));
}

TEST(Noncentral, DecreasingInNoncentrality) {
  for (double x : {1.0, 7.8147, 25.0}) {
    double prev = 2.0;
    for (double mu = 0.0; mu <= 40.0; mu += 0.5) {
      const double v = noncentral_chisq_cdf(3, mu, x);
      EXPECT_LT(v, prev) << mu;
      prev = v;
    }
  }
}

TEST(Noncentral, MatchesMonteCarlo) {
  const double mu = 4.0;
  const int draws = 1000000;
  Rng rng(314);
  std::vector<double> grid{2.0, 5.0, 7.8147, 12.0};
  std::vector<int> below(grid.size(), 0);
  for (int i = 0; i < draws; ++i) {
    const double z1 = rng.normal() + std::sqrt(mu), z2 = rng.normal(), z3 = rng.normal();
    const double v = z1 * z1 + z2 * z2 + z3 * z3;
    for (std::size_t k = 0; k < grid.size(); ++k) below[k] += v <= grid[k];
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double p = noncentral_chisq_cdf(3, mu, grid[k]);
    const double se = std::sqrt(p * (1 - p) / draws);
    EXPECT_NEAR(static_cast<double>(below[k]) / draws, p, 3.5 * se) << grid[k];
  }
}

TEST(Noncentral, LargeNoncentrality) {
  // Mean df + mu, so the CDF at the mean is near one half.
  const double v = noncentral_chisq_cdf(3, 2000.0, 2003.0);
  EXPECT_GT(v, 0.4);
  EXPECT_LT(v, 0.6);
}

TEST(Power, NullAndMonotone) {
  EXPECT_EQ(theoretical_power(3, 0.0, 0.05), 0.05);
  EXPECT_EQ(theoretical_power(4, 0.0, 0.01), 0.01);
  double prev = 0.05;
  for (double mu = 0.5; mu <= 30.0; mu += 0.5) {
    const double p = theoretical_power(3, mu, 0.05);
    EXPECT_GT(p, prev);
    prev = p;
  }
  // OU information: h = (0, 0, 1) gives mu = I_sigma = 32.
  EXPECT_GT(theoretical_power(3, 32.0, 0.05), 0.99);
}
