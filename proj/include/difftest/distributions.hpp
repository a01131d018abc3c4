#pragma once

#include <cstddef>

namespace difftest {

/// Regularized lower incomplete gamma P(a, x): power series for x < a + 1,
/// modified Lentz continued fraction for Q = 1 - P otherwise.
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Chi-squared CDF P(df/2, x/2). df >= 1, x >= 0.
double chisq_cdf(std::size_t df, double x);
/// Upper tail 1 - chisq_cdf, accurate in the tail.
double chisq_sf(std::size_t df, double x);
double chisq_pdf(std::size_t df, double x);

/// Inverse CDF: bracketed bisection followed by Newton polishing, with
/// |chisq_cdf(df, q) - prob| < 1e-10. prob must lie in (0, 1).
double chisq_quantile(std::size_t df, double prob);

inline constexpr double kPoissonTailTolerance = 1e-14;

/// Noncentral chi-squared CDF as the Poisson mixture
/// sum_j e^{-mu/2} (mu/2)^j / j! * chisq_cdf(df + 2j, x), summed outwards
/// from the modal Poisson index until the omitted Poisson mass is below
/// `tail_tolerance`.
double noncentral_chisq_cdf(std::size_t df, double mu, double x, double tail_tolerance = kPoissonTailTolerance);

/// 1 - F_{df,mu}(c) with c the central (1 - alpha) quantile. Returns alpha
/// itself when mu = 0.
double theoretical_power(std::size_t df, double mu, double alpha);

}  // namespace difftest
