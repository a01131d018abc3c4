#include "difftest/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "difftest/errors.hpp"

namespace difftest {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 100000;

void check_df(std::size_t df) {
  if (df == 0) throw NumericDomainError("chi-squared degrees of freedom must be >= 1");
}

void check_x(double x) {
  if (!(x >= 0.0)) {
    std::ostringstream os;
    os << "chi-squared argument must be >= 0, got " << x;
    throw NumericDomainError(os.str());
  }
}

// log of x^a e^{-x} / Gamma(a)
double log_gamma_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(log_gamma_prefactor(a, x));
}

// Q(a, x) by the modified Lentz continued fraction.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(log_gamma_prefactor(a, x)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw NumericDomainError("incomplete gamma shape must be positive");
  check_x(x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw NumericDomainError("incomplete gamma shape must be positive");
  check_x(x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chisq_cdf(std::size_t df, double x) {
  check_df(df);
  check_x(x);
  return regularized_gamma_p(0.5 * static_cast<double>(df), 0.5 * x);
}

double chisq_sf(std::size_t df, double x) {
  check_df(df);
  check_x(x);
  return regularized_gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

double chisq_pdf(std::size_t df, double x) {
  check_df(df);
  check_x(x);
  const double k = 0.5 * static_cast<double>(df);
  if (x == 0.0) return df == 2 ? 0.5 : (df == 1 ? std::numeric_limits<double>::infinity() : 0.0);
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

double chisq_quantile(std::size_t df, double prob) {
  check_df(df);
  if (!(prob > 0.0 && prob < 1.0)) {
    std::ostringstream os;
    os << "chi-squared quantile needs prob in (0, 1), got " << prob;
    throw NumericDomainError(os.str());
  }
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(df));
  while (chisq_cdf(df, hi) < prob) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chisq_cdf(df, mid) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double q = 0.5 * (lo + hi);
  for (int i = 0; i < 5; ++i) {
    const double err = chisq_cdf(df, q) - prob;
    if (std::abs(err) < 1e-15) break;
    const double pdf = chisq_pdf(df, q);
    if (!(pdf > 0.0) || !std::isfinite(pdf)) break;
    const double next = q - err / pdf;
    if (!(next > lo && next < hi)) break;
    q = next;
  }
  return q;
}

double noncentral_chisq_cdf(std::size_t df, double mu, double x, double tail_tolerance) {
  check_df(df);
  check_x(x);
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw NumericDomainError("noncentrality must be finite and >= 0");
  if (mu == 0.0) return chisq_cdf(df, x);

  const double lambda = 0.5 * mu;
  const auto mode = static_cast<std::size_t>(std::floor(lambda));
  const double w_mode =
      std::exp(-lambda + static_cast<double>(mode) * std::log(lambda) - std::lgamma(static_cast<double>(mode) + 1.0));

  double mass = w_mode;
  double sum = w_mode * chisq_cdf(df + 2 * mode, x);

  // Expand outwards from the mode, always taking the heavier side next.
  std::size_t up = mode, down = mode;
  double w_up = w_mode, w_down = w_mode;
  bool down_done = mode == 0;
  while (1.0 - mass >= tail_tolerance) {
    const double next_up = w_up * lambda / static_cast<double>(up + 1);
    const double next_down = down_done ? 0.0 : w_down * static_cast<double>(down) / lambda;
    if (next_up == 0.0 && next_down == 0.0) break;
    if (!down_done && next_down >= next_up) {
      --down;
      w_down = next_down;
      mass += w_down;
      sum += w_down * chisq_cdf(df + 2 * down, x);
      if (down == 0) down_done = true;
    } else {
      ++up;
      w_up = next_up;
      mass += w_up;
      sum += w_up * chisq_cdf(df + 2 * up, x);
    }
  }
  return std::min(1.0, std::max(0.0, sum));
}

double theoretical_power(std::size_t df, double mu, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw NumericDomainError("significance level must lie in (0, 1)");
  if (mu == 0.0) return alpha;
  const double c = chisq_quantile(df, 1.0 - alpha);
  return 1.0 - noncentral_chisq_cdf(df, mu, c);
}

}  // namespace difftest
