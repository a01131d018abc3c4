#include "difftest/phi.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "difftest/errors.hpp"

namespace difftest {

namespace {

// e^u - 1 - u without cancellation for small |u|.
double expm1_minus(double u) {
  if (std::abs(u) < 0.1) {
    double term = u * u / 2.0;
    double sum = term;
    for (int k = 3; k < 30; ++k) {
      term *= u / k;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::expm1(u) - u;
}

// log(1 + e) - e without cancellation for small |e|.
double log1p_minus(double e) {
  if (std::abs(e) < 0.1) {
    double power = e;
    double sum = 0.0;
    for (int k = 2; k < 60; ++k) {
      power *= -e;
      const double term = power / k;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::log1p(e) - e;
}

void require_positive(double x) {
  if (!(x > 0.0)) {
    std::ostringstream os;
    os << "phi function evaluated at non-positive argument " << x;
    throw NumericDomainError(os.str());
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

PhiFunction PhiFunction::akl() { return {PhiKind::AKL, 0.0, 1.0}; }

PhiFunction PhiFunction::power(double lambda) {
  if (!std::isfinite(lambda) || lambda == 0.0 || lambda == -1.0) {
    throw ConfigError("power divergence needs a finite lambda outside {-1, 0}, got " + format_number(lambda));
  }
  return {PhiKind::Power, lambda, 1.0};
}

PhiFunction PhiFunction::bs() { return {PhiKind::BS, 0.0, 1.0}; }

PhiFunction PhiFunction::log() { return {PhiKind::Log, 0.0, 1.0}; }

PhiFunction PhiFunction::parse(std::string_view name) {
  if (name == "akl") return akl();
  if (name == "bs") return bs();
  if (name == "bs:normalized") return bs().scaled(2.0);
  if (name == "log" || name == "gqlrt") return log();
  constexpr std::string_view prefix = "power:";
  if (name.substr(0, prefix.size()) == prefix) {
    const auto text = name.substr(prefix.size());
    double lambda = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), lambda);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw ConfigError("cannot parse lambda in phi name '" + std::string(name) + "'");
    }
    return power(lambda);
  }
  throw ConfigError("unknown phi function '" + std::string(name) + "' (expected akl, power:<lambda>, bs or log)");
}

PhiFunction PhiFunction::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("phi scale factor must be positive");
  return {kind_, lambda_, scale_ * c};
}

std::string PhiFunction::name() const {
  std::string base;
  switch (kind_) {
    case PhiKind::AKL: base = "akl"; break;
    case PhiKind::Power: base = "power:" + format_number(lambda_); break;
    case PhiKind::BS:
      if (scale_ == 2.0) return "bs:normalized";
      base = "bs";
      break;
    case PhiKind::Log: base = "log"; break;
  }
  if (scale_ != 1.0) return format_number(scale_) + "*" + base;
  return base;
}

std::string PhiFunction::label() const {
  std::string base;
  switch (kind_) {
    case PhiKind::AKL: base = "AKL"; break;
    case PhiKind::Power: base = "lambda=" + format_number(lambda_); break;
    case PhiKind::BS: base = scale_ == 2.0 ? "2BS" : "BS"; break;
    case PhiKind::Log: base = "GQLRT"; break;
  }
  if (scale_ != 1.0 && !(kind_ == PhiKind::BS && scale_ == 2.0)) return format_number(scale_) + "*" + base;
  return base;
}

double PhiFunction::eval_pair(double eps, double log_x) const {
  double v = 0.0;
  switch (kind_) {
    case PhiKind::AKL:
      // x log x - (x - 1) = (log x - eps) + eps log x
      v = log1p_minus(eps) + eps * log_x;
      break;
    case PhiKind::Power: {
      // x^{l+1} - x - l(x-1) = (e^u - 1 - u) + (l+1)(log x - eps), u = (l+1) log x
      const double lp1 = lambda_ + 1.0;
      const double u = lp1 * log_x;
      double num;
      if (std::abs(eps) < 0.1) {
        num = expm1_minus(u) + lp1 * log1p_minus(eps);
      } else {
        num = std::exp(u) - (1.0 + eps) - lambda_ * eps;
      }
      v = num / (lambda_ * lp1);
      break;
    }
    case PhiKind::BS: {
      const double r = eps / (2.0 + eps);
      v = r * r;
      break;
    }
    case PhiKind::Log:
      v = log_x;
      break;
  }
  return scale_ * v;
}

double PhiFunction::eval(double x) const {
  if (std::isnan(x)) throw NumericDomainError("phi function evaluated at NaN");
  require_positive(x);
  if (std::isinf(x)) return eval_log(std::numeric_limits<double>::infinity());
  return eval_pair(x - 1.0, std::log(x));
}

double PhiFunction::eval_log(double log_x) const {
  if (std::isnan(log_x)) throw NumericDomainError("phi function evaluated at NaN");
  if (kind_ == PhiKind::Log) return scale_ * log_x;
  if (std::abs(log_x) < 0.5) return eval_pair(std::expm1(log_x), log_x);
  const double x = std::exp(log_x);
  switch (kind_) {
    case PhiKind::AKL:
      if (std::isinf(x)) return std::numeric_limits<double>::infinity();
      return scale_ * (1.0 - x + x * log_x);
    case PhiKind::Power: {
      const double lp1 = lambda_ + 1.0;
      const double xp = std::exp(lp1 * log_x);
      if (std::isinf(xp) || std::isinf(x)) {
        // The dominant term decides the sign of the overflow.
        const double sign = (std::isinf(xp) ? 1.0 : -(1.0 + lambda_)) / (lambda_ * lp1);
        return sign > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      }
      return scale_ * (xp - x - lambda_ * (x - 1.0)) / (lambda_ * lp1);
    }
    case PhiKind::BS: {
      if (std::isinf(x)) return scale_;
      const double r = (x - 1.0) / (x + 1.0);
      return scale_ * r * r;
    }
    case PhiKind::Log: break;
  }
  return scale_ * log_x;
}

double PhiFunction::d1(double x) const {
  require_positive(x);
  switch (kind_) {
    case PhiKind::AKL: return scale_ * std::log(x);
    case PhiKind::Power: return scale_ * std::expm1(lambda_ * std::log(x)) / lambda_;
    case PhiKind::BS: return scale_ * 4.0 * (x - 1.0) / std::pow(x + 1.0, 3);
    case PhiKind::Log: return scale_ / x;
  }
  return 0.0;
}

double PhiFunction::d2(double x) const {
  require_positive(x);
  switch (kind_) {
    case PhiKind::AKL: return scale_ / x;
    case PhiKind::Power: return scale_ * std::exp((lambda_ - 1.0) * std::log(x));
    case PhiKind::BS: return scale_ * (16.0 - 8.0 * x) / std::pow(x + 1.0, 4);
    case PhiKind::Log: return -scale_ / (x * x);
  }
  return 0.0;
}

}  // namespace difftest
