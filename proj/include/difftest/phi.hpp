#pragma once

#include <string>
#include <string_view>

namespace difftest {

enum class PhiKind { AKL, Power, BS, Log };

/// A member of the phi test family, or the Log function that turns the
/// phi-statistic into the generalised quasi-likelihood ratio.
///
///   AKL    phi(x) = 1 - x + x log x
///   Power  phi(x) = (x^{l+1} - x - l (x - 1)) / (l (l + 1)),  l != -1, 0
///   BS     phi(x) = ((x - 1) / (x + 1))^2   (phi''(1) = 1/2; not convex for x > 2)
///   Log    phi(x) = log x                    (not a family member)
///
/// Every value carries a positive scale factor c, so c * phi is
/// representable; BS with c = 2 has phi''(1) = 1.
class PhiFunction {
 public:
  static PhiFunction akl();
  static PhiFunction power(double lambda);
  static PhiFunction bs();
  static PhiFunction log();

  /// Parses `akl`, `power:<lambda>`, `bs`, `bs:normalized` (2 * BS) or `log`.
  static PhiFunction parse(std::string_view name);

  PhiFunction scaled(double c) const;

  PhiKind kind() const noexcept { return kind_; }
  double lambda() const noexcept { return lambda_; }
  double scale() const noexcept { return scale_; }

  /// Convex with phi(1) = phi'(1) = 0.
  bool is_family_member() const noexcept { return kind_ != PhiKind::Log; }

  /// Round-trips through parse() for unit scale (and 2 * BS).
  std::string name() const;
  /// Column label used in power tables: AKL, GQLRT, BS, lambda=<l>.
  std::string label() const;

  /// phi(x); throws NumericDomainError for x <= 0 or NaN. Overflow in the
  /// power kind returns +-infinity.
  double eval(double x) const;
  double d1(double x) const;
  double d2(double x) const;

  /// phi(exp(log_x)), evaluated without forming exp(log_x) where that
  /// would lose accuracy or overflow.
  double eval_log(double log_x) const;

  friend bool operator==(const PhiFunction&, const PhiFunction&) = default;

 private:
  PhiFunction(PhiKind kind, double lambda, double scale) : kind_(kind), lambda_(lambda), scale_(scale) {}

  // phi at x = 1 + eps with log_x = log1p(eps); both are supplied so that
  // neither has to be recomputed from the other.
  double eval_pair(double eps, double log_x) const;

  PhiKind kind_;
  double lambda_;
  double scale_;
};

/// phi_eval as a free function.
inline double phi_eval(const PhiFunction& phi, double x) { return phi.eval(x); }

}  // namespace difftest
