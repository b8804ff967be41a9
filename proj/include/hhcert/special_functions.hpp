#pragma once

namespace hhcert::special {

/// A special-function value together with a bound on its absolute error.
struct SpecialValue {
  double value = 0.0;
  double abs_error_estimate = 0.0;
};

/// Largest argument for which Gamma is representable as a double.
inline constexpr double kGammaMaxArgument = 171.62437695630272;

/// Gamma function for x > 0.
///
/// Lanczos approximation with g = 607/128 and the 15-term coefficient set of
/// P. Godfrey (the set used by Numerical Recipes, 3rd ed.). Integer arguments
/// up to 170 return the exactly rounded factorial. Relative error is below
/// 1e-13 on (0, 170].
///
/// Throws DomainError for x <= 0 or NaN, OverflowError for x beyond
/// kGammaMaxArgument.
double gamma(double x);

/// Natural logarithm of Gamma for x > 0; never overflows for finite x.
double log_gamma(double x);

/// Beta function B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y) for x, y > 0.
///
/// Uses the direct Gamma ratio while Gamma(x + y) is representable and
/// log-space otherwise. The result is exactly symmetric in its arguments.
double beta(double x, double y);

SpecialValue gamma_value(double x);
SpecialValue beta_value(double x, double y);

}  // namespace hhcert::special
