#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hhcert/expression.hpp"
#include "hhcert/fracquad.hpp"

namespace hhcert::funcspace {

/// Finite-difference settings for mixed partials. Steps are
/// step_relative * (axis width) on each axis.
struct FDSpec {
  double step_relative = 1e-5;

  /// Throws DomainError unless 0 < step_relative < 1e-2.
  void validate() const;
};

struct Provenance {
  enum class Kind { Builtin, Parsed, Custom };
  Kind kind = Kind::Custom;
  std::string name;            // builtin name, or a label for custom functions
  std::vector<double> params;  // builtin parameters
  std::string source;          // expression source text when parsed

  /// "builtin:powersum:0.5", the parsed source, or "custom:<name>".
  std::string describe() const;
};

/// An evaluable f on a rectangle with an optional analytic d2f/dxdy.
class BivariateFunction {
 public:
  using Fn = std::function<double(double, double)>;

  BivariateFunction(Fn value, std::optional<Fn> mixed_partial, Provenance provenance);

  /// Parses an expression in x and y.
  static BivariateFunction parse(std::string_view src);

  /// Builtin registry:
  ///   product               x*y
  ///   quadratic             x^2 + y^2
  ///   biquadratic           x^2 * y^2
  ///   expsum                exp(x + y)
  ///   powersum  s           x^s + y^s            (x, y >= 0)
  ///   bilinear  c0 c1 c2 c3 c0 + c1 x + c2 y + c3 x y
  /// All builtins carry an analytic mixed partial.
  static BivariateFunction builtin(std::string_view name, std::span<const double> params = {});

  /// "builtin:name[:p1[:p2...]]" or an expression.
  static BivariateFunction from_spec(std::string_view spec);

  /// Evaluates f. Domain failures and non-finite values throw
  /// EvaluationError naming the point.
  double operator()(double x, double y) const;

  bool has_analytic_mixed_partial() const noexcept { return mixed_.has_value(); }
  /// Throws Error if no analytic mixed partial exists.
  double analytic_mixed_partial(double x, double y) const;

  const Provenance& provenance() const noexcept { return provenance_; }

  /// True for functions containing abs(): mixed partials near the kink are
  /// unreliable, so results are reported but should not be trusted blindly.
  bool nonsmooth_flag() const noexcept { return nonsmooth_; }

  /// Checks the analytic mixed partial against central differences at 100
  /// pseudo-random interior points of `rect`. Throws EvaluationError on a
  /// relative mismatch above 1e-5. No-op without an analytic partial.
  void validate_mixed_partial(const fracquad::Rectangle& rect, const FDSpec& fd = {}) const;

 private:
  Fn value_;
  std::optional<Fn> mixed_;
  Provenance provenance_;
  bool nonsmooth_ = false;
};

struct DerivativeEstimate {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Mixed partial d2f/dxdy at (x, y): analytic when available, otherwise the
/// 4-point central cross difference
///   [f(x+h,y+k) - f(x+h,y-k) - f(x-h,y+k) + f(x-h,y-k)] / (4hk).
/// Within one step of the rectangle's boundary the affected axis switches to
/// a second-order one-sided stencil so that f is only sampled inside `rect`.
/// Throws StepUnderflowError if a step rounds to zero at (x, y).
double mixed_partial(const BivariateFunction& f, double x, double y,
                     const fracquad::Rectangle& rect, const FDSpec& fd = {});

/// Finite-difference route only, with an error estimate from comparing steps
/// h and 2h plus a rounding term.
DerivativeEstimate mixed_partial_fd(const BivariateFunction& f, double x, double y,
                                    const fracquad::Rectangle& rect, const FDSpec& fd = {});

/// Like mixed_partial, with an error estimate (zero-free rounding bound when
/// analytic).
DerivativeEstimate mixed_partial_estimate(const BivariateFunction& f, double x, double y,
                                          const fracquad::Rectangle& rect,
                                          const FDSpec& fd = {});

/// The field |d2f/dxdy|^power on `rect`, as a function in its own right.
BivariateFunction abs_mixed_partial_field(const BivariateFunction& f,
                                          const fracquad::Rectangle& rect,
                                          double power = 1.0, const FDSpec& fd = {});

/// Names accepted by BivariateFunction::builtin.
std::vector<std::string> builtin_names();

}  // namespace hhcert::funcspace
