#pragma once

// Riemann-Liouville fractional integrals in one and two variables.
//
// Every integral is reduced to the unit interval with the substitution that
// absorbs the weakly singular kernel,
//
//   int_a^x (x - t)^(alpha - 1) f(t) dt
//       = (x - a)^alpha / alpha * int_0^1 f(x - (x - a) w^(1/alpha)) dw,
//
// and the smooth remaining integral is evaluated by a unit-interval rule at
// two refinement levels (n and 2n nodes). The reported error estimate is the
// disagreement between the levels plus a rounding floor.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace hhcert::fracquad {

class Interval {
 public:
  /// Throws DomainError unless lo < hi and both are finite.
  Interval(double lo, double hi);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }
  bool contains(double v) const noexcept { return v >= lo_ && v <= hi_; }

 private:
  double lo_;
  double hi_;
};

/// The domain [a,b] x [c,d].
class Rectangle {
 public:
  Rectangle(Interval x, Interval y) : x_(x), y_(y) {}
  Rectangle(double a, double b, double c, double d) : x_(a, b), y_(c, d) {}

  const Interval& x() const noexcept { return x_; }
  const Interval& y() const noexcept { return y_; }
  double a() const noexcept { return x_.lo(); }
  double b() const noexcept { return x_.hi(); }
  double c() const noexcept { return y_.lo(); }
  double d() const noexcept { return y_.hi(); }
  bool contains(double px, double py) const noexcept {
    return x_.contains(px) && y_.contains(py);
  }

  /// Throws DomainError unless 0 <= a and 0 <= c.
  void require_nonnegative_origin() const;

 private:
  Interval x_;
  Interval y_;
};

/// Pair of fractional orders (alpha, beta), both > 0.
class FracOrder {
 public:
  FracOrder(double alpha, double beta);
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

 private:
  double alpha_;
  double beta_;
};

enum class Scheme {
  /// Desingularizing substitution followed by n-point Gauss-Legendre.
  GaussLegendreDesingularized,
  /// Desingularizing substitution followed by a composite trapezoid rule on a
  /// double-exponentially graded mesh (tanh-sinh). Also resolves algebraic
  /// endpoint behaviour that the substitution leaves behind, e.g. w^(1/alpha)
  /// for alpha > 1 or f(t) = t^s at t = a.
  GradedComposite,
};

std::string_view to_string(Scheme scheme);
/// Accepts "gauss-legendre-desingularized" and "graded-composite".
Scheme parse_scheme(std::string_view text);

struct QuadratureSpec {
  int nodes_per_axis = 64;
  Scheme scheme = Scheme::GradedComposite;
  double target_rel_tol = 1e-9;

  /// Throws DomainError if nodes_per_axis < 2 or target_rel_tol <= 0.
  void validate() const;
};

enum class Side { Left, Right };

enum class Corner { APlusCPlus, APlusDMinus, BMinusCPlus, BMinusDMinus };

std::string_view to_string(Side side);
std::string_view to_string(Corner corner);
Side parse_side(std::string_view text);
/// Accepts "a+c+", "a+d-", "b-c+", "b-d-".
Corner parse_corner(std::string_view text);

struct QuadResult {
  double value = 0.0;
  /// |I_n - I_2n| plus a rounding floor; always > 0 for non-zero integrands.
  double error_estimate = 0.0;
};

/// A node of a unit-interval rule; `uc` is 1 - u computed without cancellation.
struct UnitNode {
  double u;
  double uc;
  double weight;
};

/// Unit-interval rule with `n` nodes for the given scheme.
std::vector<UnitNode> unit_rule(Scheme scheme, int n);

using UnitIntegrand = std::function<double(double u, double uc)>;
using UnitIntegrand2d =
    std::function<double(double u, double uc, double v, double vc)>;

/// int_0^1 u^(order-1) g(u, 1-u) du for order > 0.
///
/// Throws NonConvergenceError when the two refinement levels disagree by more
/// than 100 * target_rel_tol relative to the integral of |u^(order-1) g|.
QuadResult integrate_power_weighted(const UnitIntegrand& g, double order,
                                    const QuadratureSpec& spec);

/// int_0^1 int_0^1 u^(ou-1) v^(ov-1) g(u, 1-u, v, 1-v) dv du.
QuadResult integrate_power_weighted_2d(const UnitIntegrand2d& g, double order_u,
                                       double order_v, const QuadratureSpec& spec);

using UnivariateFn = std::function<double(double)>;
using BivariateFn = std::function<double(double, double)>;

/// Left (J_{lo+}) or right (J_{hi-}) Riemann-Liouville integral of `f` at `at`.
///
/// Requires at in (lo, hi] for Left and [lo, hi) for Right. Throws
/// DomainError outside that range and EvaluationError on non-finite samples.
QuadResult frac_integral_1d(const UnivariateFn& f, double order, Side side,
                            const Interval& interval, double at,
                            const QuadratureSpec& spec = {});

/// One of the four corner operators J^{alpha,beta} evaluated at (x, y).
QuadResult frac_integral_2d(const BivariateFn& f, const FracOrder& order,
                            Corner corner, const Rectangle& rect, double x,
                            double y, const QuadratureSpec& spec = {});

}  // namespace hhcert::fracquad
