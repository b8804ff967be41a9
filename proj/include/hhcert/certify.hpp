#pragma once

// Fractional Hermite-Hadamard quantities on a rectangle [a,b] x [c,d] with
// 0 <= a, 0 <= c: the four-corner fractional mean, the boundary correction
// A, the Hadamard-type chains, the trapezoid-type and Holder-type bounds,
// and the residual of the underlying integral identity.

#include <array>
#include <string>
#include <vector>

#include "hhcert/bivariate.hpp"
#include "hhcert/fracquad.hpp"
#include "hhcert/hweights.hpp"

namespace hhcert::certify {

using fracquad::FracOrder;
using fracquad::QuadResult;
using fracquad::QuadratureSpec;
using fracquad::Rectangle;
using funcspace::BivariateFunction;
using funcspace::FDSpec;
using hweights::HWeight;

struct CertifyOptions {
  QuadratureSpec quadrature{};
  FDSpec fd{};
  /// Absolute floor of the pass tolerance; the tolerance actually used is
  /// max(abs_tol, 10 * quadrature_error).
  double abs_tol = 1e-8;
  /// Swap the pass direction (h-concave reading).
  bool reverse = false;
};

struct HolderExponents {
  double p;
  double q;
  /// q = p / (p - 1); requires p > 1.
  static HolderExponents from_p(double p);
  static HolderExponents from_q(double q);
};

struct ChainReport {
  double left = 0.0;
  double middle = 0.0;
  double right = 0.0;
  double gap_lm = 0.0;  // middle - left
  double gap_mr = 0.0;  // right - middle
  bool pass = false;
  double quadrature_error = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> notes;
};

/// Corners are listed in the order (a,c), (a,d), (b,c), (b,d).
struct BoundReport {
  double lhs_abs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs_abs
  bool pass = false;
  double a_term = 0.0;
  double quadrature_error = 0.0;
  double tolerance = 0.0;
  std::array<double, 4> corner_derivatives{};  // |d2f/dxdy| at the corners
  std::array<double, 4> corner_weights{};      // h-weight integral per corner
  std::vector<std::string> notes;
};

struct LemmaReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // |lhs - rhs|
  double quadrature_error = 0.0;
  bool pass = false;  // residual <= 10 * quadrature_error
  std::vector<std::string> notes;
};

/// (f(a,c) + f(a,d) + f(b,c) + f(b,d)) / 4.
double corner_average(const BivariateFunction& f, const Rectangle& rect);

/// Gamma(alpha+1) Gamma(beta+1) / (4 (b-a)^alpha (d-c)^beta) times
///   J_{a+,c+} f(b,d) + J_{a+,d-} f(b,c) + J_{b-,c+} f(a,d) + J_{b-,d-} f(a,c).
QuadResult middle_fractional_term(const BivariateFunction& f, const FracOrder& order,
                                  const Rectangle& rect, const QuadratureSpec& spec = {});

/// Boundary correction built from eight one-variable fractional integrals
/// of the sections f(a,.), f(b,.), f(.,c), f(.,d):
///   Gamma(beta+1)/(4(d-c)^beta) [J_{c+} f(a,d) + J_{c+} f(b,d) + J_{d-} f(a,c) + J_{d-} f(b,c)]
/// + Gamma(alpha+1)/(4(b-a)^alpha) [J_{a+} f(b,c) + J_{a+} f(b,d) + J_{b-} f(a,c) + J_{b-} f(a,d)].
QuadResult a_term(const BivariateFunction& f, const FracOrder& order, const Rectangle& rect,
                  const QuadratureSpec& spec = {});

/// M(h, gamma) = int_0^1 t^(gamma-1) (h(t) + h(1-t)) dt by quadrature.
/// Throws DivergentMomentError for godunova-levin h.
QuadResult h_moment(const HWeight& h, double gamma, const QuadratureSpec& spec = {});

/// int_0^1 (t^gamma + (1-t)^gamma) h(t) dt, with h(1-t) when mirrored.
QuadResult h_kernel_moment(const HWeight& h, double gamma, bool mirrored,
                           const QuadratureSpec& spec = {});

/// int_0^1 h(t) dt, or int_0^1 h(1-t) dt when mirrored.
QuadResult h_mean(const HWeight& h, bool mirrored, const QuadratureSpec& spec = {});

/// Closed forms for h(t) = t^s:
///   1/(gamma+s) + B(gamma, s+1)       for h_moment
///   1/(gamma+s+1) + B(s+1, gamma+1)   for h_kernel_moment
///   1/(s+1)^2                         for the product of two h_means
double power_h_moment_closed_form(double gamma, double s);
double power_h_kernel_moment_closed_form(double gamma, double s);
double power_h_mean_square_closed_form(double s);

/// Per-corner weights of the trapezoid-type bound, each a product of two
/// h_kernel_moment values (x factor uses alpha, y factor uses beta; the
/// mirrored moment belongs to the far end of each axis).
std::array<QuadResult, 4> trapezoid_corner_weights(const HWeight& h, const FracOrder& order,
                                                   const QuadratureSpec& spec = {});

/// Per-corner weights of the Holder-type bound, each a product of two
/// h_mean values.
std::array<QuadResult, 4> holder_corner_weights(const HWeight& h,
                                                const QuadratureSpec& spec = {});

/// Hadamard-type chain for coordinate h-convex f:
///   left   = f((a+b)/2, (c+d)/2)
///   middle = 4 h(1/2)^2 middle_fractional_term
///   right  = h(1/2)^2 alpha beta (sum of corner values) M(h,alpha) M(h,beta)
ChainReport hadamard_chain(const BivariateFunction& f, const HWeight& h,
                           const FracOrder& order, const Rectangle& rect,
                           const CertifyOptions& options = {});

/// Convex case: left = midpoint value, middle = middle_fractional_term,
/// right = corner_average. Computed without any h-moment.
ChainReport hadamard_chain_convex(const BivariateFunction& f, const FracOrder& order,
                                  const Rectangle& rect, const CertifyOptions& options = {});

/// |corner_average + middle_fractional_term - A| against
///   (b-a)(d-c)/4 * sum over corners |d2f/dxdy| * weight.
BoundReport trapezoid_bound(const BivariateFunction& f, const HWeight& h,
                            const FracOrder& order, const Rectangle& rect,
                            const CertifyOptions& options = {});

/// Same left side against
///   (b-a)(d-c) / [(alpha p + 1)(beta p + 1)]^(1/p)
///     * (sum over corners |d2f/dxdy|^q * weight)^(1/q).
BoundReport holder_bound(const BivariateFunction& f, const HWeight& h, const FracOrder& order,
                         const Rectangle& rect, const HolderExponents& pq,
                         const CertifyOptions& options = {});

/// Convex closed forms: weight 1/((alpha+1)(beta+1)) per corner, and
/// (1/4)^(1/q) outside the corner sum.
BoundReport trapezoid_bound_convex(const BivariateFunction& f, const FracOrder& order,
                                   const Rectangle& rect, const CertifyOptions& options = {});
BoundReport holder_bound_convex(const BivariateFunction& f, const FracOrder& order,
                                const Rectangle& rect, const HolderExponents& pq,
                                const CertifyOptions& options = {});

/// Both sides of
///   corner_average + middle_fractional_term - A
///     = (b-a)(d-c)/4 int int (t^alpha - (1-t)^alpha)(k^beta - (1-k)^beta)
///                       d2f/dxdy(t a + (1-t) b, k c + (1-k) d) dk dt.
LemmaReport identity_residual(const BivariateFunction& f, const FracOrder& order,
                              const Rectangle& rect, const CertifyOptions& options = {});

}  // namespace hhcert::certify
