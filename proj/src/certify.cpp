#include "hhcert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "hhcert/errors.hpp"
#include "hhcert/special_functions.hpp"

namespace hhcert::certify {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

using Corner = fracquad::Corner;
using Side = fracquad::Side;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_theorem_domain(const Rectangle& rect) { rect.require_nonnegative_origin(); }

QuadResult scaled(const QuadResult& r, double factor) {
  return {r.value * factor, r.error_estimate * std::abs(factor)};
}

QuadResult product(const QuadResult& p, const QuadResult& q) {
  return {p.value * q.value,
          std::abs(p.value) * q.error_estimate + std::abs(q.value) * p.error_estimate +
              kEps * std::abs(p.value * q.value)};
}

using SegmentIntegrand = std::function<double(double t, double tc)>;

// int_0^1 t^(gamma-1) g(t, 1-t) dt, split at `breaks` so that kinks of a
// tabulated h fall on segment ends. The first segment keeps the power
// weight; the others are smooth.
QuadResult integrate_segments(const SegmentIntegrand& g, double gamma,
                              const std::vector<double>& breaks,
                              const QuadratureSpec& spec) {
  QuadResult total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i], hi = breaks[i + 1];
    const double width = hi - lo;
    const double far = 1.0 - hi;
    QuadResult piece;
    if (i == 0) {
      piece = fracquad::integrate_power_weighted(
          [&](double u, double uc) {
            const double t = hi * u;
            return g(t, far + width * uc);
          },
          gamma, spec);
      piece = scaled(piece, std::pow(hi, gamma));
    } else {
      piece = fracquad::integrate_power_weighted(
          [&](double u, double uc) {
            const double t = lo + width * u;
            return std::pow(t, gamma - 1.0) * g(t, far + width * uc);
          },
          1.0, spec);
      piece = scaled(piece, width);
    }
    total.value += piece.value;
    total.error_estimate += piece.error_estimate;
  }
  return total;
}

std::vector<double> breakpoints(const HWeight& h) {
  std::set<double> points{0.0, 1.0};
  for (const auto& [t, v] : h.knots()) {
    if (t > 0.0 && t < 1.0) {
      points.insert(t);
      points.insert(1.0 - t);
    }
  }
  return {points.begin(), points.end()};
}

void reject_divergent(const HWeight& h, const std::string& what) {
  if (h.family() == hweights::Family::GodunovaLevin) {
    throw DivergentMomentError(what + " diverges for godunova-levin h: h(t) = 1/t is not "
                               "integrable at t = 0");
  }
}

struct CornerValues {
  double ac, ad, bc, bd;
  double sum() const { return ac + ad + bc + bd; }
};

CornerValues corner_values(const BivariateFunction& f, const Rectangle& r) {
  return {f(r.a(), r.c()), f(r.a(), r.d()), f(r.b(), r.c()), f(r.b(), r.d())};
}

struct LeftSide {
  double value;
  double average;
  double a_term;
  double error;
};

// corner_average + middle_fractional_term - A
LeftSide left_side(const BivariateFunction& f, const FracOrder& order, const Rectangle& rect,
                   const QuadratureSpec& spec) {
  const double avg = corner_average(f, rect);
  const QuadResult mft = middle_fractional_term(f, order, rect, spec);
  const QuadResult a = a_term(f, order, rect, spec);
  const double value = avg + mft.value - a.value;
  const double rounding = 8.0 * kEps * (std::abs(avg) + std::abs(mft.value) + std::abs(a.value));
  return {value, avg, a.value, mft.error_estimate + a.error_estimate + rounding};
}

struct CornerDerivatives {
  std::array<double, 4> value;  // (a,c), (a,d), (b,c), (b,d)
  std::array<double, 4> error;
};

CornerDerivatives corner_derivatives(const BivariateFunction& f, const Rectangle& r,
                                     const FDSpec& fd) {
  f.validate_mixed_partial(r, fd);
  const std::array<std::pair<double, double>, 4> corners{
      {{r.a(), r.c()}, {r.a(), r.d()}, {r.b(), r.c()}, {r.b(), r.d()}}};
  CornerDerivatives out{};
  for (int i = 0; i < 4; ++i) {
    const auto e = funcspace::mixed_partial_estimate(f, corners[i].first, corners[i].second, r, fd);
    out.value[i] = std::abs(e.value);
    out.error[i] = e.error_estimate;
  }
  return out;
}

void derivative_notes(const BivariateFunction& f, std::vector<std::string>& notes) {
  if (!f.has_analytic_mixed_partial()) notes.emplace_back("mixed partial by finite differences");
  if (f.nonsmooth_flag()) {
    notes.emplace_back("f contains abs(): mixed partials near the kink are unreliable");
  }
}

BoundReport finish_bound(BoundReport report, double lhs_error, double rhs_error,
                         const CertifyOptions& options) {
  report.quadrature_error = lhs_error + rhs_error;
  report.slack = report.rhs - report.lhs_abs;
  report.tolerance = std::max(options.abs_tol, 10.0 * report.quadrature_error);
  report.pass = options.reverse ? report.slack <= report.tolerance
                                : report.slack >= -report.tolerance;
  if (options.reverse) report.notes.emplace_back("reversed pass direction");
  return report;
}

ChainReport finish_chain(ChainReport report, const CertifyOptions& options) {
  report.gap_lm = report.middle - report.left;
  report.gap_mr = report.right - report.middle;
  report.tolerance = std::max(options.abs_tol, 10.0 * report.quadrature_error);
  if (options.reverse) {
    report.pass = report.gap_lm <= report.tolerance && report.gap_mr <= report.tolerance;
    report.notes.emplace_back("reversed pass direction");
  } else {
    report.pass = report.gap_lm >= -report.tolerance && report.gap_mr >= -report.tolerance;
  }
  return report;
}

BoundReport trapezoid_from_weights(const BivariateFunction& f, const FracOrder& order,
                                   const Rectangle& rect, const std::array<QuadResult, 4>& w,
                                   const CertifyOptions& options) {
  require_theorem_domain(rect);
  const LeftSide lhs = left_side(f, order, rect, options.quadrature);
  const CornerDerivatives d = corner_derivatives(f, rect, options.fd);
  const double prefactor = rect.x().width() * rect.y().width() / 4.0;
  double sum = 0.0, err = 0.0;
  BoundReport report;
  for (int i = 0; i < 4; ++i) {
    sum += d.value[i] * w[i].value;
    err += d.value[i] * w[i].error_estimate + d.error[i] * w[i].value;
    report.corner_derivatives[i] = d.value[i];
    report.corner_weights[i] = w[i].value;
  }
  report.lhs_abs = std::abs(lhs.value);
  report.rhs = prefactor * sum;
  report.a_term = lhs.a_term;
  derivative_notes(f, report.notes);
  return finish_bound(std::move(report), lhs.error,
                      prefactor * err + 4.0 * kEps * std::abs(prefactor * sum), options);
}

BoundReport holder_from_weights(const BivariateFunction& f, const FracOrder& order,
                                const Rectangle& rect, const HolderExponents& pq,
                                const std::array<QuadResult, 4>& w, double outer_factor,
                                const CertifyOptions& options) {
  require_theorem_domain(rect);
  const LeftSide lhs = left_side(f, order, rect, options.quadrature);
  const CornerDerivatives d = corner_derivatives(f, rect, options.fd);
  const double p = pq.p, q = pq.q;
  const double prefactor = rect.x().width() * rect.y().width() /
                           std::pow((order.alpha() * p + 1.0) * (order.beta() * p + 1.0), 1.0 / p) *
                           outer_factor;
  double s = 0.0, ds = 0.0, s_err_only = 0.0;
  BoundReport report;
  for (int i = 0; i < 4; ++i) {
    const double dq = std::pow(d.value[i], q);
    s += dq * w[i].value;
    ds += q * std::pow(d.value[i], q - 1.0) * d.error[i] * w[i].value + dq * w[i].error_estimate;
    s_err_only += std::pow(d.error[i], q) * w[i].value;
    report.corner_derivatives[i] = d.value[i];
    report.corner_weights[i] = w[i].value;
  }
  const double root = std::pow(s, 1.0 / q);
  const double root_err = s > 0.0 ? root * ds / (q * s) : std::pow(s_err_only, 1.0 / q);
  report.lhs_abs = std::abs(lhs.value);
  report.rhs = prefactor * root;
  report.a_term = lhs.a_term;
  derivative_notes(f, report.notes);
  return finish_bound(std::move(report), lhs.error,
                      prefactor * root_err + 8.0 * kEps * std::abs(report.rhs), options);
}

}  // namespace

HolderExponents HolderExponents::from_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("Holder exponent p must be > 1");
  return {p, p / (p - 1.0)};
}

HolderExponents HolderExponents::from_q(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw DomainError("Holder exponent q must be > 1");
  return {q / (q - 1.0), q};
}

double corner_average(const BivariateFunction& f, const Rectangle& rect) {
  return corner_values(f, rect).sum() / 4.0;
}

QuadResult middle_fractional_term(const BivariateFunction& f, const FracOrder& order,
                                  const Rectangle& rect, const QuadratureSpec& spec) {
  require_theorem_domain(rect);
  const auto fn = [&f](double x, double y) { return f(x, y); };
  const struct {
    Corner corner;
    double x, y;
  } terms[] = {{Corner::APlusCPlus, rect.b(), rect.d()},
               {Corner::APlusDMinus, rect.b(), rect.c()},
               {Corner::BMinusCPlus, rect.a(), rect.d()},
               {Corner::BMinusDMinus, rect.a(), rect.c()}};
  QuadResult sum;
  for (const auto& t : terms) {
    const QuadResult r = fracquad::frac_integral_2d(fn, order, t.corner, rect, t.x, t.y, spec);
    sum.value += r.value;
    sum.error_estimate += r.error_estimate;
  }
  const double alpha = order.alpha(), beta = order.beta();
  const double scale = special::gamma(alpha + 1.0) * special::gamma(beta + 1.0) /
                       (4.0 * std::pow(rect.x().width(), alpha) * std::pow(rect.y().width(), beta));
  return scaled(sum, scale);
}

QuadResult a_term(const BivariateFunction& f, const FracOrder& order, const Rectangle& rect,
                  const QuadratureSpec& spec) {
  require_theorem_domain(rect);
  const double a = rect.a(), b = rect.b(), c = rect.c(), d = rect.d();
  const double alpha = order.alpha(), beta = order.beta();
  auto y_section = [&f](double x) { return [&f, x](double y) { return f(x, y); }; };
  auto x_section = [&f](double y) { return [&f, y](double x) { return f(x, y); }; };

  QuadResult ysum;
  for (const auto& [x, side, at] : {std::tuple{a, Side::Left, d}, std::tuple{b, Side::Left, d},
                                    std::tuple{a, Side::Right, c}, std::tuple{b, Side::Right, c}}) {
    const QuadResult r = fracquad::frac_integral_1d(y_section(x), beta, side, rect.y(), at, spec);
    ysum.value += r.value;
    ysum.error_estimate += r.error_estimate;
  }
  QuadResult xsum;
  for (const auto& [y, side, at] : {std::tuple{c, Side::Left, b}, std::tuple{d, Side::Left, b},
                                    std::tuple{c, Side::Right, a}, std::tuple{d, Side::Right, a}}) {
    const QuadResult r = fracquad::frac_integral_1d(x_section(y), alpha, side, rect.x(), at, spec);
    xsum.value += r.value;
    xsum.error_estimate += r.error_estimate;
  }
  const QuadResult ypart =
      scaled(ysum, special::gamma(beta + 1.0) / (4.0 * std::pow(rect.y().width(), beta)));
  const QuadResult xpart =
      scaled(xsum, special::gamma(alpha + 1.0) / (4.0 * std::pow(rect.x().width(), alpha)));
  return {ypart.value + xpart.value, ypart.error_estimate + xpart.error_estimate};
}

QuadResult h_moment(const HWeight& h, double gamma, const QuadratureSpec& spec) {
  if (!(gamma > 0.0)) throw DomainError("h-moment order must be > 0, got " + fmt(gamma));
  reject_divergent(h, "int_0^1 t^(gamma-1) (h(t) + h(1-t)) dt");
  return integrate_segments(
      [&h](double t, double tc) { return h.at_closed(t) + h.at_closed(tc); }, gamma,
      breakpoints(h), spec);
}

QuadResult h_kernel_moment(const HWeight& h, double gamma, bool mirrored,
                           const QuadratureSpec& spec) {
  if (!(gamma > 0.0)) throw DomainError("h-kernel moment order must be > 0, got " + fmt(gamma));
  reject_divergent(h, "int_0^1 (t^gamma + (1-t)^gamma) h(t) dt");
  return integrate_segments(
      [&h, gamma, mirrored](double t, double tc) {
        return (std::pow(t, gamma) + std::pow(tc, gamma)) * h.at_closed(mirrored ? tc : t);
      },
      1.0, breakpoints(h), spec);
}

QuadResult h_mean(const HWeight& h, bool mirrored, const QuadratureSpec& spec) {
  reject_divergent(h, "int_0^1 h(t) dt");
  return integrate_segments(
      [&h, mirrored](double t, double tc) { return h.at_closed(mirrored ? tc : t); }, 1.0,
      breakpoints(h), spec);
}

double power_h_moment_closed_form(double gamma, double s) {
  if (!(gamma > 0.0) || !(s > 0.0 && s <= 1.0)) {
    throw DomainError("closed-form moment requires gamma > 0 and 0 < s <= 1");
  }
  return 1.0 / (gamma + s) + special::beta(gamma, s + 1.0);
}

double power_h_kernel_moment_closed_form(double gamma, double s) {
  if (!(gamma > 0.0) || !(s > 0.0 && s <= 1.0)) {
    throw DomainError("closed-form moment requires gamma > 0 and 0 < s <= 1");
  }
  return 1.0 / (gamma + s + 1.0) + special::beta(s + 1.0, gamma + 1.0);
}

double power_h_mean_square_closed_form(double s) {
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("closed-form moment requires 0 < s <= 1");
  return 1.0 / ((s + 1.0) * (s + 1.0));
}

std::array<QuadResult, 4> trapezoid_corner_weights(const HWeight& h, const FracOrder& order,
                                                   const QuadratureSpec& spec) {
  const QuadResult kx = h_kernel_moment(h, order.alpha(), false, spec);
  const QuadResult kx_m = h_kernel_moment(h, order.alpha(), true, spec);
  const QuadResult ky = h_kernel_moment(h, order.beta(), false, spec);
  const QuadResult ky_m = h_kernel_moment(h, order.beta(), true, spec);
  return {product(kx, ky), product(kx, ky_m), product(kx_m, ky), product(kx_m, ky_m)};
}

std::array<QuadResult, 4> holder_corner_weights(const HWeight& h, const QuadratureSpec& spec) {
  const QuadResult m = h_mean(h, false, spec);
  const QuadResult m_mirror = h_mean(h, true, spec);
  return {product(m, m), product(m, m_mirror), product(m_mirror, m), product(m_mirror, m_mirror)};
}

ChainReport hadamard_chain(const BivariateFunction& f, const HWeight& h, const FracOrder& order,
                           const Rectangle& rect, const CertifyOptions& options) {
  require_theorem_domain(rect);
  const double h_half = h(0.5);
  const double h2 = h_half * h_half;
  const QuadResult mft = middle_fractional_term(f, order, rect, options.quadrature);
  const QuadResult m_alpha = h_moment(h, order.alpha(), options.quadrature);
  const QuadResult m_beta = h_moment(h, order.beta(), options.quadrature);
  const QuadResult moments = product(m_alpha, m_beta);
  const double corner_sum = corner_values(f, rect).sum();
  const double factor = h2 * order.alpha() * order.beta() * corner_sum;

  ChainReport report;
  report.left = f(0.5 * (rect.a() + rect.b()), 0.5 * (rect.c() + rect.d()));
  report.middle = 4.0 * h2 * mft.value;
  report.right = factor * moments.value;
  report.quadrature_error = 4.0 * h2 * mft.error_estimate +
                            std::abs(factor) * moments.error_estimate +
                            4.0 * kEps * (std::abs(report.middle) + std::abs(report.right));
  report.notes.emplace_back("right member uses weight t^(alpha-1) k^(beta-1)");
  return finish_chain(std::move(report), options);
}

ChainReport hadamard_chain_convex(const BivariateFunction& f, const FracOrder& order,
                                  const Rectangle& rect, const CertifyOptions& options) {
  require_theorem_domain(rect);
  const QuadResult mft = middle_fractional_term(f, order, rect, options.quadrature);
  ChainReport report;
  report.left = f(0.5 * (rect.a() + rect.b()), 0.5 * (rect.c() + rect.d()));
  report.middle = mft.value;
  report.right = corner_average(f, rect);
  report.quadrature_error =
      mft.error_estimate + 4.0 * kEps * (std::abs(report.middle) + std::abs(report.right));
  return finish_chain(std::move(report), options);
}

BoundReport trapezoid_bound(const BivariateFunction& f, const HWeight& h, const FracOrder& order,
                            const Rectangle& rect, const CertifyOptions& options) {
  return trapezoid_from_weights(f, order, rect,
                                trapezoid_corner_weights(h, order, options.quadrature), options);
}

BoundReport holder_bound(const BivariateFunction& f, const HWeight& h, const FracOrder& order,
                         const Rectangle& rect, const HolderExponents& pq,
                         const CertifyOptions& options) {
  return holder_from_weights(f, order, rect, pq, holder_corner_weights(h, options.quadrature),
                             1.0, options);
}

BoundReport trapezoid_bound_convex(const BivariateFunction& f, const FracOrder& order,
                                   const Rectangle& rect, const CertifyOptions& options) {
  const double w = 1.0 / ((order.alpha() + 1.0) * (order.beta() + 1.0));
  const QuadResult exact{w, 0.0};
  return trapezoid_from_weights(f, order, rect, {exact, exact, exact, exact}, options);
}

BoundReport holder_bound_convex(const BivariateFunction& f, const FracOrder& order,
                                const Rectangle& rect, const HolderExponents& pq,
                                const CertifyOptions& options) {
  const QuadResult one{1.0, 0.0};
  return holder_from_weights(f, order, rect, pq, {one, one, one, one},
                             std::pow(0.25, 1.0 / pq.q), options);
}

LemmaReport identity_residual(const BivariateFunction& f, const FracOrder& order,
                              const Rectangle& rect, const CertifyOptions& options) {
  require_theorem_domain(rect);
  f.validate_mixed_partial(rect, options.fd);
  const LeftSide lhs = left_side(f, order, rect, options.quadrature);
  const double a = rect.a(), b = rect.b(), c = rect.c(), d = rect.d();
  const double alpha = order.alpha(), beta = order.beta();
  const double prefactor = rect.x().width() * rect.y().width() / 4.0;

  auto point = [&](double u, double uc, double v, double vc) {
    return std::pair{std::clamp(u * a + uc * b, a, b), std::clamp(v * c + vc * d, c, d)};
  };
  auto kernel = [alpha, beta](double u, double uc, double v, double vc) {
    return (std::pow(u, alpha) - std::pow(uc, alpha)) * (std::pow(v, beta) - std::pow(vc, beta));
  };

  QuadratureSpec spec = options.quadrature;
  double fd_error = 0.0;
  if (!f.has_analytic_mixed_partial()) {
    // Finite-difference error of the integrand, summed on the finest rule.
    // Rounding noise of the stencil also separates the two refinement
    // levels, so the convergence threshold is widened to that level.
    const auto rule = fracquad::unit_rule(spec.scheme, 2 * spec.nodes_per_axis);
    double magnitude = 0.0;
    for (const auto& nu : rule) {
      for (const auto& nv : rule) {
        const auto [x, y] = point(nu.u, nu.uc, nv.u, nv.uc);
        const auto e = funcspace::mixed_partial_fd(f, x, y, rect, options.fd);
        const double w = nu.weight * nv.weight * std::abs(kernel(nu.u, nu.uc, nv.u, nv.uc));
        fd_error += w * e.error_estimate;
        magnitude += w * std::abs(e.value);
      }
    }
    if (magnitude > 0.0) spec.target_rel_tol = std::max(spec.target_rel_tol, fd_error / magnitude);
  }

  const QuadResult integral = fracquad::integrate_power_weighted_2d(
      [&](double u, double uc, double v, double vc) {
        const auto [x, y] = point(u, uc, v, vc);
        return kernel(u, uc, v, vc) * funcspace::mixed_partial(f, x, y, rect, options.fd);
      },
      1.0, 1.0, spec);

  LemmaReport report;
  derivative_notes(f, report.notes);
  report.notes.emplace_back("right side uses the product kernel (t^alpha-(1-t)^alpha)(k^beta-(1-k)^beta)");
  report.lhs = lhs.value;
  report.rhs = prefactor * integral.value;
  report.residual = std::abs(report.lhs - report.rhs);
  report.quadrature_error = lhs.error + prefactor * (integral.error_estimate + fd_error) +
                            4.0 * kEps * std::abs(report.rhs);
  report.pass = report.residual <= 10.0 * report.quadrature_error;
  return report;
}

}  // namespace hhcert::certify
