#include "hhcert/fracquad.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hhcert/errors.hpp"
#include "hhcert/special_functions.hpp"

namespace hhcert::fracquad {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Half-width of the tanh-sinh parameter range. At s = 4 the distance of the
// outermost node to the endpoint is ~5e-38, so tail truncation is negligible
// even for integrable endpoint singularities.
constexpr double kGradedHalfRange = 4.0;
constexpr double kRoundingFloorFactor = 16.0;
constexpr double kNonConvergenceFactor = 100.0;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<UnitNode> gauss_legendre_rule(int n) {
  std::vector<UnitNode> nodes(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      derivative = n * (z * p1 - p2) / (z * z - 1.0);
      const double previous = z;
      z = previous - p1 / derivative;
      if (std::abs(z - previous) <= 1e-16) break;
    }
    const double w = 1.0 / ((1.0 - z * z) * derivative * derivative);  // w/2 on [0,1]
    // z > 0 here; the node pair is (1 -/+ z)/2 on the unit interval.
    nodes[static_cast<std::size_t>(i)] = {(1.0 - z) / 2.0, (1.0 + z) / 2.0, w};
    nodes[static_cast<std::size_t>(n - 1 - i)] = {(1.0 + z) / 2.0, (1.0 - z) / 2.0, w};
  }
  return nodes;
}

std::vector<UnitNode> graded_rule(int n) {
  std::vector<UnitNode> nodes;
  nodes.reserve(static_cast<std::size_t>(n));
  const double h = 2.0 * kGradedHalfRange / n;
  const double half_pi = std::numbers::pi / 2.0;
  for (int k = 0; k < n; ++k) {
    const double s = (k - (n - 1) / 2.0) * h;
    const double q = half_pi * std::sinh(s);
    const double u = 1.0 / (1.0 + std::exp(-2.0 * q));
    const double uc = 1.0 / (1.0 + std::exp(2.0 * q));
    nodes.push_back({u, uc, h * half_pi * std::cosh(s) * 2.0 * u * uc});
  }
  return nodes;
}

// Unit rule in w followed by u = w^(1/order); the weight absorbs 1/order.
std::vector<UnitNode> power_weighted_nodes(Scheme scheme, int n, double order) {
  std::vector<UnitNode> nodes = unit_rule(scheme, n);
  if (order == 1.0) return nodes;
  for (UnitNode& node : nodes) {
    const double log_w = node.u < 0.5 ? std::log(node.u) : std::log1p(-node.uc);
    const double e = log_w / order;
    node.u = std::exp(e);
    node.uc = -std::expm1(e);
    node.weight /= order;
  }
  return nodes;
}

struct LevelSum {
  double value = 0.0;
  double l1 = 0.0;
};

QuadResult combine_levels(const LevelSum& coarse, const LevelSum& fine,
                          const QuadratureSpec& spec, const char* what) {
  const double disagreement = std::abs(fine.value - coarse.value);
  if (!std::isfinite(fine.value) || !std::isfinite(coarse.value)) {
    throw NonConvergenceError(std::string(what) + ": non-finite quadrature sum",
                              std::numeric_limits<double>::infinity());
  }
  if (disagreement > kNonConvergenceFactor * spec.target_rel_tol * fine.l1) {
    throw NonConvergenceError(
        std::string(what) + ": refinement levels disagree by " +
            format_double(disagreement) + " (integral of |integrand| " +
            format_double(fine.l1) + ")",
        disagreement);
  }
  return {fine.value, disagreement + kRoundingFloorFactor * kEps * fine.l1};
}

LevelSum sum_1d(const UnitIntegrand& g, const std::vector<UnitNode>& nodes) {
  LevelSum s;
  for (const UnitNode& node : nodes) {
    const double term = node.weight * g(node.u, node.uc);
    s.value += term;
    s.l1 += std::abs(term);
  }
  return s;
}

LevelSum sum_2d(const UnitIntegrand2d& g, const std::vector<UnitNode>& nu,
                const std::vector<UnitNode>& nv) {
  LevelSum s;
  for (const UnitNode& a : nu) {
    double row = 0.0;
    double row_l1 = 0.0;
    for (const UnitNode& b : nv) {
      const double term = b.weight * g(a.u, a.uc, b.u, b.uc);
      row += term;
      row_l1 += std::abs(term);
    }
    s.value += a.weight * row;
    s.l1 += a.weight * row_l1;
  }
  return s;
}

// Maps u in (0,1) onto the integration range of one axis: toward `lo` for a
// left-sided operator, toward `hi` for a right-sided one.
struct AxisMap {
  Side side;
  double at;
  double span;
  double far_end;

  static AxisMap make(Side side, const Interval& iv, double at, const char* axis) {
    if (side == Side::Left) {
      if (!(at > iv.lo() && at <= iv.hi())) {
        throw DomainError(std::string("left-sided integral along ") + axis +
                          " requires evaluation point in (" +
                          format_double(iv.lo()) + ", " + format_double(iv.hi()) +
                          "], got " + format_double(at));
      }
      return {side, at, at - iv.lo(), iv.lo()};
    }
    if (!(at >= iv.lo() && at < iv.hi())) {
      throw DomainError(std::string("right-sided integral along ") + axis +
                        " requires evaluation point in [" + format_double(iv.lo()) +
                        ", " + format_double(iv.hi()) + "), got " + format_double(at));
    }
    return {side, at, iv.hi() - at, iv.hi()};
  }

  double point(double u, double uc) const {
    if (side == Side::Left) {
      return u <= 0.5 ? at - span * u : far_end + span * uc;
    }
    return u <= 0.5 ? at + span * u : far_end - span * uc;
  }
};

double checked_value(double v, double t) {
  if (!std::isfinite(v)) {
    throw EvaluationError("non-finite function value " + format_double(v) +
                          " at t = " + format_double(t));
  }
  return v;
}

double checked_value(double v, double x, double y) {
  if (!std::isfinite(v)) {
    throw EvaluationError("non-finite function value " + format_double(v) +
                          " at (x, y) = (" + format_double(x) + ", " +
                          format_double(y) + ")");
  }
  return v;
}

void require_order(double order, const char* name) {
  if (!(order > 0.0) || !std::isfinite(order)) {
    throw DomainError(std::string(name) + " must be a finite value > 0, got " +
                      format_double(order));
  }
}

}  // namespace

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw DomainError("interval requires finite lo < hi, got [" +
                      format_double(lo) + ", " + format_double(hi) + "]");
  }
}

void Rectangle::require_nonnegative_origin() const {
  if (a() < 0.0 || c() < 0.0) {
    throw DomainError("rectangle must satisfy 0 <= a and 0 <= c, got a = " +
                      format_double(a()) + ", c = " + format_double(c()));
  }
}

FracOrder::FracOrder(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  require_order(alpha, "alpha");
  require_order(beta, "beta");
}

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::GaussLegendreDesingularized ? "gauss-legendre-desingularized"
                                                       : "graded-composite";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "gauss-legendre-desingularized") return Scheme::GaussLegendreDesingularized;
  if (text == "graded-composite") return Scheme::GradedComposite;
  throw DomainError("unknown quadrature scheme '" + std::string(text) + "'");
}

void QuadratureSpec::validate() const {
  if (nodes_per_axis < 2) {
    throw DomainError("nodes_per_axis must be >= 2, got " + std::to_string(nodes_per_axis));
  }
  if (!(target_rel_tol > 0.0) || !std::isfinite(target_rel_tol)) {
    throw DomainError("target_rel_tol must be > 0, got " + format_double(target_rel_tol));
  }
}

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::string_view to_string(Corner corner) {
  switch (corner) {
    case Corner::APlusCPlus: return "a+c+";
    case Corner::APlusDMinus: return "a+d-";
    case Corner::BMinusCPlus: return "b-c+";
    case Corner::BMinusDMinus: return "b-d-";
  }
  return "?";
}

Side parse_side(std::string_view text) {
  if (text == "left" || text == "a+") return Side::Left;
  if (text == "right" || text == "b-") return Side::Right;
  throw DomainError("unknown side '" + std::string(text) + "' (expected left or right)");
}

Corner parse_corner(std::string_view text) {
  if (text == "a+c+") return Corner::APlusCPlus;
  if (text == "a+d-") return Corner::APlusDMinus;
  if (text == "b-c+") return Corner::BMinusCPlus;
  if (text == "b-d-") return Corner::BMinusDMinus;
  throw DomainError("unknown corner '" + std::string(text) +
                    "' (expected a+c+, a+d-, b-c+ or b-d-)");
}

std::vector<UnitNode> unit_rule(Scheme scheme, int n) {
  if (n < 1) throw DomainError("unit rule needs at least one node");
  return scheme == Scheme::GaussLegendreDesingularized ? gauss_legendre_rule(n)
                                                        : graded_rule(n);
}

QuadResult integrate_power_weighted(const UnitIntegrand& g, double order,
                                    const QuadratureSpec& spec) {
  spec.validate();
  require_order(order, "order");
  const int n = spec.nodes_per_axis;
  const LevelSum coarse = sum_1d(g, power_weighted_nodes(spec.scheme, n, order));
  const LevelSum fine = sum_1d(g, power_weighted_nodes(spec.scheme, 2 * n, order));
  return combine_levels(coarse, fine, spec, "1d quadrature");
}

QuadResult integrate_power_weighted_2d(const UnitIntegrand2d& g, double order_u,
                                       double order_v, const QuadratureSpec& spec) {
  spec.validate();
  require_order(order_u, "order");
  require_order(order_v, "order");
  const int n = spec.nodes_per_axis;
  const LevelSum coarse =
      sum_2d(g, power_weighted_nodes(spec.scheme, n, order_u),
             power_weighted_nodes(spec.scheme, n, order_v));
  const LevelSum fine =
      sum_2d(g, power_weighted_nodes(spec.scheme, 2 * n, order_u),
             power_weighted_nodes(spec.scheme, 2 * n, order_v));
  return combine_levels(coarse, fine, spec, "2d quadrature");
}

QuadResult frac_integral_1d(const UnivariateFn& f, double order, Side side,
                            const Interval& interval, double at,
                            const QuadratureSpec& spec) {
  require_order(order, "order");
  const AxisMap axis = AxisMap::make(side, interval, at, "t");
  const QuadResult inner = integrate_power_weighted(
      [&](double u, double uc) {
        const double t = axis.point(u, uc);
        return checked_value(f(t), t);
      },
      order, spec);
  const special::SpecialValue g = special::gamma_value(order);
  const double scale = std::pow(axis.span, order) / g.value;
  const double value = scale * inner.value;
  return {value, std::abs(scale) * inner.error_estimate +
                     std::abs(value) * (g.abs_error_estimate / g.value + 2.0 * kEps)};
}

QuadResult frac_integral_2d(const BivariateFn& f, const FracOrder& order,
                            Corner corner, const Rectangle& rect, double x,
                            double y, const QuadratureSpec& spec) {
  const bool left_x = corner == Corner::APlusCPlus || corner == Corner::APlusDMinus;
  const bool left_y = corner == Corner::APlusCPlus || corner == Corner::BMinusCPlus;
  const AxisMap ax = AxisMap::make(left_x ? Side::Left : Side::Right, rect.x(), x, "x");
  const AxisMap ay = AxisMap::make(left_y ? Side::Left : Side::Right, rect.y(), y, "y");
  const QuadResult inner = integrate_power_weighted_2d(
      [&](double u, double uc, double v, double vc) {
        const double t = ax.point(u, uc);
        const double s = ay.point(v, vc);
        return checked_value(f(t, s), t, s);
      },
      order.alpha(), order.beta(), spec);
  const special::SpecialValue ga = special::gamma_value(order.alpha());
  const special::SpecialValue gb = special::gamma_value(order.beta());
  const double scale = std::pow(ax.span, order.alpha()) *
                       std::pow(ay.span, order.beta()) / (ga.value * gb.value);
  const double value = scale * inner.value;
  const double rel_special =
      ga.abs_error_estimate / ga.value + gb.abs_error_estimate / gb.value + 4.0 * kEps;
  return {value, std::abs(scale) * inner.error_estimate + std::abs(value) * rel_special};
}

}  // namespace hhcert::fracquad
