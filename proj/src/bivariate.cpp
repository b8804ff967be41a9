#include "hhcert/bivariate.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>

#include "hhcert/errors.hpp"

namespace hhcert::funcspace {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr std::uint64_t kValidationSeed = 0x5eed2024ULL;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string point_text(double x, double y) { return "(" + fmt(x) + ", " + fmt(y) + ")"; }

// First-derivative stencil along one axis: sum_i weight_i f(p + offset_i h) / h.
struct Stencil {
  std::array<double, 3> offsets{};
  std::array<double, 3> weights{};
  int size = 0;
};

Stencil choose_stencil(double p, double h, const fracquad::Interval& axis) {
  if (p - h >= axis.lo() && p + h <= axis.hi()) return {{-1.0, 1.0, 0.0}, {-0.5, 0.5, 0.0}, 2};
  if (p + 2.0 * h <= axis.hi()) return {{0.0, 1.0, 2.0}, {-1.5, 2.0, -0.5}, 3};
  if (p - 2.0 * h >= axis.lo()) return {{0.0, -1.0, -2.0}, {1.5, -2.0, 0.5}, 3};
  throw StepUnderflowError("finite-difference stencil does not fit inside the interval");
}

struct CrossDifference {
  double value;
  double abs_sum;  // sum of |weight * f| / (h k), for the rounding bound
};

CrossDifference cross_difference(const BivariateFunction& f, double x, double y, double h,
                                 double k, const fracquad::Rectangle& rect) {
  if (x + h == x || y + k == y || h == 0.0 || k == 0.0) {
    throw StepUnderflowError("finite-difference step rounds to zero at " + point_text(x, y));
  }
  const Stencil sx = choose_stencil(x, h, rect.x());
  const Stencil sy = choose_stencil(y, k, rect.y());
  double sum = 0.0;
  double abs_sum = 0.0;
  for (int i = 0; i < sx.size; ++i) {
    const double px = x + sx.offsets[i] * h;
    for (int j = 0; j < sy.size; ++j) {
      const double term = sx.weights[i] * sy.weights[j] * f(px, y + sy.offsets[j] * k);
      sum += term;
      abs_sum += std::abs(term);
    }
  }
  return {sum / (h * k), abs_sum / (h * k)};
}

std::vector<double> parse_params(std::string_view text) {
  std::vector<double> params;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find(':', start);
    const std::string piece(text.substr(start, end == std::string_view::npos ? text.npos : end - start));
    char* stop = nullptr;
    const double v = std::strtod(piece.c_str(), &stop);
    if (piece.empty() || stop != piece.c_str() + piece.size() || !std::isfinite(v)) {
      throw DomainError("invalid builtin parameter '" + piece + "'");
    }
    params.push_back(v);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return params;
}

void require_param_count(std::string_view name, std::span<const double> params, std::size_t n) {
  if (params.size() != n) {
    throw DomainError("builtin '" + std::string(name) + "' takes " + std::to_string(n) +
                      " parameter(s), got " + std::to_string(params.size()));
  }
}

}  // namespace

void FDSpec::validate() const {
  if (!(step_relative > 0.0 && step_relative < 1e-2)) {
    throw DomainError("finite-difference step_relative must lie in (0, 1e-2), got " +
                      fmt(step_relative));
  }
}

std::string Provenance::describe() const {
  switch (kind) {
    case Kind::Builtin: {
      std::string s = "builtin:" + name;
      for (double p : params) s += ":" + fmt(p);
      return s;
    }
    case Kind::Parsed: return source;
    case Kind::Custom: return "custom:" + name;
  }
  return name;
}

BivariateFunction::BivariateFunction(Fn value, std::optional<Fn> mixed_partial,
                                     Provenance provenance)
    : value_(std::move(value)), mixed_(std::move(mixed_partial)),
      provenance_(std::move(provenance)) {}

BivariateFunction BivariateFunction::parse(std::string_view src) {
  Expression expr = Expression::parse(src, VariableSet::Bivariate);
  Provenance prov{Provenance::Kind::Parsed, "expression", {}, std::string(src)};
  BivariateFunction f([expr](double x, double y) { return expr.evaluate(x, y); },
                      std::nullopt, std::move(prov));
  f.nonsmooth_ = expr.uses_function(Function::Abs);
  return f;
}

BivariateFunction BivariateFunction::builtin(std::string_view name,
                                             std::span<const double> params) {
  Provenance prov{Provenance::Kind::Builtin, std::string(name),
                  std::vector<double>(params.begin(), params.end()), {}};
  if (name == "product") {
    require_param_count(name, params, 0);
    return {[](double x, double y) { return x * y; }, Fn([](double, double) { return 1.0; }),
            prov};
  }
  if (name == "quadratic") {
    require_param_count(name, params, 0);
    return {[](double x, double y) { return x * x + y * y; },
            Fn([](double, double) { return 0.0; }), prov};
  }
  if (name == "biquadratic") {
    require_param_count(name, params, 0);
    return {[](double x, double y) { return x * x * y * y; },
            Fn([](double x, double y) { return 4.0 * x * y; }), prov};
  }
  if (name == "expsum") {
    require_param_count(name, params, 0);
    return {[](double x, double y) { return std::exp(x + y); },
            Fn([](double x, double y) { return std::exp(x + y); }), prov};
  }
  if (name == "powersum") {
    require_param_count(name, params, 1);
    const double s = params[0];
    if (!(s > 0.0)) throw DomainError("powersum exponent must be > 0, got " + fmt(s));
    return {[s](double x, double y) { return std::pow(x, s) + std::pow(y, s); },
            Fn([](double, double) { return 0.0; }), prov};
  }
  if (name == "bilinear") {
    require_param_count(name, params, 4);
    const double c0 = params[0], c1 = params[1], c2 = params[2], c3 = params[3];
    return {[=](double x, double y) { return c0 + c1 * x + c2 * y + c3 * x * y; },
            Fn([c3](double, double) { return c3; }), prov};
  }
  throw DomainError("unknown builtin function '" + std::string(name) + "'");
}

BivariateFunction BivariateFunction::from_spec(std::string_view spec) {
  constexpr std::string_view prefix = "builtin:";
  if (spec.substr(0, prefix.size()) != prefix) return parse(spec);
  const std::string_view rest = spec.substr(prefix.size());
  const std::size_t colon = rest.find(':');
  const std::string_view name = rest.substr(0, colon);
  const std::vector<double> params =
      colon == std::string_view::npos ? std::vector<double>{} : parse_params(rest.substr(colon + 1));
  return builtin(name, params);
}

double BivariateFunction::operator()(double x, double y) const {
  double v = 0.0;
  try {
    v = value_(x, y);
  } catch (const DomainError& e) {
    throw EvaluationError(std::string(e.what()) + " at (x, y) = " + point_text(x, y));
  }
  if (!std::isfinite(v)) {
    throw EvaluationError("non-finite value " + fmt(v) + " of " + provenance_.describe() +
                          " at (x, y) = " + point_text(x, y));
  }
  return v;
}

double BivariateFunction::analytic_mixed_partial(double x, double y) const {
  if (!mixed_) throw Error("no analytic mixed partial for " + provenance_.describe());
  const double v = (*mixed_)(x, y);
  if (!std::isfinite(v)) {
    throw EvaluationError("non-finite mixed partial at (x, y) = " + point_text(x, y));
  }
  return v;
}

void BivariateFunction::validate_mixed_partial(const fracquad::Rectangle& rect,
                                               const FDSpec& fd) const {
  if (!mixed_) return;
  fd.validate();
  const double h = fd.step_relative * rect.x().width();
  const double k = fd.step_relative * rect.y().width();
  std::mt19937_64 rng(kValidationSeed);
  std::uniform_real_distribution<double> ux(rect.a() + 2.0 * h, rect.b() - 2.0 * h);
  std::uniform_real_distribution<double> uy(rect.c() + 2.0 * k, rect.d() - 2.0 * k);
  for (int i = 0; i < 100; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    const double analytic = analytic_mixed_partial(x, y);
    const DerivativeEstimate approx = mixed_partial_fd(*this, x, y, rect, fd);
    const double allowed = 1e-5 * std::max(1.0, std::abs(analytic)) + approx.error_estimate;
    if (std::abs(approx.value - analytic) > allowed) {
      throw EvaluationError("analytic mixed partial of " + provenance_.describe() +
                            " disagrees with finite differences at " + point_text(x, y) +
                            ": " + fmt(analytic) + " vs " + fmt(approx.value));
    }
  }
}

DerivativeEstimate mixed_partial_fd(const BivariateFunction& f, double x, double y,
                                    const fracquad::Rectangle& rect, const FDSpec& fd) {
  fd.validate();
  if (!rect.contains(x, y)) {
    throw DomainError("mixed partial requested outside the rectangle at " + point_text(x, y));
  }
  const double h = fd.step_relative * rect.x().width();
  const double k = fd.step_relative * rect.y().width();
  const CrossDifference fine = cross_difference(f, x, y, h, k, rect);
  const CrossDifference coarse = cross_difference(f, x, y, 2.0 * h, 2.0 * k, rect);
  // Both stencils are second order, so (D(h) - D(2h)) / 3 estimates the
  // truncation error of D(h).
  const double truncation = std::abs(fine.value - coarse.value) / 3.0;
  return {fine.value, truncation + 4.0 * kEps * fine.abs_sum};
}

double mixed_partial(const BivariateFunction& f, double x, double y,
                     const fracquad::Rectangle& rect, const FDSpec& fd) {
  if (f.has_analytic_mixed_partial()) return f.analytic_mixed_partial(x, y);
  fd.validate();
  if (!rect.contains(x, y)) {
    throw DomainError("mixed partial requested outside the rectangle at " + point_text(x, y));
  }
  return cross_difference(f, x, y, fd.step_relative * rect.x().width(),
                          fd.step_relative * rect.y().width(), rect)
      .value;
}

DerivativeEstimate mixed_partial_estimate(const BivariateFunction& f, double x, double y,
                                          const fracquad::Rectangle& rect, const FDSpec& fd) {
  if (f.has_analytic_mixed_partial()) {
    const double v = f.analytic_mixed_partial(x, y);
    return {v, 4.0 * kEps * std::abs(v)};
  }
  return mixed_partial_fd(f, x, y, rect, fd);
}

BivariateFunction abs_mixed_partial_field(const BivariateFunction& f,
                                          const fracquad::Rectangle& rect, double power,
                                          const FDSpec& fd) {
  if (!(power > 0.0)) throw DomainError("derivative field power must be > 0");
  Provenance prov{Provenance::Kind::Custom,
                  "|d2f/dxdy|^" + fmt(power) + " of " + f.provenance().describe(), {}, {}};
  return {[f, rect, power, fd](double x, double y) {
            return std::pow(std::abs(mixed_partial(f, x, y, rect, fd)), power);
          },
          std::nullopt, std::move(prov)};
}

std::vector<std::string> builtin_names() {
  return {"product", "quadratic", "biquadratic", "expsum", "powersum", "bilinear"};
}

}  // namespace hhcert::funcspace
