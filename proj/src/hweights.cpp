#include "hhcert/hweights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "hhcert/errors.hpp"

namespace hhcert::hweights {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_number(std::string_view text, const std::string& what) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw DomainError("invalid " + what + " '" + s + "'");
  }
  return v;
}

// Shared by the grid scan and the public re-evaluation so a witness
// reproduces its deficit bit for bit.
double deficit_from(double lhs, double f_xu, double f_yu, double f_xw, double f_yw, double ht,
                    double htc, double hk, double hkc, bool reverse) {
  const double rhs = ht * hk * f_xu + htc * hk * f_yu + ht * hkc * f_xw + htc * hkc * f_yw;
  return reverse ? rhs - lhs : lhs - rhs;
}

double blend(double t, double p, double q, double lo, double hi) {
  return std::clamp(t * p + (1.0 - t) * q, lo, hi);
}

}  // namespace

HWeight HWeight::identity() { return {Family::Identity, 1.0}; }

HWeight HWeight::power(double s) {
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("power h requires 0 < s <= 1, got " + fmt(s));
  return {Family::Power, s};
}

HWeight HWeight::one() { return {Family::One, 0.0}; }

HWeight HWeight::godunova_levin() { return {Family::GodunovaLevin, -1.0}; }

HWeight HWeight::table(std::vector<std::pair<double, double>> knots, std::string source) {
  if (knots.size() < 2) throw DomainError("h table needs at least two knots");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto [t, h] = knots[i];
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("h table knot t = " + fmt(t) + " outside [0,1]");
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw DomainError("h table value at t = " + fmt(t) + " must be positive and finite");
    }
    if (i > 0 && !(t > knots[i - 1].first)) {
      throw DomainError("h table knots must be strictly increasing in t");
    }
  }
  HWeight w(Family::Table, 0.0);
  w.knots_ = std::make_shared<const std::vector<std::pair<double, double>>>(std::move(knots));
  w.source_ = std::move(source);
  return w;
}

HWeight HWeight::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open h table '" + path + "'");
  std::vector<std::pair<double, double>> knots;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double t = 0.0, h = 0.0;
    std::string extra;
    if (!(fields >> t)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected 't h'");
    }
    if (!(fields >> h) || (fields >> extra)) {
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected 't h'");
    }
    knots.emplace_back(t, h);
  }
  return table(std::move(knots), path);
}

HWeight HWeight::parse(std::string_view text) {
  if (text == "identity") return identity();
  if (text == "one") return one();
  if (text == "gl") return godunova_levin();
  if (text.substr(0, 6) == "power:") return power(parse_number(text.substr(6), "power exponent"));
  if (text.substr(0, 6) == "table:") return load_table(std::string(text.substr(6)));
  throw DomainError("unknown h family '" + std::string(text) +
                    "' (expected identity, power:<s>, one, gl or table:<path>)");
}

double HWeight::eval_unchecked(double t) const {
  switch (family_) {
    case Family::Identity: return t;
    case Family::Power: return std::pow(t, s_);
    case Family::One: return 1.0;
    case Family::GodunovaLevin: return t == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / t;
    case Family::Table: {
      const auto& k = *knots_;
      if (t <= k.front().first) return k.front().second;
      if (t >= k.back().first) return k.back().second;
      auto hi = std::upper_bound(k.begin(), k.end(), t,
                                 [](double v, const auto& knot) { return v < knot.first; });
      auto lo = hi - 1;
      const double r = (t - lo->first) / (hi->first - lo->first);
      return lo->second + r * (hi->second - lo->second);
    }
  }
  return 0.0;
}

double HWeight::operator()(double t) const {
  if (!(t > 0.0 && t < 1.0)) {
    if (family_ == Family::GodunovaLevin && (t == 0.0 || t == 1.0)) {
      throw DomainError("godunova-levin h is evaluated on the open interval (0,1), got t = " +
                        fmt(t));
    }
    throw OutOfRangeError("h(t) requires 0 < t < 1, got t = " + fmt(t));
  }
  return eval_unchecked(t);
}

std::optional<double> HWeight::endpoint_value(double t) const {
  if (t != 0.0 && t != 1.0) throw OutOfRangeError("endpoint_value requires t in {0,1}");
  const double v = eval_unchecked(t);
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

double HWeight::at_closed(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw OutOfRangeError("h requires 0 <= t <= 1, got t = " + fmt(t));
  return eval_unchecked(t);
}

std::string HWeight::describe() const {
  switch (family_) {
    case Family::Identity: return "identity";
    case Family::Power: return "power:" + fmt(s_);
    case Family::One: return "one";
    case Family::GodunovaLevin: return "gl";
    case Family::Table: return "table:" + (source_.empty() ? std::string("<inline>") : source_);
  }
  return {};
}

const std::vector<std::pair<double, double>>& HWeight::knots() const {
  static const std::vector<std::pair<double, double>> none;
  return knots_ ? *knots_ : none;
}

std::string ConvexityCertificate::summary() const {
  const std::string what = reversed ? "h-concavity" : "h-convexity";
  if (pass) {
    return "no violation found on " + std::to_string(samples_checked) +
           " samples (sampled check, not a proof)";
  }
  std::string s = what + " violated by " + fmt(worst_violation) + " (tolerance " +
                  fmt(tolerance) + ")";
  if (witness) {
    s += " at t=" + fmt(witness->t) + " k=" + fmt(witness->k) + " (x,u)=(" + fmt(witness->x) +
         ", " + fmt(witness->u) + ") (y,w)=(" + fmt(witness->y) + ", " + fmt(witness->w) + ")";
  }
  return s;
}

double coordinate_h_convex_deficit(const funcspace::BivariateFunction& f, const HWeight& h,
                                   const Witness& p, bool reverse) {
  const double tc = 1.0 - p.t;
  const double kc = 1.0 - p.k;
  const double px = p.t * p.x + tc * p.y;
  const double py = p.k * p.u + kc * p.w;
  const double lhs = f(std::clamp(px, std::min(p.x, p.y), std::max(p.x, p.y)),
                       std::clamp(py, std::min(p.u, p.w), std::max(p.u, p.w)));
  return deficit_from(lhs, f(p.x, p.u), f(p.y, p.u), f(p.x, p.w), f(p.y, p.w), h.at_closed(p.t),
                      h.at_closed(tc), h.at_closed(p.k), h.at_closed(kc), reverse);
}

ConvexityCertificate check_coordinate_h_convex(const funcspace::BivariateFunction& f,
                                               const HWeight& h,
                                               const fracquad::Rectangle& rect, int grid,
                                               std::optional<double> tol,
                                               const ConvexityOptions& options) {
  if (grid < 3) throw DomainError("convexity grid needs at least 3 points per axis");
  const int g = grid;
  const double denom = static_cast<double>(g - 1);

  std::vector<double> xs(g), ys(g), ts(g);
  for (int i = 0; i < g; ++i) {
    const double r = static_cast<double>(i) / denom;
    ts[i] = r;
    xs[i] = rect.a() + rect.x().width() * r;
    ys[i] = rect.c() + rect.y().width() * r;
  }
  xs[g - 1] = rect.b();
  ys[g - 1] = rect.d();

  std::vector<double> values(static_cast<std::size_t>(g) * g);
  double max_abs = 0.0;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double v = f(xs[i], ys[j]);
      if (h.family() != Family::Identity && v < 0.0) {
        throw DomainError("h-convexity requires f >= 0, but f(" + fmt(xs[i]) + ", " + fmt(ys[j]) +
                          ") = " + fmt(v));
      }
      values[static_cast<std::size_t>(i) * g + j] = v;
      max_abs = std::max(max_abs, std::abs(v));
    }
  }
  const double tolerance = tol.value_or(1e-10 * (1.0 + max_abs));
  if (!(tolerance >= 0.0)) throw DomainError("convexity tolerance must be >= 0");

  std::vector<int> weight_index;
  const bool endpoints = options.endpoint_spot_check && h.finite_at_endpoints();
  for (int i = 0; i < g; ++i) {
    if (i == 0 || i == g - 1) {
      if (endpoints) weight_index.push_back(i);
    } else {
      weight_index.push_back(i);
    }
  }
  std::vector<double> hw(g, 0.0), hwc(g, 0.0);
  for (int i : weight_index) {
    hw[i] = h.at_closed(ts[i]);
    hwc[i] = h.at_closed(1.0 - ts[i]);
  }

  struct Best {
    double deficit = -std::numeric_limits<double>::infinity();
    std::array<int, 6> index{};  // ti, ki, x1, u1, x2, u2
    long long count = 0;
    long long endpoint_count = 0;
  };

  auto scan = [&](std::size_t first, std::size_t step, Best& best) {
    for (std::size_t a = first; a < weight_index.size(); a += step) {
      const int ti = weight_index[a];
      const double t = ts[ti];
      for (int ki : weight_index) {
        const double k = ts[ki];
        const bool at_endpoint = ti == 0 || ti == g - 1 || ki == 0 || ki == g - 1;
        for (int x1 = 0; x1 < g; ++x1) {
          for (int x2 = x1; x2 < g; ++x2) {
            const double px = blend(t, xs[x1], xs[x2], xs[x1], xs[x2]);
            for (int u1 = 0; u1 < g; ++u1) {
              for (int u2 = u1; u2 < g; ++u2) {
                const double py = blend(k, ys[u1], ys[u2], ys[u1], ys[u2]);
                const double d = deficit_from(
                    f(px, py), values[x1 * g + u1], values[x2 * g + u1], values[x1 * g + u2],
                    values[x2 * g + u2], hw[ti], hwc[ti], hw[ki], hwc[ki], options.reverse);
                ++best.count;
                if (at_endpoint) ++best.endpoint_count;
                const std::array<int, 6> idx{ti, ki, x1, u1, x2, u2};
                if (d > best.deficit || (d == best.deficit && idx < best.index)) {
                  best.deficit = d;
                  best.index = idx;
                }
              }
            }
          }
        }
      }
    }
  };

  unsigned jobs = options.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                    : options.jobs;
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(weight_index.size()));
  std::vector<Best> partial(jobs);
  if (jobs <= 1) {
    scan(0, 1, partial[0]);
  } else {
    std::vector<std::exception_ptr> failures(jobs);
    std::vector<std::thread> workers;
    for (unsigned j = 0; j < jobs; ++j) {
      workers.emplace_back([&, j] {
        try {
          scan(j, jobs, partial[j]);
        } catch (...) {
          failures[j] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : failures) {
      if (e) std::rethrow_exception(e);
    }
  }

  Best best;
  for (const Best& p : partial) {
    best.count += p.count;
    best.endpoint_count += p.endpoint_count;
    if (p.count == 0) continue;
    if (p.deficit > best.deficit || (p.deficit == best.deficit && p.index < best.index)) {
      best.deficit = p.deficit;
      best.index = p.index;
    }
  }

  ConvexityCertificate cert;
  cert.samples_checked = best.count;
  cert.endpoint_samples = best.endpoint_count;
  cert.tolerance = tolerance;
  cert.reversed = options.reverse;
  cert.pass = !(best.deficit > tolerance);
  cert.worst_violation = cert.pass ? 0.0 : best.deficit;
  if (!cert.pass) {
    const auto& i = best.index;
    cert.witness = Witness{ts[i[0]], ts[i[1]], xs[i[2]], ys[i[3]], xs[i[4]], ys[i[5]]};
  }
  return cert;
}

}  // namespace hhcert::hweights
