#include "hhcert/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hhcert/certify.hpp"
#include "hhcert/errors.hpp"
#include "hhcert/expression.hpp"
#include "hhcert/fracquad.hpp"
#include "hhcert/hweights.hpp"

namespace hhcert::cli {
namespace {

using json = nlohmann::ordered_json;
using certify::BoundReport;
using certify::ChainReport;
using certify::LemmaReport;

constexpr int kSchemaVersion = 1;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt15(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// Deterministic JSON: fixed field order, two-space indent, floats with 17
// significant digits, non-finite floats as null.
void dump_json(const json& j, std::string& out, int depth) {
  const std::string pad(2 * depth, ' ');
  const std::string inner(2 * (depth + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + json(key).dump() + ": ";
        dump_json(value, out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump_json(j[i], out, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt17(v) : "null";
      return;
    }
    default: out += j.dump(); return;
  }
}

json number_or_null(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::string csv_number(std::optional<double> v) { return v ? fmt17(*v) : std::string(); }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------------------
// Configuration

struct RunConfig {
  std::string command;
  std::optional<std::string> f, f1, h, theorem, scheme, side, corner, format, output;
  std::vector<double> rect, interval, at_xy;
  std::optional<double> alpha, beta, p, tol, abs_tol, step, at, check_tol;
  std::optional<int> nodes, grid;
  std::optional<unsigned> jobs;
  std::optional<bool> reverse, endpoints;
  std::vector<std::string> axis;
};

const std::vector<std::string> kCommands = {"frac-integrate", "check-hconvex", "verify", "sweep"};

template <typename T>
void take(std::optional<T>& dst, const json& j, const char* key) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config field '") + key + "' has the wrong type", "--config");
  }
}

void take_vector(std::vector<double>& dst, const json& j, const char* key) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config field '") + key + "' must be an array of numbers",
                     "--config");
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'", "--config");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what(), "--config");
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object", "--config");
  static const std::vector<std::string> known = {
      "command", "f",     "f1",    "h",         "theorem", "scheme", "side",  "corner",
      "format",  "output", "rect", "interval",  "at_xy",   "alpha",  "beta",  "p",
      "tol",     "abs_tol", "step", "at",       "check_tol", "nodes", "grid", "jobs",
      "reverse", "endpoints", "axis", "schema_version"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw UsageError("unknown config field '" + key + "'", "--config");
    }
  }
  RunConfig c;
  std::optional<std::string> command;
  take(command, j, "command");
  if (command) c.command = *command;
  take(c.f, j, "f");
  take(c.f1, j, "f1");
  take(c.h, j, "h");
  take(c.theorem, j, "theorem");
  take(c.scheme, j, "scheme");
  take(c.side, j, "side");
  take(c.corner, j, "corner");
  take(c.format, j, "format");
  take(c.output, j, "output");
  take_vector(c.rect, j, "rect");
  take_vector(c.interval, j, "interval");
  take_vector(c.at_xy, j, "at_xy");
  take(c.alpha, j, "alpha");
  take(c.beta, j, "beta");
  take(c.p, j, "p");
  take(c.tol, j, "tol");
  take(c.abs_tol, j, "abs_tol");
  take(c.step, j, "step");
  take(c.at, j, "at");
  take(c.check_tol, j, "check_tol");
  take(c.nodes, j, "nodes");
  take(c.grid, j, "grid");
  take(c.jobs, j, "jobs");
  take(c.reverse, j, "reverse");
  take(c.endpoints, j, "endpoints");
  if (j.contains("axis")) {
    try {
      c.axis = j.at("axis").get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw UsageError("config field 'axis' must be an array of strings", "--config");
    }
  }
  return c;
}

template <typename T>
void overlay(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

void overlay(std::vector<double>& dst, const std::vector<double>& src) {
  if (!src.empty()) dst = src;
}

RunConfig merge(RunConfig base, const RunConfig& cli) {
  if (!cli.command.empty()) base.command = cli.command;
  overlay(base.f, cli.f);
  overlay(base.f1, cli.f1);
  overlay(base.h, cli.h);
  overlay(base.theorem, cli.theorem);
  overlay(base.scheme, cli.scheme);
  overlay(base.side, cli.side);
  overlay(base.corner, cli.corner);
  overlay(base.format, cli.format);
  overlay(base.output, cli.output);
  overlay(base.rect, cli.rect);
  overlay(base.interval, cli.interval);
  overlay(base.at_xy, cli.at_xy);
  overlay(base.alpha, cli.alpha);
  overlay(base.beta, cli.beta);
  overlay(base.p, cli.p);
  overlay(base.tol, cli.tol);
  overlay(base.abs_tol, cli.abs_tol);
  overlay(base.step, cli.step);
  overlay(base.at, cli.at);
  overlay(base.check_tol, cli.check_tol);
  overlay(base.nodes, cli.nodes);
  overlay(base.grid, cli.grid);
  overlay(base.jobs, cli.jobs);
  overlay(base.reverse, cli.reverse);
  overlay(base.endpoints, cli.endpoints);
  if (!cli.axis.empty()) base.axis = cli.axis;
  return base;
}

// ---------------------------------------------------------------------------
// Resolution of a config into library objects. Every failure here is a
// usage error naming the flag.

template <typename Fn>
auto for_flag(const std::string& flag, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const UsageError&) {
    throw;
  } catch (const ParseError& e) {
    throw UsageError(e.what(), flag);
  } catch (const Error& e) {
    throw UsageError(e.what(), flag);
  }
}

template <typename T>
const T& require(const std::optional<T>& v, const std::string& flag) {
  if (!v) throw UsageError("missing required option", flag);
  return *v;
}

double require_positive(const std::optional<double>& v, const std::string& flag) {
  const double x = require(v, flag);
  if (!(x > 0.0) || !std::isfinite(x)) throw UsageError("must be a finite value > 0", flag);
  return x;
}

fracquad::Rectangle resolve_rect(const RunConfig& c, bool theorem) {
  if (c.rect.size() != 4) throw UsageError("expects four values a b c d", "--rect");
  return for_flag("--rect", [&] {
    fracquad::Rectangle r(c.rect[0], c.rect[1], c.rect[2], c.rect[3]);
    if (theorem) r.require_nonnegative_origin();
    return r;
  });
}

fracquad::QuadratureSpec resolve_quadrature(const RunConfig& c) {
  fracquad::QuadratureSpec q;
  if (c.nodes) q.nodes_per_axis = *c.nodes;
  if (c.tol) q.target_rel_tol = *c.tol;
  if (c.scheme) q.scheme = for_flag("--scheme", [&] { return fracquad::parse_scheme(*c.scheme); });
  for_flag(c.nodes ? "--nodes" : "--tol", [&] {
    q.validate();
    return 0;
  });
  return q;
}

certify::CertifyOptions resolve_certify(const RunConfig& c) {
  certify::CertifyOptions o;
  o.quadrature = resolve_quadrature(c);
  if (c.step) o.fd.step_relative = *c.step;
  for_flag("--step", [&] {
    o.fd.validate();
    return 0;
  });
  if (c.abs_tol) {
    if (!(*c.abs_tol >= 0.0)) throw UsageError("must be >= 0", "--abs-tol");
    o.abs_tol = *c.abs_tol;
  }
  o.reverse = c.reverse.value_or(false);
  return o;
}

std::string resolve_format(const RunConfig& c) {
  const std::string f = c.format.value_or("text");
  if (f != "text" && f != "json" && f != "csv") {
    throw UsageError("expected text, json or csv, got '" + f + "'", "--format");
  }
  return f;
}

json quadrature_json(const fracquad::QuadratureSpec& q) {
  json j;
  j["nodes"] = q.nodes_per_axis;
  j["tol"] = q.target_rel_tol;
  j["scheme"] = std::string(fracquad::to_string(q.scheme));
  return j;
}

// ---------------------------------------------------------------------------
// Output

struct Report {
  json config;
  json result;
  std::string text;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  int exit_code = kSuccess;
};

std::string render(const Report& r, const std::string& format) {
  if (format == "json") {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["config"] = r.config;
    doc["result"] = r.result;
    std::string s;
    dump_json(doc, s, 0);
    return s + "\n";
  }
  if (format == "csv") {
    std::string s = join(r.csv_header, ",") + "\n";
    for (const auto& row : r.csv_rows) {
      std::vector<std::string> cells;
      for (const auto& cell : row) cells.push_back(csv_field(cell));
      s += join(cells, ",") + "\n";
    }
    return s;
  }
  return r.text;
}

// ---------------------------------------------------------------------------
// frac-integrate

Report frac_integrate(const RunConfig& c) {
  const fracquad::QuadratureSpec q = resolve_quadrature(c);
  Report r;
  r.config["command"] = "frac-integrate";
  std::ostringstream text;
  fracquad::QuadResult value;
  if (c.f1 && c.f) throw UsageError("give either --f1 or --f, not both", "--f1");
  if (c.f1) {
    const auto expr = for_flag("--f1", [&] {
      return funcspace::Expression::parse(*c.f1, funcspace::VariableSet::Univariate);
    });
    const double alpha = require_positive(c.alpha, "--alpha");
    const fracquad::Side side =
        for_flag("--side", [&] { return fracquad::parse_side(require(c.side, "--side")); });
    if (c.interval.size() != 2) throw UsageError("expects two values lo hi", "--interval");
    const fracquad::Interval iv =
        for_flag("--interval", [&] { return fracquad::Interval(c.interval[0], c.interval[1]); });
    const double at = require(c.at, "--at");
    const bool legal = side == fracquad::Side::Left ? (at > iv.lo() && at <= iv.hi())
                                                    : (at >= iv.lo() && at < iv.hi());
    if (!legal) throw UsageError("evaluation point outside the legal range for this side", "--at");
    r.config["f1"] = *c.f1;
    r.config["alpha"] = alpha;
    r.config["side"] = std::string(fracquad::to_string(side));
    r.config["interval"] = {iv.lo(), iv.hi()};
    r.config["at"] = at;
    r.config["quadrature"] = quadrature_json(q);
    value = fracquad::frac_integral_1d([&expr](double t) { return expr.evaluate(t); }, alpha,
                                       side, iv, at, q);
    text << "J^" << fmt15(alpha) << " (" << fracquad::to_string(side) << ") of " << *c.f1
         << " at " << fmt15(at) << "\n";
  } else {
    const std::string spec = require(c.f, "--f");
    const auto f = for_flag("--f", [&] { return funcspace::BivariateFunction::from_spec(spec); });
    const double alpha = require_positive(c.alpha, "--alpha");
    const double beta = require_positive(c.beta, "--beta");
    const fracquad::Corner corner = for_flag(
        "--corner", [&] { return fracquad::parse_corner(require(c.corner, "--corner")); });
    const fracquad::Rectangle rect = resolve_rect(c, false);
    if (c.at_xy.size() != 2) throw UsageError("expects two values x y", "--at-xy");
    r.config["f"] = spec;
    r.config["alpha"] = alpha;
    r.config["beta"] = beta;
    r.config["corner"] = std::string(fracquad::to_string(corner));
    r.config["rect"] = {rect.a(), rect.b(), rect.c(), rect.d()};
    r.config["at_xy"] = {c.at_xy[0], c.at_xy[1]};
    r.config["quadrature"] = quadrature_json(q);
    try {
      value = fracquad::frac_integral_2d([&f](double x, double y) { return f(x, y); },
                                         {alpha, beta}, corner, rect, c.at_xy[0], c.at_xy[1], q);
    } catch (const DomainError& e) {
      throw UsageError(e.what(), "--at-xy");
    }
    text << "J^(" << fmt15(alpha) << "," << fmt15(beta) << ") (" << fracquad::to_string(corner)
         << ") of " << spec << " at (" << fmt15(c.at_xy[0]) << ", " << fmt15(c.at_xy[1])
         << ")\n";
  }
  text << "value           " << fmt15(value.value) << "\n"
       << "error_estimate  " << fmt15(value.error_estimate) << "\n";
  r.result["value"] = value.value;
  r.result["error_estimate"] = value.error_estimate;
  r.text = text.str();
  r.csv_header = {"value", "error_estimate"};
  r.csv_rows = {{fmt17(value.value), fmt17(value.error_estimate)}};
  return r;
}

// ---------------------------------------------------------------------------
// check-hconvex

Report check_hconvex(const RunConfig& c) {
  const std::string spec = require(c.f, "--f");
  const auto f = for_flag("--f", [&] { return funcspace::BivariateFunction::from_spec(spec); });
  const auto h = for_flag("--h", [&] { return hweights::HWeight::parse(require(c.h, "--h")); });
  const fracquad::Rectangle rect = resolve_rect(c, false);
  const int grid = c.grid.value_or(9);
  if (grid < 3) throw UsageError("must be >= 3", "--grid");
  if (c.check_tol && !(*c.check_tol >= 0.0)) throw UsageError("must be >= 0", "--check-tol");
  hweights::ConvexityOptions options;
  options.reverse = c.reverse.value_or(false);
  options.endpoint_spot_check = c.endpoints.value_or(true);
  options.jobs = c.jobs.value_or(0);

  const hweights::ConvexityCertificate cert =
      hweights::check_coordinate_h_convex(f, h, rect, grid, c.check_tol, options);

  Report r;
  r.config["command"] = "check-hconvex";
  r.config["f"] = spec;
  r.config["h"] = h.describe();
  r.config["rect"] = {rect.a(), rect.b(), rect.c(), rect.d()};
  r.config["grid"] = grid;
  r.config["check_tol"] = number_or_null(c.check_tol);
  r.config["reverse"] = options.reverse;
  r.config["endpoints"] = options.endpoint_spot_check;

  r.result["verdict"] = cert.pass ? "pass" : "fail";
  r.result["samples_checked"] = cert.samples_checked;
  r.result["endpoint_samples"] = cert.endpoint_samples;
  r.result["worst_violation"] = cert.worst_violation;
  r.result["tolerance"] = cert.tolerance;
  if (cert.witness) {
    const auto& w = *cert.witness;
    r.result["witness"] = {{"t", w.t}, {"k", w.k}, {"x", w.x}, {"u", w.u}, {"y", w.y}, {"w", w.w}};
  } else {
    r.result["witness"] = nullptr;
  }
  r.result["summary"] = cert.summary();
  r.text = std::string(cert.pass ? "pass" : "fail") + ": " + cert.summary() + "\n";
  r.csv_header = {"verdict", "samples_checked", "endpoint_samples", "worst_violation",
                  "tolerance", "t", "k", "x", "u", "y", "w"};
  std::vector<std::string> row = {cert.pass ? "pass" : "fail", std::to_string(cert.samples_checked),
                                  std::to_string(cert.endpoint_samples),
                                  fmt17(cert.worst_violation), fmt17(cert.tolerance)};
  for (double v : cert.witness ? std::vector<double>{cert.witness->t, cert.witness->k,
                                                     cert.witness->x, cert.witness->u,
                                                     cert.witness->y, cert.witness->w}
                               : std::vector<double>{}) {
    row.push_back(fmt17(v));
  }
  row.resize(r.csv_header.size());
  r.csv_rows = {row};
  r.exit_code = cert.pass ? kSuccess : kViolation;
  return r;
}

// ---------------------------------------------------------------------------
// verify and sweep

const std::vector<std::string> kTheorems = {"t1", "t4", "t5", "t6", "lemma1"};

struct VerifyJob {
  std::string theorem;
  std::string f;
  std::optional<std::string> h;
  fracquad::Rectangle rect{0, 1, 0, 1};
  double alpha = 1.0;
  double beta = 1.0;
  std::optional<double> p;
  std::optional<double> s;
  certify::CertifyOptions options;
};

struct RowResult {
  std::optional<ChainReport> chain;
  std::optional<BoundReport> bound;
  std::optional<LemmaReport> lemma;
  std::string error;
  bool pass() const {
    if (chain) return chain->pass;
    if (bound) return bound->pass;
    if (lemma) return lemma->pass;
    return false;
  }
  const std::vector<std::string>& notes() const {
    static const std::vector<std::string> none;
    if (chain) return chain->notes;
    if (bound) return bound->notes;
    if (lemma) return lemma->notes;
    return none;
  }
};

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const DivergentMomentError*>(&e)) return "divergent moment";
  if (dynamic_cast<const NonConvergenceError*>(&e)) return "nonconvergence";
  if (dynamic_cast<const EvaluationError*>(&e)) return "evaluation error";
  if (dynamic_cast<const StepUnderflowError*>(&e)) return "step underflow";
  if (dynamic_cast<const DomainError*>(&e)) return "domain error";
  return "error";
}

// Exponent carried by builtin:powersum or power:<s>, if any.
std::optional<double> spec_exponent(const std::string& spec, const std::string& prefix) {
  if (spec.rfind(prefix, 0) != 0) return std::nullopt;
  const std::string rest = spec.substr(prefix.size());
  char* end = nullptr;
  const double v = std::strtod(rest.c_str(), &end);
  if (rest.empty() || *end != '\0') return std::nullopt;
  return v;
}

RowResult compute_row(const VerifyJob& job) {
  RowResult row;
  {
    const auto f = funcspace::BivariateFunction::from_spec(job.f);
    const fracquad::FracOrder order(job.alpha, job.beta);
    const auto h = job.h ? std::optional(hweights::HWeight::parse(*job.h)) : std::nullopt;
    if (job.theorem == "t1") {
      row.chain = certify::hadamard_chain_convex(f, order, job.rect, job.options);
    } else if (job.theorem == "t4") {
      row.chain = certify::hadamard_chain(f, *h, order, job.rect, job.options);
    } else if (job.theorem == "t5") {
      row.bound = certify::trapezoid_bound(f, *h, order, job.rect, job.options);
    } else if (job.theorem == "t6") {
      row.bound = certify::holder_bound(f, *h, order, job.rect,
                                        certify::HolderExponents::from_p(*job.p), job.options);
    } else {
      row.lemma = certify::identity_residual(f, order, job.rect, job.options);
    }
  }
  return row;
}

// Sweep rows record errors instead of aborting.
RowResult run_row(const VerifyJob& job) {
  try {
    return compute_row(job);
  } catch (const Error& e) {
    RowResult row;
    row.error = error_kind(e) + ": " + e.what();
    return row;
  }
}

VerifyJob resolve_verify(const RunConfig& c) {
  VerifyJob job;
  job.theorem = require(c.theorem, "--theorem");
  if (std::find(kTheorems.begin(), kTheorems.end(), job.theorem) == kTheorems.end()) {
    throw UsageError("expected one of t1, t4, t5, t6, lemma1, got '" + job.theorem + "'",
                     "--theorem");
  }
  job.f = require(c.f, "--f");
  for_flag("--f", [&] { return funcspace::BivariateFunction::from_spec(job.f); });
  const bool needs_h = job.theorem == "t4" || job.theorem == "t5" || job.theorem == "t6";
  if (needs_h && !c.h) throw UsageError("theorem " + job.theorem + " requires an h weight", "--h");
  if (!needs_h && c.h) throw UsageError("theorem " + job.theorem + " takes no h weight", "--h");
  if (c.h) {
    job.h = *c.h;
    for_flag("--h", [&] { return hweights::HWeight::parse(*c.h); });
  }
  if (job.theorem == "t6") {
    job.p = require(c.p, "--p");
    for_flag("--p", [&] { return certify::HolderExponents::from_p(*job.p); });
  } else if (c.p) {
    throw UsageError("only theorem t6 takes a Holder exponent", "--p");
  }
  job.rect = resolve_rect(c, true);
  job.alpha = require_positive(c.alpha, "--alpha");
  job.beta = require_positive(c.beta, "--beta");
  job.options = resolve_certify(c);
  job.s = spec_exponent(job.f, "builtin:powersum:");
  if (!job.s && job.h) job.s = spec_exponent(*job.h, "power:");
  return job;
}

json job_config(const VerifyJob& job) {
  json j;
  j["theorem"] = job.theorem;
  j["f"] = job.f;
  j["h"] = job.h ? json(*job.h) : json(nullptr);
  j["rect"] = {job.rect.a(), job.rect.b(), job.rect.c(), job.rect.d()};
  j["alpha"] = job.alpha;
  j["beta"] = job.beta;
  j["p"] = number_or_null(job.p);
  j["abs_tol"] = job.options.abs_tol;
  j["step"] = job.options.fd.step_relative;
  j["reverse"] = job.options.reverse;
  j["quadrature"] = quadrature_json(job.options.quadrature);
  return j;
}

json row_json(const VerifyJob& job, const RowResult& row) {
  json j;
  j["theorem"] = job.theorem;
  j["alpha"] = job.alpha;
  j["beta"] = job.beta;
  j["s"] = number_or_null(job.s);
  j["p"] = number_or_null(job.p);
  if (row.chain) {
    const auto& c = *row.chain;
    j["left"] = c.left;
    j["middle"] = c.middle;
    j["right"] = c.right;
    j["gap_lm"] = c.gap_lm;
    j["gap_mr"] = c.gap_mr;
    j["tolerance"] = c.tolerance;
    j["quadrature_error"] = c.quadrature_error;
  } else if (row.bound) {
    const auto& b = *row.bound;
    j["lhs"] = b.lhs_abs;
    j["rhs"] = b.rhs;
    j["slack"] = b.slack;
    j["a_term"] = b.a_term;
    j["corner_derivatives"] = b.corner_derivatives;
    j["corner_weights"] = b.corner_weights;
    j["tolerance"] = b.tolerance;
    j["quadrature_error"] = b.quadrature_error;
  } else if (row.lemma) {
    const auto& l = *row.lemma;
    j["lhs"] = l.lhs;
    j["rhs"] = l.rhs;
    j["residual"] = l.residual;
    j["quadrature_error"] = l.quadrature_error;
  }
  j["pass"] = row.error.empty() ? json(row.pass()) : json(nullptr);
  j["error"] = row.error.empty() ? json(nullptr) : json(row.error);
  j["notes"] = row.notes();
  return j;
}

const std::vector<std::string> kCsvColumns = {
    "index", "theorem", "alpha", "beta", "s", "p", "left", "middle", "right", "gap_lm",
    "gap_mr", "lhs", "rhs", "slack", "a_term", "residual", "pass", "quadrature_error", "error",
    "notes"};

std::vector<std::string> row_csv(std::size_t index, const VerifyJob& job, const RowResult& row) {
  std::optional<double> left, middle, right, gap_lm, gap_mr, lhs, rhs, slack, a_term, residual,
      qerr;
  if (row.chain) {
    left = row.chain->left;
    middle = row.chain->middle;
    right = row.chain->right;
    gap_lm = row.chain->gap_lm;
    gap_mr = row.chain->gap_mr;
    qerr = row.chain->quadrature_error;
  } else if (row.bound) {
    lhs = row.bound->lhs_abs;
    rhs = row.bound->rhs;
    slack = row.bound->slack;
    a_term = row.bound->a_term;
    qerr = row.bound->quadrature_error;
  } else if (row.lemma) {
    lhs = row.lemma->lhs;
    rhs = row.lemma->rhs;
    residual = row.lemma->residual;
    qerr = row.lemma->quadrature_error;
  }
  return {std::to_string(index),
          job.theorem,
          fmt17(job.alpha),
          fmt17(job.beta),
          csv_number(job.s),
          csv_number(job.p),
          csv_number(left),
          csv_number(middle),
          csv_number(right),
          csv_number(gap_lm),
          csv_number(gap_mr),
          csv_number(lhs),
          csv_number(rhs),
          csv_number(slack),
          csv_number(a_term),
          csv_number(residual),
          row.error.empty() ? bool_text(row.pass()) : std::string(),
          csv_number(qerr),
          row.error,
          join(row.notes(), "; ")};
}

std::string row_text(const VerifyJob& job, const RowResult& row) {
  std::ostringstream os;
  auto line = [&os](const char* name, double v) {
    os << "  " << name << std::string(18 - std::string(name).size(), ' ') << fmt15(v) << "\n";
  };
  os << "theorem " << job.theorem << " (alpha " << fmt15(job.alpha) << ", beta "
     << fmt15(job.beta);
  if (job.s) os << ", s " << fmt15(*job.s);
  if (job.p) os << ", p " << fmt15(*job.p);
  os << "): ";
  if (!row.error.empty()) {
    os << "error: " << row.error << "\n";
    return os.str();
  }
  os << (row.pass() ? "pass" : "FAIL") << "\n";
  if (row.chain) {
    const auto& c = *row.chain;
    line("left", c.left);
    line("middle", c.middle);
    line("right", c.right);
    line("gap_lm", c.gap_lm);
    line("gap_mr", c.gap_mr);
    line("quadrature_error", c.quadrature_error);
    line("tolerance", c.tolerance);
  } else if (row.bound) {
    const auto& b = *row.bound;
    line("lhs", b.lhs_abs);
    line("rhs", b.rhs);
    line("slack", b.slack);
    line("a_term", b.a_term);
    line("quadrature_error", b.quadrature_error);
    line("tolerance", b.tolerance);
  } else if (row.lemma) {
    const auto& l = *row.lemma;
    line("lhs", l.lhs);
    line("rhs", l.rhs);
    line("residual", l.residual);
    line("quadrature_error", l.quadrature_error);
  }
  for (const auto& n : row.notes()) os << "  note: " << n << "\n";
  return os.str();
}

Report verify(const RunConfig& c) {
  const VerifyJob job = resolve_verify(c);
  const RowResult row = compute_row(job);
  Report r;
  r.config["command"] = "verify";
  const json job_json = job_config(job);
  for (const auto& [k, v] : job_json.items()) r.config[k] = v;
  r.result = row_json(job, row);
  r.text = row_text(job, row);
  r.csv_header = kCsvColumns;
  r.csv_rows = {row_csv(0, job, row)};
  r.exit_code = row.pass() ? kSuccess : kViolation;
  return r;
}

struct Axis {
  std::string name;
  std::vector<double> values;
};

Axis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw UsageError("expected name=v1,v2,... got '" + text + "'", "--axis");
  Axis axis{text.substr(0, eq), {}};
  static const std::vector<std::string> names = {"alpha", "beta", "s", "p"};
  if (std::find(names.begin(), names.end(), axis.name) == names.end()) {
    throw UsageError("axis must be one of alpha, beta, s, p, got '" + axis.name + "'", "--axis");
  }
  std::stringstream list(text.substr(eq + 1));
  std::string item;
  while (std::getline(list, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !std::isfinite(v)) {
      throw UsageError("invalid value '" + item + "' for axis " + axis.name, "--axis");
    }
    const bool legal = axis.name == "s" ? (v > 0.0 && v <= 1.0)
                       : axis.name == "p" ? v > 1.0
                                          : v > 0.0;
    if (!legal) throw UsageError("value " + item + " outside the legal range of " + axis.name, "--axis");
    axis.values.push_back(v);
  }
  if (axis.values.empty()) throw UsageError("axis " + axis.name + " has no values", "--axis");
  return axis;
}

Report sweep(const RunConfig& c) {
  if (c.axis.empty()) throw UsageError("a sweep needs at least one axis", "--axis");
  std::vector<Axis> axes;
  for (const auto& a : c.axis) {
    Axis axis = parse_axis(a);
    for (const auto& other : axes) {
      if (other.name == axis.name) throw UsageError("axis " + axis.name + " given twice", "--axis");
    }
    axes.push_back(std::move(axis));
  }

  RunConfig base = c;
  // Axes may stand in for otherwise required values.
  for (const auto& axis : axes) {
    if (axis.name == "alpha" && !base.alpha) base.alpha = axis.values.front();
    if (axis.name == "beta" && !base.beta) base.beta = axis.values.front();
    if (axis.name == "p" && !base.p) base.p = axis.values.front();
  }
  const VerifyJob proto = resolve_verify(base);
  for (const auto& axis : axes) {
    if (axis.name == "p" && proto.theorem != "t6") {
      throw UsageError("axis p applies only to theorem t6", "--axis");
    }
    if (axis.name == "s" && !spec_exponent(proto.f, "builtin:powersum:") &&
        !(proto.h && spec_exponent(*proto.h, "power:"))) {
      throw UsageError("axis s needs f = builtin:powersum:<s> or h = power:<s>", "--axis");
    }
  }

  // Rows in lexicographic axis order, first axis outermost.
  std::vector<VerifyJob> jobs;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    VerifyJob job = proto;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const double v = axes[i].values[idx[i]];
      const std::string& name = axes[i].name;
      if (name == "alpha") job.alpha = v;
      if (name == "beta") job.beta = v;
      if (name == "p") job.p = v;
      if (name == "s") {
        job.s = v;
        if (spec_exponent(job.f, "builtin:powersum:")) job.f = "builtin:powersum:" + fmt17(v);
        if (job.h && spec_exponent(*job.h, "power:")) job.h = "power:" + fmt17(v);
      }
    }
    jobs.push_back(std::move(job));
    int k = static_cast<int>(axes.size()) - 1;
    while (k >= 0 && ++idx[k] == axes[k].values.size()) idx[k--] = 0;
    if (k < 0) break;
  }

  std::vector<RowResult> rows(jobs.size());
  unsigned workers = c.jobs.value_or(0);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(jobs.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) rows[i] = run_row(jobs[i]);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  Report r;
  r.config["command"] = "sweep";
  const json proto_json = job_config(proto);
  for (const auto& [k, v] : proto_json.items()) r.config[k] = v;
  json axes_json = json::array();
  for (const auto& a : axes) axes_json.push_back({{"name", a.name}, {"values", a.values}});
  r.config["axes"] = axes_json;

  json rows_json = json::array();
  std::ostringstream text;
  bool any_failure = false;
  std::size_t errors = 0;
  r.csv_header = kCsvColumns;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    json row = {{"index", i}};
    row.update(row_json(jobs[i], rows[i]));
    rows_json.push_back(row);
    r.csv_rows.push_back(row_csv(i, jobs[i], rows[i]));
    text << "[" << i << "] " << row_text(jobs[i], rows[i]);
    if (!rows[i].error.empty()) {
      ++errors;
    } else if (!rows[i].pass()) {
      any_failure = true;
    }
  }
  r.result["rows"] = rows_json;
  r.result["row_count"] = jobs.size();
  r.result["error_rows"] = errors;
  r.text = text.str();
  r.exit_code = any_failure ? kViolation : kSuccess;
  return r;
}

// ---------------------------------------------------------------------------
// Command line

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--format", c.format, "text, json or csv");
  sub->add_option("--output", c.output, "write the report to this file");
  sub->add_option("--nodes", c.nodes, "quadrature nodes per axis (default 64)");
  sub->add_option("--tol", c.tol, "target relative tolerance (default 1e-9)");
  sub->add_option("--scheme", c.scheme, "graded-composite or gauss-legendre-desingularized");
}

void add_verify_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--theorem", c.theorem, "t1, t4, t5, t6 or lemma1");
  sub->add_option("--f", c.f, "expression in x, y or builtin:name[:params]");
  sub->add_option("--rect", c.rect, "a b c d")->expected(4);
  sub->add_option("--alpha", c.alpha);
  sub->add_option("--beta", c.beta);
  sub->add_option("--h", c.h, "identity, power:<s>, one, gl or table:<path>");
  sub->add_option("--p", c.p, "Holder exponent p > 1 (t6)");
  sub->add_option("--abs-tol", c.abs_tol, "absolute pass tolerance floor (default 1e-8)");
  sub->add_option("--step", c.step, "relative finite-difference step (default 1e-5)");
  sub->add_flag("--reverse", c.reverse, "swap the pass direction");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional Hermite-Hadamard certification toolkit", "hhcert"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(0, 1);
  RunConfig cli;
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "JSON file with the same field names as the flags");

  CLI::App* fi = app.add_subcommand("frac-integrate", "Riemann-Liouville fractional integral");
  add_common(fi, cli);
  fi->add_option("--f1", cli.f1, "univariate expression in t");
  fi->add_option("--f", cli.f, "bivariate expression or builtin");
  fi->add_option("--alpha", cli.alpha);
  fi->add_option("--beta", cli.beta);
  fi->add_option("--side", cli.side, "left or right");
  fi->add_option("--interval", cli.interval, "lo hi")->expected(2);
  fi->add_option("--at", cli.at);
  fi->add_option("--corner", cli.corner, "a+c+, a+d-, b-c+ or b-d-");
  fi->add_option("--rect", cli.rect, "a b c d")->expected(4);
  fi->add_option("--at-xy", cli.at_xy, "x y")->expected(2);

  CLI::App* ch = app.add_subcommand("check-hconvex", "sampled coordinate h-convexity check");
  ch->add_option("--format", cli.format);
  ch->add_option("--output", cli.output);
  ch->add_option("--f", cli.f);
  ch->add_option("--h", cli.h);
  ch->add_option("--rect", cli.rect)->expected(4);
  ch->add_option("--grid", cli.grid, "points per axis (default 9)");
  ch->add_option("--check-tol", cli.check_tol, "violation tolerance");
  ch->add_option("--jobs", cli.jobs);
  ch->add_flag("--reverse", cli.reverse, "check h-concavity instead");
  ch->add_flag("!--no-endpoints", cli.endpoints, "skip the t,k in {0,1} spot check");

  CLI::App* ve = app.add_subcommand("verify", "evaluate one inequality or identity");
  add_common(ve, cli);
  add_verify_options(ve, cli);

  CLI::App* sw = app.add_subcommand("sweep", "run verify over a parameter grid");
  add_common(sw, cli);
  add_verify_options(sw, cli);
  sw->add_option("--axis", cli.axis, "name=v1,v2,... over alpha, beta, s or p (repeatable)");
  sw->add_option("--jobs", cli.jobs, "concurrent rows (default: hardware threads)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "hhcert: usage error: " << e.what() << "\n";
    return kUsage;
  }
  for (CLI::App* sub : {fi, ch, ve, sw}) {
    if (sub->parsed()) cli.command = sub->get_name();
  }

  RunConfig config;
  std::string format = "text";
  try {
    config = merge(config_path ? load_config(*config_path) : RunConfig{}, cli);
    if (config.command.empty()) {
      throw UsageError("no command given; expected frac-integrate, check-hconvex, verify or sweep");
    }
    if (std::find(kCommands.begin(), kCommands.end(), config.command) == kCommands.end()) {
      throw UsageError("unknown command '" + config.command + "'", "--config");
    }
    format = resolve_format(config);
  } catch (const UsageError& e) {
    err << "hhcert: usage error: " << (e.flag().empty() ? "" : e.flag() + ": ") << e.what()
        << "\n";
    return kUsage;
  }

  Report report;
  try {
    if (config.command == "frac-integrate") report = frac_integrate(config);
    if (config.command == "check-hconvex") report = check_hconvex(config);
    if (config.command == "verify") report = verify(config);
    if (config.command == "sweep") report = sweep(config);
  } catch (const UsageError& e) {
    err << "hhcert: usage error: " << (e.flag().empty() ? "" : e.flag() + ": ") << e.what()
        << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "hhcert: numerical error: " << e.what() << "\n";
    return kNumerical;
  }

  const std::string rendered = render(report, format);
  if (config.output) {
    std::ofstream file(*config.output, std::ios::binary);
    if (!file) {
      err << "hhcert: usage error: --output: cannot write '" << *config.output << "'\n";
      return kUsage;
    }
    file << rendered;
  } else {
    out << rendered;
  }
  return report.exit_code;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace hhcert::cli
