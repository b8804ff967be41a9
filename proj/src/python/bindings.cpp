#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>
#include <sstream>

#include "hhcert/certify.hpp"
#include "hhcert/cli.hpp"
#include "hhcert/errors.hpp"
#include "hhcert/expression.hpp"
#include "hhcert/special_functions.hpp"

namespace py = pybind11;
using namespace hhcert;

namespace {

using RectTuple = std::array<double, 4>;

template <typename Fn>
auto without_gil(Fn&& fn) {
  py::gil_scoped_release release;
  return fn();
}

fracquad::Rectangle to_rect(const RectTuple& r) { return {r[0], r[1], r[2], r[3]}; }

fracquad::QuadratureSpec quad_spec(int nodes, double tol, const std::string& scheme) {
  fracquad::QuadratureSpec q;
  q.nodes_per_axis = nodes;
  q.target_rel_tol = tol;
  q.scheme = fracquad::parse_scheme(scheme);
  q.validate();
  return q;
}

py::dict chain_dict(const certify::ChainReport& c) {
  py::dict d;
  d["left"] = c.left;
  d["middle"] = c.middle;
  d["right"] = c.right;
  d["gap_lm"] = c.gap_lm;
  d["gap_mr"] = c.gap_mr;
  d["pass"] = c.pass;
  d["quadrature_error"] = c.quadrature_error;
  d["tolerance"] = c.tolerance;
  d["notes"] = c.notes;
  return d;
}

py::dict bound_dict(const certify::BoundReport& b) {
  py::dict d;
  d["lhs_abs"] = b.lhs_abs;
  d["rhs"] = b.rhs;
  d["slack"] = b.slack;
  d["pass"] = b.pass;
  d["a_term"] = b.a_term;
  d["quadrature_error"] = b.quadrature_error;
  d["tolerance"] = b.tolerance;
  d["corner_derivatives"] = b.corner_derivatives;
  d["corner_weights"] = b.corner_weights;
  d["notes"] = b.notes;
  return d;
}

py::dict lemma_dict(const certify::LemmaReport& l) {
  py::dict d;
  d["lhs"] = l.lhs;
  d["rhs"] = l.rhs;
  d["residual"] = l.residual;
  d["quadrature_error"] = l.quadrature_error;
  d["pass"] = l.pass;
  d["notes"] = l.notes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fractional integrals and Hermite-Hadamard certification";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<OutOfRangeError>(m, "OutOfRangeError", base.ptr());
  py::register_exception<OverflowError>(m, "OverflowError", base.ptr());
  py::register_exception<NonConvergenceError>(m, "NonConvergenceError", base.ptr());
  py::register_exception<DivergentMomentError>(m, "DivergentMomentError", base.ptr());
  py::register_exception<EvaluationError>(m, "EvaluationError", base.ptr());
  py::register_exception<StepUnderflowError>(m, "StepUnderflowError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());

  m.def("gamma", &special::gamma, py::arg("x"));
  m.def("beta", &special::beta, py::arg("x"), py::arg("y"));

  m.def(
      "frac_integral_1d",
      [](const std::string& f, double order, const std::string& side, double lo, double hi,
         double at, int nodes, double tol, const std::string& scheme) {
        const auto expr = funcspace::Expression::parse(f, funcspace::VariableSet::Univariate);
        const auto spec = quad_spec(nodes, tol, scheme);
        py::gil_scoped_release release;
        const auto r = fracquad::frac_integral_1d([&expr](double t) { return expr.evaluate(t); },
                                                  order, fracquad::parse_side(side), {lo, hi},
                                                  at, spec);
        return std::pair{r.value, r.error_estimate};
      },
      py::arg("f"), py::arg("order"), py::arg("side"), py::arg("lo"), py::arg("hi"),
      py::arg("at"), py::arg("nodes") = 64, py::arg("tol") = 1e-9,
      py::arg("scheme") = "graded-composite",
      "Left or right Riemann-Liouville integral of an expression in t. Returns "
      "(value, error_estimate).");

  m.def(
      "frac_integral_2d",
      [](const std::string& f, double alpha, double beta, const std::string& corner,
         const RectTuple& rect, double x, double y, int nodes, double tol,
         const std::string& scheme) {
        const auto fn = funcspace::BivariateFunction::from_spec(f);
        const auto spec = quad_spec(nodes, tol, scheme);
        py::gil_scoped_release release;
        const auto r = fracquad::frac_integral_2d([&fn](double a, double b) { return fn(a, b); },
                                                  {alpha, beta}, fracquad::parse_corner(corner),
                                                  to_rect(rect), x, y, spec);
        return std::pair{r.value, r.error_estimate};
      },
      py::arg("f"), py::arg("alpha"), py::arg("beta"), py::arg("corner"), py::arg("rect"),
      py::arg("x"), py::arg("y"), py::arg("nodes") = 64, py::arg("tol") = 1e-9,
      py::arg("scheme") = "graded-composite");

  m.def(
      "evaluate",
      [](const std::string& src, double x, double y) {
        return funcspace::Expression::parse(src).evaluate(x, y);
      },
      py::arg("src"), py::arg("x"), py::arg("y") = 0.0);

  m.def(
      "format_expression",
      [](const std::string& src) { return funcspace::Expression::parse(src).to_string(); },
      py::arg("src"), "Parses and pretty-prints an expression in x and y.");

  m.def(
      "mixed_partial",
      [](const std::string& f, double x, double y, const RectTuple& rect, double step) {
        const auto fn = funcspace::BivariateFunction::from_spec(f);
        return funcspace::mixed_partial(fn, x, y, to_rect(rect), {step});
      },
      py::arg("f"), py::arg("x"), py::arg("y"), py::arg("rect") = RectTuple{0, 1, 0, 1},
      py::arg("step") = 1e-5);

  m.def(
      "h_eval", [](const std::string& h, double t) { return hweights::HWeight::parse(h)(t); },
      py::arg("h"), py::arg("t"));

  m.def(
      "check_coordinate_h_convex",
      [](const std::string& f, const std::string& h, const RectTuple& rect, int grid,
         std::optional<double> tol, bool reverse, unsigned jobs) {
        const auto fn = funcspace::BivariateFunction::from_spec(f);
        const auto weight = hweights::HWeight::parse(h);
        hweights::ConvexityOptions options;
        options.reverse = reverse;
        options.jobs = jobs;
        hweights::ConvexityCertificate cert;
        {
          py::gil_scoped_release release;
          cert = hweights::check_coordinate_h_convex(fn, weight, to_rect(rect), grid, tol,
                                                     options);
        }
        py::dict d;
        d["pass"] = cert.pass;
        d["samples_checked"] = cert.samples_checked;
        d["worst_violation"] = cert.worst_violation;
        d["tolerance"] = cert.tolerance;
        if (cert.witness) {
          const auto& w = *cert.witness;
          d["witness"] = py::make_tuple(w.t, w.k, py::make_tuple(w.x, w.u), py::make_tuple(w.y, w.w));
        } else {
          d["witness"] = py::none();
        }
        d["summary"] = cert.summary();
        return d;
      },
      py::arg("f"), py::arg("h"), py::arg("rect"), py::arg("grid"),
      py::arg("tol") = std::nullopt, py::arg("reverse") = false, py::arg("jobs") = 0u);

  m.def(
      "verify",
      [](const std::string& theorem, const std::string& f, const RectTuple& rect, double alpha,
         double beta, std::optional<std::string> h, std::optional<double> p, int nodes,
         double abs_tol) -> py::dict {
        const auto fn = funcspace::BivariateFunction::from_spec(f);
        const fracquad::FracOrder order(alpha, beta);
        const auto r = to_rect(rect);
        certify::CertifyOptions options;
        options.quadrature.nodes_per_axis = nodes;
        options.abs_tol = abs_tol;
        auto weight = [&h] {
          if (!h) throw UsageError("theorem requires an h weight", "h");
          return hweights::HWeight::parse(*h);
        };
        if (theorem == "t1") {
          return chain_dict(
              without_gil([&] { return certify::hadamard_chain_convex(fn, order, r, options); }));
        }
        if (theorem == "t4") {
          const auto w = weight();
          return chain_dict(
              without_gil([&] { return certify::hadamard_chain(fn, w, order, r, options); }));
        }
        if (theorem == "t5") {
          const auto w = weight();
          return bound_dict(
              without_gil([&] { return certify::trapezoid_bound(fn, w, order, r, options); }));
        }
        if (theorem == "t6") {
          const auto w = weight();
          if (!p) throw UsageError("theorem t6 requires p", "p");
          const auto pq = certify::HolderExponents::from_p(*p);
          return bound_dict(
              without_gil([&] { return certify::holder_bound(fn, w, order, r, pq, options); }));
        }
        if (theorem == "lemma1") {
          return lemma_dict(
              without_gil([&] { return certify::identity_residual(fn, order, r, options); }));
        }
        throw UsageError("unknown theorem '" + theorem + "'", "theorem");
      },
      py::arg("theorem"), py::arg("f"), py::arg("rect"), py::arg("alpha"), py::arg("beta"),
      py::arg("h") = std::nullopt, py::arg("p") = std::nullopt, py::arg("nodes") = 64,
      py::arg("abs_tol") = 1e-8);

  m.def("power_h_moment_closed_form", &certify::power_h_moment_closed_form, py::arg("gamma"),
        py::arg("s"));
  m.def("power_h_kernel_moment_closed_form", &certify::power_h_kernel_moment_closed_form,
        py::arg("gamma"), py::arg("s"));
  m.def("power_h_mean_square_closed_form", &certify::power_h_mean_square_closed_form,
        py::arg("s"));
  m.def(
      "h_moment",
      [](const std::string& h, double gamma) {
        const auto r = certify::h_moment(hweights::HWeight::parse(h), gamma);
        return std::pair{r.value, r.error_estimate};
      },
      py::arg("h"), py::arg("gamma"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool; returns (exit_code, stdout, stderr).");
}
