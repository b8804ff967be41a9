#pragma once

// Weight functions h on (0,1) and a sampled check of coordinate
// h-convexity:
//
//   f(t x + (1-t) y, k u + (1-k) w)
//       <= h(t) h(k) f(x,u) + h(1-t) h(k) f(y,u)
//        + h(t) h(1-k) f(x,w) + h(1-t) h(1-k) f(y,w).

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hhcert/bivariate.hpp"
#include "hhcert/fracquad.hpp"

namespace hhcert::hweights {

enum class Family { Identity, Power, One, GodunovaLevin, Table };

class HWeight {
 public:
  static HWeight identity();
  /// h(t) = t^s, 0 < s <= 1.
  static HWeight power(double s);
  static HWeight one();
  /// h(t) = 1/t.
  static HWeight godunova_levin();
  /// Piecewise-linear through (t_i, h_i), constant beyond the first and last
  /// knots. Requires >= 2 knots, strictly increasing t_i in [0,1], h_i > 0.
  static HWeight table(std::vector<std::pair<double, double>> knots, std::string source = {});
  /// Reads a table file: one "t h" pair per line, separated by whitespace or
  /// a comma; '#' starts a comment.
  static HWeight load_table(const std::string& path);
  /// "identity", "power:<s>", "one", "gl" or "table:<path>".
  static HWeight parse(std::string_view text);

  Family family() const noexcept { return family_; }
  /// Exponent of the power family (1 for identity).
  double exponent() const noexcept { return s_; }

  /// h(t) for 0 < t < 1. Throws DomainError for godunova-levin at t in
  /// {0,1} and OutOfRangeError for any other t outside (0,1).
  double operator()(double t) const;

  /// h(0) or h(1) when finite, nullopt otherwise (godunova-levin at 0).
  std::optional<double> endpoint_value(double t) const;

  /// h on the closed interval [0,1]; +inf where h is unbounded.
  double at_closed(double t) const;

  bool finite_at_endpoints() const noexcept { return family_ != Family::GodunovaLevin; }

  /// Text form accepted by parse ("table:<path>" for loaded tables).
  std::string describe() const;

  const std::vector<std::pair<double, double>>& knots() const;

 private:
  HWeight(Family family, double s) : family_(family), s_(s) {}
  double eval_unchecked(double t) const;

  Family family_;
  double s_ = 1.0;
  std::shared_ptr<const std::vector<std::pair<double, double>>> knots_;
  std::string source_;
};

struct Witness {
  double t, k;
  double x, u;  // first point (x,u)
  double y, w;  // second point (y,w)
};

struct ConvexityCertificate {
  bool pass = true;
  long long samples_checked = 0;
  /// Of samples_checked, those with t or k in {0,1}.
  long long endpoint_samples = 0;
  /// Largest deficit found when failing; 0 on a pass, even if sub-tolerance
  /// rounding deficits were seen.
  double worst_violation = 0.0;
  double tolerance = 0.0;
  bool reversed = false;
  std::optional<Witness> witness;

  /// "no violation found on N samples (sampled check, not a proof)" or a
  /// description of the witness.
  std::string summary() const;
};

struct ConvexityOptions {
  /// Checks the reversed inequality (h-concavity).
  bool reverse = false;
  /// Also samples t, k in {0,1} when h is finite there.
  bool endpoint_spot_check = true;
  /// Worker threads; 0 means hardware concurrency.
  unsigned jobs = 0;
};

/// Left side minus right side of the inequality above; positive values
/// violate it. Reversed for h-concavity when `reverse` is set. Uses
/// h.at_closed so t, k may be 0 or 1.
double coordinate_h_convex_deficit(const funcspace::BivariateFunction& f, const HWeight& h,
                                   const Witness& sample, bool reverse = false);

/// Sampled certificate on a grid of `grid` points per axis (grid >= 3).
/// Points of the rectangle are a + i (b-a)/(grid-1), endpoints included; t
/// and k run over the interior points i/(grid-1) of [0,1].
///
/// Default tolerance is 1e-10 (1 + max |f|) over the grid samples. For
/// families other than identity f must be nonnegative on the grid
/// (DomainError otherwise). Evaluation errors propagate with the point.
ConvexityCertificate check_coordinate_h_convex(const funcspace::BivariateFunction& f,
                                               const HWeight& h,
                                               const fracquad::Rectangle& rect, int grid,
                                               std::optional<double> tol = std::nullopt,
                                               const ConvexityOptions& options = {});

}  // namespace hhcert::hweights
