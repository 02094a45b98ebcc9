#pragma once

// Numeric checks of the discrete identities and inequalities the stability
// and error analysis rely on, plus the Taylor-type finite-difference bounds
// evaluated on trigonometric test functions with known Sobolev norms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "apkin/energy.hpp"
#include "apkin/random.hpp"
#include "apkin/spatial_grid.hpp"
#include "apkin/velocity.hpp"

namespace apkin {

/// One named check. For identities `worst` is the largest relative residual;
/// for inequalities it is the largest LHS/RHS ratio.
struct LemmaCheck {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

inline bool all_passed(const std::vector<LemmaCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const LemmaCheck& c) { return c.passed; });
}

struct LemmaSuiteOptions {
  std::uint64_t seed = 20240601;
  std::size_t trials = 100;
  std::size_t cells = 32;
  double length = 1.0;
  std::size_t velocity_nodes = 16;
  double identity_tolerance = 1e-13;
  double inequality_slack = 1e-13;
};

namespace detail {

inline double ratio_or_zero(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

// sum_i <phi psi> dx for width-1 or kinetic fields alike.
template <Staggering Where>
double weighted_sum(const StaggeredGrid& grid, const VelocityGrid* vgrid,
                    const GridField<Where>& a, const GridField<Where>& b, bool absolute) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.points(); ++k) {
    double local = 0.0;
    for (std::size_t j = 0; j < a.width(); ++j) {
      const double w = vgrid ? 0.5 * vgrid->weight(j) : 1.0;
      const double term = w * a(k, j) * b(k, j);
      local += absolute ? std::abs(term) : term;
    }
    total += local;
  }
  return total * grid.dx();
}

}  // namespace detail

/// (v^+ D^- + v^- D^+) phi = v D^c phi - (dx/2)|v| D^- D^+ phi on random kinetic fields.
inline LemmaCheck check_upwind_centered_form(const StaggeredGrid& grid, const VelocityGrid& vgrid,
                                             Lcg64& rng, std::size_t trials, double tol) {
  LemmaCheck c{"upwind-centered-form", true, 0.0, tol, ""};
  for (std::size_t t = 0; t < trials; ++t) {
    FaceKineticField phi(grid.cells(), vgrid.count());
    fill_uniform(phi, rng);
    const FaceKineticField lhs = upwind_transport(grid, vgrid, phi);
    const FaceKineticField centered = d_center(grid, phi);
    const FaceKineticField second = d_minus(grid, d_plus(grid, phi));
    double residual = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < grid.cells(); ++k)
      for (std::size_t j = 0; j < vgrid.count(); ++j) {
        const double v = vgrid.node(j);
        const double a = v * centered(k, j);
        const double b = 0.5 * grid.dx() * std::abs(v) * second(k, j);
        residual = std::max(residual, std::abs(lhs(k, j) - (a - b)));
        scale = std::max({scale, std::abs(a), std::abs(b)});
      }
    c.worst = std::max(c.worst, detail::ratio_or_zero(residual, scale));
  }
  c.passed = c.worst <= tol;
  return c;
}

/// sum (D^+ phi)^2 dx <= (4/dx^2) sum phi^2 dx.
inline LemmaCheck check_forward_difference_bound(const StaggeredGrid& grid, Lcg64& rng,
                                                 std::size_t trials, double slack) {
  LemmaCheck c{"forward-difference-bound", true, 0.0, slack, ""};
  for (std::size_t t = 0; t < trials; ++t) {
    FaceKineticField phi(grid.cells());
    fill_uniform(phi, rng);
    const FaceKineticField dp = d_plus(grid, phi);
    const double lhs = detail::weighted_sum(grid, nullptr, dp, dp, false);
    const double rhs =
        4.0 / (grid.dx() * grid.dx()) * detail::weighted_sum(grid, nullptr, phi, phi, false);
    c.worst = std::max(c.worst, detail::ratio_or_zero(lhs, rhs));
  }
  // the alternating field attains the bound
  FaceKineticField alt(grid.cells());
  for (std::size_t k = 0; k < grid.cells(); ++k) alt(k) = k % 2 == 0 ? 1.0 : -1.0;
  const FaceKineticField da = d_plus(grid, alt);
  const double sharp = detail::weighted_sum(grid, nullptr, da, da, false) /
                       (4.0 / (grid.dx() * grid.dx()) *
                        detail::weighted_sum(grid, nullptr, alt, alt, false));
  c.passed = c.worst <= 1.0 + slack;
  c.detail = "alternating field ratio " + std::to_string(sharp);
  return c;
}

/// |((v^+ D^+ + v^- D^-) psi, phi)| <= alpha |||phi|||^2 + |||  |v| D^+ psi |||^2 / (4 alpha).
inline LemmaCheck check_adjoint_upwind_estimate(const StaggeredGrid& grid,
                                                const VelocityGrid& vgrid, Lcg64& rng,
                                                std::size_t trials, double slack) {
  LemmaCheck c{"adjoint-upwind-estimate", true, 0.0, slack, ""};
  const double alphas[] = {0.1, 1.0, 10.0};
  for (std::size_t t = 0; t < trials; ++t) {
    FaceKineticField phi(grid.cells(), vgrid.count());
    FaceKineticField psi(grid.cells(), vgrid.count());
    fill_uniform(phi, rng);
    fill_uniform(psi, rng);
    const FaceKineticField dp = d_plus(grid, psi);
    const FaceKineticField dm = d_minus(grid, psi);
    FaceKineticField adjoint(grid.cells(), vgrid.count());
    FaceKineticField abs_dp(grid.cells(), vgrid.count());
    for (std::size_t k = 0; k < grid.cells(); ++k)
      for (std::size_t j = 0; j < vgrid.count(); ++j) {
        const double v = vgrid.node(j);
        adjoint(k, j) = v > 0.0 ? v * dp(k, j) : v * dm(k, j);
        abs_dp(k, j) = std::abs(v) * dp(k, j);
      }
    const double lhs = std::abs(g_inner(grid, vgrid, adjoint, phi));
    const double phi_sq = g_norm_sq(grid, vgrid, phi);
    const double dpsi_sq = g_norm_sq(grid, vgrid, abs_dp);
    for (double alpha : alphas)
      c.worst = std::max(c.worst, detail::ratio_or_zero(lhs, alpha * phi_sq + dpsi_sq / (4.0 * alpha)));
  }
  c.passed = c.worst <= 1.0 + slack;
  return c;
}

/// The three periodic summation-by-parts identities.
inline LemmaCheck check_summation_by_parts(const StaggeredGrid& grid, Lcg64& rng,
                                           std::size_t trials, double tol) {
  LemmaCheck c{"summation-by-parts", true, 0.0, tol, ""};
  for (std::size_t t = 0; t < trials; ++t) {
    CellField mu(grid.cells());
    FaceKineticField phi(grid.cells());
    FaceKineticField psi(grid.cells());
    fill_uniform(mu, rng);
    fill_uniform(phi, rng);
    fill_uniform(psi, rng);

    const CellField d0 = d_zero(grid, phi);
    const FaceKineticField dmu = delta_zero(grid, mu);
    const double r1 = std::abs(detail::weighted_sum(grid, nullptr, mu, d0, false) +
                               detail::weighted_sum(grid, nullptr, dmu, phi, false)) /
                      (detail::weighted_sum(grid, nullptr, mu, d0, true) +
                       detail::weighted_sum(grid, nullptr, dmu, phi, true));

    const FaceKineticField dm = d_minus(grid, phi);
    const FaceKineticField dp = d_plus(grid, psi);
    const double r2 = std::abs(detail::weighted_sum(grid, nullptr, psi, dm, false) +
                               detail::weighted_sum(grid, nullptr, dp, phi, false)) /
                      (detail::weighted_sum(grid, nullptr, psi, dm, true) +
                       detail::weighted_sum(grid, nullptr, dp, phi, true));

    const FaceKineticField dc = d_center(grid, phi);
    const double r3 = std::abs(detail::weighted_sum(grid, nullptr, phi, dc, false)) /
                      detail::weighted_sum(grid, nullptr, phi, dc, true);
    c.worst = std::max({c.worst, r1, r2, r3});
  }
  c.passed = c.worst <= tol;
  return c;
}

/// <v g>^2 <= (1/2) <|v| g^2> per face on random kinetic fields. The sharp
/// constant of the quadrature version is <|v|>, which exceeds 1/2 on every
/// Gauss-Legendre rule; it is reported in the detail.
inline LemmaCheck check_velocity_cauchy_schwarz(const StaggeredGrid& grid,
                                                const VelocityGrid& vgrid, Lcg64& rng,
                                                std::size_t trials, double slack) {
  LemmaCheck c{"velocity-cauchy-schwarz", true, 0.0, slack, ""};
  std::vector<double> abs_v(vgrid.count());
  for (std::size_t j = 0; j < vgrid.count(); ++j) abs_v[j] = std::abs(vgrid.node(j));
  for (std::size_t t = 0; t < trials; ++t) {
    FaceKineticField g(grid.cells(), vgrid.count());
    fill_uniform(g, rng);
    for (std::size_t k = 0; k < grid.cells(); ++k) {
      const double flux = vgrid.flux_unchecked(&g(k, 0));
      double weighted = 0.0;
      for (std::size_t j = 0; j < vgrid.count(); ++j)
        weighted += 0.5 * vgrid.weight(j) * abs_v[j] * g(k, j) * g(k, j);
      c.worst = std::max(c.worst, detail::ratio_or_zero(flux * flux, 0.5 * weighted));
    }
  }
  c.passed = c.worst <= 1.0 + slack;
  c.detail = "quadrature <|v|> = " + std::to_string(vgrid.average_unchecked(abs_v.data())) +
             ", sharp ratio bound " + std::to_string(2.0 * vgrid.average_unchecked(abs_v.data()));
  return c;
}

struct TrigTerm {
  int k = 1;
  double sin_coeff = 0.0;
  double cos_coeff = 0.0;
};

/// Periodic test function c + sum_k (a_k sin(w k x) + b_k cos(w k x)),
/// w = 2 pi / length, with exact derivatives and L2 norms on one period.
/// The periodized ramp is available as a deliberately non-smooth example.
class TestFunction {
 public:
  static TestFunction trigonometric(std::string name, double length, double constant,
                                    std::vector<TrigTerm> terms) {
    std::vector<TrigTerm> merged;
    for (const TrigTerm& t : terms) {
      if (t.k <= 0) throw InvalidArgument("test function wavenumbers must be positive");
      auto it = std::find_if(merged.begin(), merged.end(),
                             [&](const TrigTerm& m) { return m.k == t.k; });
      if (it == merged.end()) {
        merged.push_back(t);
      } else {
        it->sin_coeff += t.sin_coeff;
        it->cos_coeff += t.cos_coeff;
      }
    }
    return TestFunction(std::move(name), length, constant, std::move(merged), true);
  }

  static TestFunction sine(double length = 1.0) {
    return trigonometric("sin(2 pi x)", length, 0.0, {{1, 1.0, 0.0}});
  }

  static TestFunction two_mode(double length = 1.0) {
    return trigonometric("sin(2 pi x) + 0.2 cos(6 pi x)", length, 0.0,
                         {{1, 1.0, 0.0}, {3, 0.0, 0.2}});
  }

  static TestFunction constant(double value, double length = 1.0) {
    return trigonometric("constant", length, value, {});
  }

  /// x mod length: continuous nowhere near H^1 on the circle.
  static TestFunction periodized_ramp(double length = 1.0) {
    return TestFunction("periodized ramp", length, 0.0, {}, false);
  }

  const std::string& name() const noexcept { return name_; }
  double length() const noexcept { return length_; }
  /// True when the function is in H^3 of the circle.
  bool smooth() const noexcept { return smooth_; }

  double derivative(int order, double x) const {
    if (!smooth_) {
      const double r = x - length_ * std::floor(x / length_);
      return order == 0 ? r : order == 1 ? 1.0 : 0.0;
    }
    const double w = 2.0 * std::numbers::pi / length_;
    double sum = order == 0 ? constant_ : 0.0;
    for (const TrigTerm& t : terms_) {
      const double f = w * t.k;
      const double arg = f * x;
      const double scale = std::pow(f, order);
      // d^m/dx^m sin = sin(arg + m pi/2), cos likewise
      const double shift = order * std::numbers::pi / 2.0;
      sum += scale * (t.sin_coeff * std::sin(arg + shift) + t.cos_coeff * std::cos(arg + shift));
    }
    return sum;
  }

  double operator()(double x) const { return derivative(0, x); }

  /// ||phi^(order)||^2 over one period.
  double l2_norm_sq(int order) const {
    if (!smooth_) throw InvalidArgument("norms are not defined for " + name_);
    const double w = 2.0 * std::numbers::pi / length_;
    double sum = order == 0 ? constant_ * constant_ : 0.0;
    for (const TrigTerm& t : terms_)
      sum += 0.5 * (t.sin_coeff * t.sin_coeff + t.cos_coeff * t.cos_coeff) *
             std::pow(w * t.k, 2 * order);
    return sum * length_;
  }

  double h1_norm_sq() const { return l2_norm_sq(0) + l2_norm_sq(1); }

 private:
  TestFunction(std::string name, double length, double constant, std::vector<TrigTerm> terms,
               bool smooth)
      : name_(std::move(name)),
        length_(length),
        constant_(constant),
        terms_(std::move(terms)),
        smooth_(smooth) {
    if (!(length > 0.0)) throw InvalidArgument("test function period must be positive");
  }

  std::string name_;
  double length_;
  double constant_;
  std::vector<TrigTerm> terms_;
  bool smooth_;
};

struct BoundCheck {
  std::string clause;
  std::string function;
  std::size_t points = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool passed = false;
};

struct AppendixReport {
  bool refused = false;
  std::string reason;
  std::vector<BoundCheck> checks;

  bool all_passed() const {
    return !refused && std::all_of(checks.begin(), checks.end(),
                                   [](const BoundCheck& c) { return c.passed; });
  }
};

namespace detail {

inline BoundCheck bound(std::string clause, const TestFunction& f, std::size_t n, double lhs,
                        double rhs) {
  BoundCheck b{std::move(clause), f.name(), n, lhs, rhs, ratio_or_zero(lhs, rhs), false};
  b.passed = lhs <= rhs * (1.0 + 1e-12) + 1e-300;
  return b;
}

// max |f^(order)| over one period, sampled on a dense uniform grid that
// contains every coarse grid point used by the checks.
inline double sampled_max(const TestFunction& f, int order) {
  constexpr std::size_t samples = 1u << 16;
  double m = 0.0;
  for (std::size_t s = 0; s <= samples; ++s)
    m = std::max(m, std::abs(f.derivative(order, f.length() * static_cast<double>(s) /
                                                     static_cast<double>(samples))));
  return m;
}

}  // namespace detail

/// Space bounds, for each point count n (dx = length / n):
///   sampled-l2-bound:           sum phi(x_i)^2 dx <= 2 ||phi||_{H^1}^2          (dx <= 1)
///   one-sided-derivative-error: sum |delta phi_i - phi'(x_i)|^2 dx <= dx^2/3 ||phi''||^2
///   centered-derivative-error:  sum |delta phi_i - phi'(x_{i+1/2})|^2 dx <= dx^4/320 ||phi'''||^2
/// and time bounds on psi(t) = phi(t), t in [0, length], with step length / n:
///   time-difference-bound:       |psi(t_{n+1}) - psi(t_n)| <= dt max|psi'|
///   time-derivative-consistency: |(psi(t_{n+1}) - psi(t_n))/dt - psi'(t_n)| <= dt max|psi''|
/// Refuses functions that are not in H^3 of the circle.
inline AppendixReport verify_appendix_bounds(const std::vector<TestFunction>& functions,
                                             const std::vector<std::size_t>& point_counts) {
  AppendixReport report;
  for (const TestFunction& f : functions) {
    if (!f.smooth()) {
      report.refused = true;
      report.reason = f.name() + " is not in H^3 on the periodic domain; bounds do not apply";
      report.checks.clear();
      return report;
    }
  }
  for (const TestFunction& f : functions) {
    const double max1 = detail::sampled_max(f, 1);
    const double max2 = detail::sampled_max(f, 2);
    for (std::size_t n : point_counts) {
      if (n < 1) throw InvalidArgument("verify_appendix_bounds: point count must be positive");
      const double dx = f.length() / static_cast<double>(n);
      double sampled = 0.0;
      double one_sided = 0.0;
      double centered = 0.0;
      double time_diff = 0.0;
      double time_cons = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) * dx;
        const double xp = static_cast<double>(i + 1) * dx;
        const double xh = (static_cast<double>(i) + 0.5) * dx;
        const double fx = f(x);
        const double diff = (f(xp) - fx) / dx;
        sampled += fx * fx * dx;
        one_sided += (diff - f.derivative(1, x)) * (diff - f.derivative(1, x)) * dx;
        centered += (diff - f.derivative(1, xh)) * (diff - f.derivative(1, xh)) * dx;
        time_diff = std::max(time_diff, std::abs(f(xp) - fx));
        time_cons = std::max(time_cons, std::abs(diff - f.derivative(1, x)));
      }
      if (dx <= 1.0)
        report.checks.push_back(detail::bound("sampled-l2-bound", f, n, sampled, 2.0 * f.h1_norm_sq()));
      report.checks.push_back(detail::bound("one-sided-derivative-error", f, n, one_sided,
                                            dx * dx / 3.0 * f.l2_norm_sq(2)));
      report.checks.push_back(detail::bound("centered-derivative-error", f, n, centered,
                                            std::pow(dx, 4) / 320.0 * f.l2_norm_sq(3)));
      report.checks.push_back(detail::bound("time-difference-bound", f, n, time_diff, dx * max1));
      report.checks.push_back(
          detail::bound("time-derivative-consistency", f, n, time_cons, dx * max2));
    }
  }
  return report;
}

inline LemmaCheck summarize(const AppendixReport& report) {
  LemmaCheck c{"finite-difference-bounds", report.all_passed(), 0.0, 1.0, ""};
  if (report.refused) {
    c.detail = "refused: " + report.reason;
    return c;
  }
  for (const BoundCheck& b : report.checks) {
    if (b.ratio > c.worst) {
      c.worst = b.ratio;
      c.detail = "largest ratio: " + b.clause + " for " + b.function + " at n = " +
                 std::to_string(b.points);
    }
  }
  return c;
}

/// All discrete checks on seeded random fields, plus the finite-difference
/// bounds for sin(2 pi x) and sin(2 pi x) + 0.2 cos(6 pi x) at n = 32, 64, 128.
inline std::vector<LemmaCheck> lemma_suite(const LemmaSuiteOptions& o = {}) {
  const StaggeredGrid grid(o.cells, o.length);
  const VelocityGrid vgrid = build_velocity_grid(o.velocity_nodes, QuadratureRule::gauss_legendre);
  Lcg64 rng(o.seed);
  std::vector<LemmaCheck> out;
  out.push_back(check_upwind_centered_form(grid, vgrid, rng, o.trials, o.identity_tolerance));
  out.push_back(check_forward_difference_bound(grid, rng, o.trials, o.inequality_slack));
  out.push_back(check_adjoint_upwind_estimate(grid, vgrid, rng, o.trials, o.inequality_slack));
  out.push_back(check_summation_by_parts(grid, rng, o.trials, o.identity_tolerance));
  out.push_back(check_velocity_cauchy_schwarz(grid, vgrid, rng, o.trials, o.inequality_slack));
  out.push_back(summarize(verify_appendix_bounds(
      {TestFunction::sine(1.0), TestFunction::two_mode(1.0)}, {32, 64, 128})));
  return out;
}

}  // namespace apkin
