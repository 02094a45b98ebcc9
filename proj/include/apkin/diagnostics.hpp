#pragma once

// Energy audits, CFL sweeps, truncation-error measurement against an exact
// Fourier mode of the velocity-discrete system, and self-convergence studies.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "apkin/ap_scheme.hpp"
#include "apkin/energy.hpp"
#include "apkin/errors.hpp"
#include "apkin/spatial_grid.hpp"
#include "apkin/velocity.hpp"

namespace apkin {

inline constexpr double kEnergyTolerance = 1e-12;
inline constexpr double kZeroAverageTolerance = 1e-12;

struct EnergyAudit {
  bool monotone = true;
  double max_violation = 0.0;  // max_n (E^{n+1} - E^n) / E^n, clipped at 0
  std::size_t worst_step = 0;  // step index of E^{n+1} at the worst violation
  bool linear_growth_mode = false;
  double growth_fit = 0.0;     // smallest G with E^n <= E^0 + t_n G
  std::vector<EnergyRecord> records;
};

/// monotone iff E^{n+1} <= E^n (1 + tolerance) for every n. With a source the
/// audit also reports the linear growth fit.
inline EnergyAudit audit_energy(std::vector<EnergyRecord> records, bool source_free = true,
                                double tolerance = kEnergyTolerance) {
  EnergyAudit a;
  a.linear_growth_mode = !source_free;
  for (std::size_t n = 0; n + 1 < records.size(); ++n) {
    const double e0 = records[n].energy;
    const double e1 = records[n + 1].energy;
    if (!(e1 <= e0 * (1.0 + tolerance))) a.monotone = false;
    double violation = 0.0;
    if (!std::isfinite(e1)) {
      violation = std::numeric_limits<double>::infinity();
    } else if (e1 > e0) {
      violation = e0 > 0.0 ? (e1 - e0) / e0 : std::numeric_limits<double>::infinity();
    }
    if (violation > a.max_violation) {
      a.max_violation = violation;
      a.worst_step = records[n + 1].step_index;
    }
  }
  if (a.linear_growth_mode && !records.empty()) {
    const EnergyRecord& first = records.front();
    for (std::size_t n = 1; n < records.size(); ++n) {
      const double elapsed = records[n].time - first.time;
      if (elapsed > 0.0)
        a.growth_fit = std::max(a.growth_fit, (records[n].energy - first.energy) / elapsed);
    }
  }
  a.records = std::move(records);
  return a;
}

struct DiagnosticsReport {
  EnergyAudit energy;
  double max_zero_average_defect = 0.0;
  bool zero_average_preserved = true;
  double dt = 0.0;
  double dt_max = 0.0;
  bool exceeds_cfl = false;
  bool initial_layer = false;
};

inline DiagnosticsReport diagnose(const RunResult& run, bool source_free) {
  DiagnosticsReport d;
  d.energy = audit_energy(run.energy, source_free);
  d.max_zero_average_defect = run.max_zero_average_defect;
  d.zero_average_preserved = run.max_zero_average_defect <= kZeroAverageTolerance;
  d.dt = run.dt;
  d.dt_max = run.dt_max;
  d.exceeds_cfl = run.exceeds_cfl;
  d.initial_layer = run.initial_layer;
  return d;
}

/// Least-squares slope of log(y) against log(x).
inline double fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("fit_power_law: need at least two matching points");
  double mx = 0.0;
  double my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw InvalidArgument("fit_power_law: values must be positive");
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct SweepRow {
  double multiplier = 0.0;
  double dt = 0.0;
  bool monotone = false;
  double growth_rate = 0.0;  // slope of log E^n against n over the last half
  double max_violation = 0.0;
  bool diverged = false;
};

/// Runs `steps` steps at dt = m dt_max for every multiplier m.
inline std::vector<SweepRow> cfl_sweep(const ApScheme& scheme, const MicroMacroState& initial,
                                       const std::vector<double>& multipliers, std::size_t steps) {
  if (steps < 2) throw InvalidArgument("cfl_sweep: need at least 2 steps");
  const double dt_max = scheme.cfl().dt_max;
  std::vector<SweepRow> rows;
  for (double m : multipliers) {
    if (!(m > 0.0)) throw InvalidArgument("cfl_sweep: multipliers must be positive");
    SweepRow row;
    row.multiplier = m;
    row.dt = m * dt_max;
    std::vector<EnergyRecord> records;
    MicroMacroState s = initial;
    records.push_back(energy(scheme.grid(), scheme.vgrid(), s, scheme.epsilon()));
    try {
      for (std::size_t n = 0; n < steps; ++n) {
        s = scheme.step(s, row.dt);
        records.push_back(energy(scheme.grid(), scheme.vgrid(), s, scheme.epsilon()));
        if (!std::isfinite(records.back().energy)) throw NumericalFailure("energy overflow");
      }
    } catch (const NumericalFailure&) {
      row.diverged = true;
    }
    const EnergyAudit audit = audit_energy(records);
    row.max_violation = audit.max_violation;
    row.monotone = audit.monotone && !row.diverged;
    if (row.diverged) {
      row.growth_rate = std::numeric_limits<double>::infinity();
    } else {
      std::vector<double> idx;
      std::vector<double> loge;
      for (std::size_t n = steps / 2; n < records.size(); ++n) {
        idx.push_back(static_cast<double>(n));
        loge.push_back(std::log(std::max(records[n].energy, std::numeric_limits<double>::min())));
      }
      double mi = 0.0;
      double ml = 0.0;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        mi += idx[i];
        ml += loge[i];
      }
      mi /= static_cast<double>(idx.size());
      ml /= static_cast<double>(idx.size());
      double sxy = 0.0;
      double sxx = 0.0;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        sxy += (idx[i] - mi) * (loge[i] - ml);
        sxx += (idx[i] - mi) * (idx[i] - mi);
      }
      row.growth_rate = sxy / sxx;
    }
    rows.push_back(row);
  }
  return rows;
}

/// True when every row with multiplier <= 1 is monotone; larger multipliers
/// are reported only.
inline bool sweep_within_bound_monotone(const std::vector<SweepRow>& rows) {
  return std::all_of(rows.begin(), rows.end(),
                     [](const SweepRow& r) { return r.multiplier > 1.0 || r.monotone; });
}

/// Exact solution callbacks; g is indexed by velocity node because the
/// reference is exact for the velocity-discrete system only.
struct ExactSolution {
  std::function<double(double t, double x)> rho;
  std::function<double(double t, double x, std::size_t j)> g;
};

/// A single Fourier mode rho = Re(exp(lambda t + i k x)), g = Re(g_hat exp(lambda t + i k x))
/// solving the velocity-discrete micro-macro system with constant sigma and
/// no absorption or source. lambda is the least damped mode with <g_hat> = 0.
struct FourierMode {
  double k = 0.0;
  std::complex<double> lambda;
  std::vector<std::complex<double>> g_hat;  // rho_hat = 1

  double rho(double t, double x) const {
    return std::real(std::exp(lambda * t + std::complex<double>(0.0, k * x)));
  }
  double g(double t, double x, std::size_t j) const {
    return std::real(g_hat[j] * std::exp(lambda * t + std::complex<double>(0.0, k * x)));
  }
  ExactSolution solution() const {
    return {[m = *this](double t, double x) { return m.rho(t, x); },
            [m = *this](double t, double x, std::size_t j) { return m.g(t, x, j); }};
  }
};

namespace detail {

// A(lambda) y = eps^2 lambda y + i eps k (I - <.>)(v y) - sigma L y on
// mean-zero y; returns y = A^{-1} v through the bordered system.
inline Eigen::VectorXcd resolvent_v(const CollisionOperator& op, double eps, double sigma,
                                    double k, std::complex<double> lambda) {
  const VelocityGrid& vg = op.grid();
  const auto n = static_cast<Eigen::Index>(vg.count());
  const std::complex<double> ik(0.0, eps * k);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double vj = vg.node(static_cast<std::size_t>(j));
      const double wj = 0.5 * vg.weight(static_cast<std::size_t>(j));
      m(i, j) = -sigma * op.matrix()(i, j) - ik * wj * vj;
    }
    m(i, i) += eps * eps * lambda + ik * vg.node(static_cast<std::size_t>(i));
    m(i, n) = 1.0;
    m(n, i) = 0.5 * vg.weight(static_cast<std::size_t>(i));
  }
  Eigen::VectorXcd rhs(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = vg.node(static_cast<std::size_t>(i));
  rhs(n) = 0.0;
  return m.fullPivLu().solve(rhs).head(n);
}

inline std::complex<double> dispersion(const CollisionOperator& op, double eps, double sigma,
                                       double k, std::complex<double> lambda) {
  const Eigen::VectorXcd y = resolvent_v(op, eps, sigma, k, lambda);
  const VelocityGrid& vg = op.grid();
  std::complex<double> flux = 0.0;
  for (std::size_t j = 0; j < vg.count(); ++j)
    flux += 0.5 * vg.weight(j) * vg.node(j) * y(static_cast<Eigen::Index>(j));
  return lambda + k * k * flux;
}

}  // namespace detail

/// Least damped mean-zero Fourier mode with wavenumber 2 pi mode / length.
/// The dense eigenvalue guess is polished by a secant iteration on the scalar
/// dispersion relation, which stays well conditioned for small eps.
inline FourierMode fourier_mode(const CollisionOperator& op, double eps, double sigma,
                                double length, int mode = 1) {
  if (!(eps > 0.0) || !(sigma > 0.0) || !(length > 0.0) || mode <= 0)
    throw InvalidArgument("fourier_mode: eps, sigma, length and mode must be positive");
  const VelocityGrid& vg = op.grid();
  const auto n = static_cast<Eigen::Index>(vg.count());
  const double k = 2.0 * std::numbers::pi * mode / length;
  const std::complex<double> ik(0.0, k);

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double vj = vg.node(static_cast<std::size_t>(j));
    const double wj = 0.5 * vg.weight(static_cast<std::size_t>(j));
    a(0, j + 1) = -ik * wj * vj;
    a(j + 1, 0) = -ik * vj / (eps * eps);
    for (Eigen::Index l = 0; l < n; ++l) {
      const double vl = vg.node(static_cast<std::size_t>(l));
      const double wl = 0.5 * vg.weight(static_cast<std::size_t>(l));
      a(j + 1, l + 1) = sigma / (eps * eps) * op.matrix()(j, l) + ik / eps * wl * vl;
    }
    a(j + 1, j + 1) -= ik / eps * vj;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a);
  if (es.info() != Eigen::Success) throw NumericalFailure("fourier_mode: eigen solver failed");

  std::complex<double> guess;
  bool found = false;
  for (Eigen::Index c = 0; c < n + 1; ++c) {
    const Eigen::VectorXcd u = es.eigenvectors().col(c);
    std::complex<double> mean = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) mean += 0.5 * vg.weight(static_cast<std::size_t>(j)) * u(j + 1);
    if (std::abs(mean) > 1e-6 * u.norm() || std::abs(u(0)) < 1e-8 * u.norm()) continue;
    const std::complex<double> lam = es.eigenvalues()(c);
    if (!found || lam.real() > guess.real()) {
      guess = lam;
      found = true;
    }
  }
  if (!found) throw NumericalFailure("fourier_mode: no mean-zero mode found");

  std::complex<double> x0 = guess;
  std::complex<double> x1 = guess * (1.0 + 1e-7) + 1e-9;
  std::complex<double> f0 = detail::dispersion(op, eps, sigma, k, x0);
  std::complex<double> f1 = detail::dispersion(op, eps, sigma, k, x1);
  for (int it = 0; it < 60 && std::abs(f1) > 1e-15 * (1.0 + std::abs(x1)); ++it) {
    if (f1 == f0) break;
    const std::complex<double> x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = detail::dispersion(op, eps, sigma, k, x1);
  }
  if (!(std::abs(f1) <= 1e-10 * (1.0 + std::abs(x1))))
    throw NumericalFailure("fourier_mode: dispersion relation did not converge");

  FourierMode m;
  m.k = k;
  m.lambda = x1;
  const Eigen::VectorXcd y = detail::resolvent_v(op, eps, sigma, k, x1);
  m.g_hat.resize(vg.count());
  for (std::size_t j = 0; j < vg.count(); ++j) m.g_hat[j] = -ik * y(static_cast<Eigen::Index>(j));
  return m;
}

struct TruncationReport {
  double a_norm = 0.0;
  double b_norm = 0.0;
  double dt = 0.0;
  double dx = 0.0;
  double epsilon = 0.0;
  double time = 0.0;  // t_n
  /// (1 + eps^2) dt + dx^2 + eps dx
  double model() const { return (1.0 + epsilon * epsilon) * dt + dx * dx + epsilon * dx; }
};

/// Residuals of the scheme with the exact solution inserted at t_n = n dt:
///   a_i = (rho(t_{n+1}) - rho(t_n))/dt + D^0 <v g(t_{n+1})> + sigma_A rho - S
///   b_{i+1/2} = eps^2 (g(t_{n+1}) - g(t_n))/dt + eps (I - <.>)(v^+ D^- + v^- D^+) g(t_n)
///               - sigma L g(t_{n+1}) + v delta^0 rho(t_n)
/// with rho at cells and g at faces. sigma_A rho uses t_{n+1} in implicit
/// absorption mode and t_n in explicit mode.
inline TruncationReport truncation_errors(const ExactSolution& exact, const ApScheme& scheme,
                                          double dt, std::size_t n) {
  if (!(dt > 0.0)) throw InvalidArgument("truncation_errors: dt must be positive");
  const StaggeredGrid& grid = scheme.grid();
  const VelocityGrid& vg = scheme.vgrid();
  const std::size_t cells = grid.cells();
  const std::size_t nv = vg.count();
  const double eps = scheme.epsilon();
  const double t0 = static_cast<double>(n) * dt;
  const double t1 = t0 + dt;

  CellField rho0(cells);
  CellField rho1(cells);
  FaceKineticField g0(cells, nv);
  FaceKineticField g1(cells, nv);
  for (std::size_t i = 0; i < cells; ++i) {
    rho0(i) = exact.rho(t0, grid.node(i));
    rho1(i) = exact.rho(t1, grid.node(i));
    for (std::size_t j = 0; j < nv; ++j) {
      g0(i, j) = exact.g(t0, grid.face(i), j);
      g1(i, j) = exact.g(t1, grid.face(i), j);
    }
  }

  const bool implicit = scheme.problem().absorption_mode == AbsorptionMode::implicit;
  const CellField div = d_zero(grid, velocity_flux(vg, g1));
  CellField a(cells);
  for (std::size_t i = 0; i < cells; ++i)
    a(i) = (rho1(i) - rho0(i)) / dt + div(i) +
           scheme.sigma_a_nodes()[i] * (implicit ? rho1(i) : rho0(i)) - scheme.source_nodes()[i];

  const FaceKineticField transport = project_fluctuation(vg, upwind_transport(grid, vg, g0));
  const FaceKineticField grad = delta_zero(grid, rho0);
  FaceKineticField b(cells, nv);
  for (std::size_t k = 0; k < cells; ++k) {
    const std::vector<double> lg = scheme.collision().apply(g1.block(k));
    for (std::size_t j = 0; j < nv; ++j)
      b(k, j) = eps * eps * (g1(k, j) - g0(k, j)) / dt + eps * transport(k, j) -
                scheme.sigma_faces()[k] * lg[j] + vg.node(j) * grad(k);
  }

  TruncationReport r;
  r.a_norm = std::sqrt(rho_norm_sq(grid, a));
  r.b_norm = std::sqrt(g_norm_sq(grid, vg, b));
  r.dt = dt;
  r.dx = grid.dx();
  r.epsilon = eps;
  r.time = t0;
  return r;
}

/// Least-squares fit of a_norm + b_norm by c_dt (1 + eps^2) dt + c_dx2 dx^2 + c_edx eps dx,
/// plus the envelope constant max (a + b) / model.
struct TruncationFit {
  double c_dt = 0.0;
  double c_dx2 = 0.0;
  double c_edx = 0.0;
  double envelope = 0.0;
};

inline TruncationFit fit_truncation_model(const std::vector<TruncationReport>& reports) {
  if (reports.empty()) throw InvalidArgument("fit_truncation_model: no reports");
  const auto n = static_cast<Eigen::Index>(reports.size());
  Eigen::MatrixXd m(n, 3);
  Eigen::VectorXd y(n);
  TruncationFit fit;
  for (Eigen::Index i = 0; i < n; ++i) {
    const TruncationReport& r = reports[static_cast<std::size_t>(i)];
    m(i, 0) = (1.0 + r.epsilon * r.epsilon) * r.dt;
    m(i, 1) = r.dx * r.dx;
    m(i, 2) = r.epsilon * r.dx;
    y(i) = r.a_norm + r.b_norm;
    fit.envelope = std::max(fit.envelope, y(i) / r.model());
  }
  // scale columns so the fit is insensitive to their magnitudes
  Eigen::Vector3d scale;
  for (int c = 0; c < 3; ++c) {
    scale(c) = m.col(c).norm();
    if (scale(c) > 0.0) m.col(c) /= scale(c);
  }
  const Eigen::Vector3d coef = m.completeOrthogonalDecomposition().solve(y);
  fit.c_dt = scale(0) > 0.0 ? coef(0) / scale(0) : 0.0;
  fit.c_dx2 = scale(1) > 0.0 ? coef(1) / scale(1) : 0.0;
  fit.c_edx = scale(2) > 0.0 ? coef(2) / scale(2) : 0.0;
  return fit;
}

enum class CflMode { parabolic, hyperbolic, error_estimate };

inline std::string to_string(CflMode m) {
  switch (m) {
    case CflMode::parabolic: return "parabolic";
    case CflMode::hyperbolic: return "hyperbolic";
    case CflMode::error_estimate: return "error-cfl";
  }
  return "unknown";
}

/// parabolic: dx^2 sigma_min / 6; hyperbolic: (2/3) eps dx; error_estimate: their sum.
inline double study_dt(const TransportProblem& p, CflMode mode) {
  const double dx = p.grid.dx();
  const double par = dx * dx * p.sigma_min / 6.0;
  const double hyp = 2.0 / 3.0 * p.epsilon * dx;
  switch (mode) {
    case CflMode::parabolic: return par;
    case CflMode::hyperbolic: return hyp;
    case CflMode::error_estimate: return par + hyp;
  }
  return par + hyp;
}

struct ConvergenceRow {
  std::size_t cells = 0;
  double dx = 0.0;
  double dt = 0.0;
  double epsilon = 0.0;
  double err_rho = 0.0;
  double err_g = 0.0;
  double order_rho = std::numeric_limits<double>::quiet_NaN();  // against the previous row
  double order_g = std::numeric_limits<double>::quiet_NaN();
  std::size_t steps = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;  // dx strictly decreasing
  std::size_t reference_cells = 0;   // 0 for a closed-form reference
  CflMode mode = CflMode::error_estimate;
  double final_time = 0.0;

  double finest_order_rho() const { return rows.back().order_rho; }
  double finest_order_g() const { return rows.back().order_g; }
};

/// sum_i |rho_i - rho_ref| dx and eps sum_i <|g - g_ref|> dx with the
/// reference on a grid `ratio` times finer: rho by injection, g at the
/// coarse face itself (odd ratio) or as the mean of the two fine faces
/// adjacent to it (even ratio).
inline std::pair<double, double> restriction_error(const StaggeredGrid& coarse,
                                                   const VelocityGrid& vg,
                                                   const MicroMacroState& state,
                                                   const StaggeredGrid& fine,
                                                   const MicroMacroState& reference,
                                                   double epsilon) {
  if (fine.cells() % coarse.cells() != 0)
    throw InvalidArgument("restriction_error: fine grid must refine the coarse grid");
  const std::size_t r = fine.cells() / coarse.cells();
  double er = 0.0;
  double eg = 0.0;
  for (std::size_t i = 0; i < coarse.cells(); ++i) {
    er += std::abs(state.rho(i) - reference.rho(r * i));
    double face = 0.0;
    for (std::size_t j = 0; j < vg.count(); ++j) {
      double ref = 0.0;
      if (r % 2 == 1) {
        ref = reference.g(r * i + (r - 1) / 2, j);
      } else {
        ref = 0.5 * (reference.g(r * i + r / 2 - 1, j) + reference.g(r * i + r / 2, j));
      }
      face += 0.5 * vg.weight(j) * std::abs(state.g(i, j) - ref);
    }
    eg += face;
  }
  return {er * coarse.dx(), epsilon * eg * coarse.dx()};
}

/// Same norms against a closed-form solution sampled at time t.
inline std::pair<double, double> exact_error(const StaggeredGrid& grid, const VelocityGrid& vg,
                                             const MicroMacroState& state,
                                             const ExactSolution& exact, double t,
                                             double epsilon) {
  double er = 0.0;
  double eg = 0.0;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    er += std::abs(state.rho(i) - exact.rho(t, grid.node(i)));
    double face = 0.0;
    for (std::size_t j = 0; j < vg.count(); ++j)
      face += 0.5 * vg.weight(j) * std::abs(state.g(i, j) - exact.g(t, grid.face(i), j));
    eg += face;
  }
  return {er * grid.dx(), epsilon * eg * grid.dx()};
}

using ProblemFamily = std::function<TransportProblem(std::size_t cells)>;

namespace detail {

inline void require_resolutions(const std::vector<std::size_t>& cells) {
  if (cells.size() < 3)
    throw InvalidArgument("convergence_study: at least 3 resolutions are required");
  for (std::size_t i = 1; i < cells.size(); ++i)
    if (cells[i] <= cells[i - 1])
      throw InvalidArgument("convergence_study: cell counts must be strictly increasing");
}

inline void fill_orders(ConvergenceTable& table) {
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    ConvergenceRow& r = table.rows[i];
    const ConvergenceRow& p = table.rows[i - 1];
    const double ratio = p.dx / r.dx;
    r.order_rho = std::log(p.err_rho / r.err_rho) / std::log(ratio);
    r.order_g = std::log(p.err_g / r.err_g) / std::log(ratio);
  }
}

inline MicroMacroState solve_to(const ApScheme& scheme, const InitialData& f0, double final_time,
                                double dt, std::size_t& steps) {
  RunOptions opts;
  opts.record_energy = false;
  RunResult r = run(scheme, scheme.decompose(f0), final_time, FixedDt{dt}, opts);
  steps = r.steps;
  return std::move(r.final_state);
}

}  // namespace detail

/// Self-convergence against a run on a 4x finer grid than the finest entry.
inline ConvergenceTable convergence_study(const ProblemFamily& family, const InitialData& f0,
                                          double final_time, const std::vector<std::size_t>& cells,
                                          CflMode mode) {
  detail::require_resolutions(cells);
  ConvergenceTable table;
  table.mode = mode;
  table.final_time = final_time;
  table.reference_cells = 4 * cells.back();

  const ApScheme ref_scheme(family(table.reference_cells));
  std::size_t ref_steps = 0;
  const MicroMacroState reference =
      detail::solve_to(ref_scheme, f0, final_time, study_dt(ref_scheme.problem(), mode), ref_steps);

  for (std::size_t n : cells) {
    const ApScheme scheme(family(n));
    ConvergenceRow row;
    row.cells = n;
    row.dx = scheme.grid().dx();
    row.dt = study_dt(scheme.problem(), mode);
    row.epsilon = scheme.epsilon();
    const MicroMacroState s = detail::solve_to(scheme, f0, final_time, row.dt, row.steps);
    const auto [er, eg] = restriction_error(scheme.grid(), scheme.vgrid(), s, ref_scheme.grid(),
                                            reference, row.epsilon);
    row.err_rho = er;
    row.err_g = eg;
    table.rows.push_back(row);
  }
  detail::fill_orders(table);
  return table;
}

/// Convergence against a closed-form solution; the initial state samples it at t = 0.
inline ConvergenceTable convergence_study(const ProblemFamily& family, const ExactSolution& exact,
                                          double final_time, const std::vector<std::size_t>& cells,
                                          CflMode mode) {
  detail::require_resolutions(cells);
  ConvergenceTable table;
  table.mode = mode;
  table.final_time = final_time;
  for (std::size_t n : cells) {
    const ApScheme scheme(family(n));
    const StaggeredGrid& grid = scheme.grid();
    const VelocityGrid& vg = scheme.vgrid();
    CellField rho(n);
    FaceKineticField g(n, vg.count());
    for (std::size_t i = 0; i < n; ++i) {
      rho(i) = exact.rho(0.0, grid.node(i));
      for (std::size_t j = 0; j < vg.count(); ++j) g(i, j) = exact.g(0.0, grid.face(i), j);
    }
    ConvergenceRow row;
    row.cells = n;
    row.dx = grid.dx();
    row.dt = study_dt(scheme.problem(), mode);
    row.epsilon = scheme.epsilon();
    RunOptions opts;
    opts.record_energy = false;
    const RunResult r =
        run(scheme, scheme.make_state(std::move(rho), std::move(g)), final_time, FixedDt{row.dt}, opts);
    row.steps = r.steps;
    const auto [er, eg] = exact_error(grid, vg, r.final_state, exact, final_time, row.epsilon);
    row.err_rho = er;
    row.err_g = eg;
    table.rows.push_back(row);
  }
  detail::fill_orders(table);
  return table;
}

}  // namespace apkin
