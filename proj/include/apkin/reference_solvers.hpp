#pragma once

// Oracles for the AP scheme: the explicit three-point scheme for the limit
// diffusion equation, a direct upwind solver for the kinetic equation at
// moderate epsilon, and the leading-order closure g ~ -(1/sigma) L^{-1}(v d_x rho).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "apkin/ap_scheme.hpp"
#include "apkin/errors.hpp"
#include "apkin/spatial_grid.hpp"
#include "apkin/velocity.hpp"

namespace apkin {

struct DiffusionProblem {
  StaggeredGrid grid;
  std::vector<double> kappa_faces;  // kappa_{i+1/2}
  std::vector<double> sigma_a;      // at cells
  std::vector<double> source;       // at cells
};

/// Limit problem of a transport problem, reusing the scheme's face sigma and
/// its quadrature for kappa_{i+1/2} = -<v L^{-1} v> / sigma_{i+1/2}.
inline DiffusionProblem make_diffusion_problem(const ApScheme& scheme) {
  const double unit = diffusion_coefficient(scheme.collision(), 1.0);
  DiffusionProblem dp{scheme.grid(), {}, scheme.sigma_a_nodes(), scheme.source_nodes()};
  dp.kappa_faces.reserve(scheme.sigma_faces().size());
  for (double s : scheme.sigma_faces()) dp.kappa_faces.push_back(unit / s);
  return dp;
}

inline DiffusionProblem make_diffusion_problem(const TransportProblem& p) {
  return make_diffusion_problem(ApScheme(p));
}

/// Standard explicit stability bound dx^2 / (2 max kappa).
inline double diffusion_stable_dt(const DiffusionProblem& dp) {
  const double kmax = *std::max_element(dp.kappa_faces.begin(), dp.kappa_faces.end());
  return dp.grid.dx() * dp.grid.dx() / (2.0 * kmax);
}

inline CellField diffusion_step(const DiffusionProblem& dp, const CellField& rho, double dt) {
  const StaggeredGrid& g = dp.grid;
  const std::size_t n = g.cells();
  const double inv_dx = 1.0 / g.dx();
  std::vector<double> flux(n);
  for (std::size_t k = 0; k < n; ++k)
    flux[k] = dp.kappa_faces[k] * (rho(g.next(k)) - rho(k)) * inv_dx;
  CellField out(n);
  for (std::size_t i = 0; i < n; ++i)
    out(i) = rho(i) + dt * inv_dx * (flux[i] - flux[g.prev(i)]) - dt * dp.sigma_a[i] * rho(i) +
             dt * dp.source[i];
  return out;
}

struct DiffusionRun {
  std::vector<CellField> states;  // every level, initial included
  std::vector<double> times;
  std::size_t steps = 0;
  double dt = 0.0;
  bool exceeds_stability = false;

  const CellField& final_state() const { return states.back(); }
};

/// rho^{n+1}_i = rho^n_i + (dt/dx)(kappa_{i+1/2} delta^0 rho_{i+1/2} - kappa_{i-1/2} delta^0 rho_{i-1/2})
///               - dt sigma_A,i rho^n_i + dt S_i
/// The last step is shortened to land on T. A dt above the explicit bound is
/// flagged, not refused.
inline DiffusionRun run_diffusion(const DiffusionProblem& dp, const CellField& rho0, double dt,
                                  double final_time) {
  const std::size_t n = dp.grid.cells();
  if (rho0.points() != n || rho0.width() != 1)
    throw InvalidArgument("run_diffusion: initial density does not match the grid");
  if (dp.kappa_faces.size() != n || dp.sigma_a.size() != n || dp.source.size() != n)
    throw InvalidArgument("run_diffusion: coefficient arrays do not match the grid");
  for (double k : dp.kappa_faces)
    if (!(k > 0.0)) throw InvalidArgument("run_diffusion: kappa must be positive at every face");

  const auto sched = detail::schedule(final_time, dt);
  DiffusionRun out;
  out.dt = dt;
  out.steps = sched.steps;
  out.exceeds_stability = dt > diffusion_stable_dt(dp) * (1.0 + 1e-12);
  out.states.reserve(sched.steps + 1);
  out.states.push_back(rho0);
  out.times.push_back(0.0);
  for (std::size_t s = 0; s < sched.steps; ++s) {
    const double h = s + 1 == sched.steps ? sched.last_dt : dt;
    CellField next = diffusion_step(dp, out.states.back(), h);
    if (!next.all_finite())
      throw NumericalFailure("run_diffusion: non-finite density", std::nullopt, s + 1);
    out.states.push_back(std::move(next));
    out.times.push_back(detail::step_time(sched, final_time, dt, s + 1));
  }
  return out;
}

/// Largest dt accepted by the explicit kinetic solver:
///   0.9 min(eps dx / max|v|, eps^2 / (sigma_M 2 s_M)).
inline double explicit_kinetic_dt_limit(const TransportProblem& p) {
  double vmax = 0.0;
  for (double v : p.vgrid.nodes()) vmax = std::max(vmax, std::abs(v));
  const double transport = p.epsilon * p.grid.dx() / vmax;
  const double collision = p.epsilon * p.epsilon / (p.sigma_max * 2.0 * p.kernel.s_max());
  return 0.9 * std::min(transport, collision);
}

struct KineticRun {
  FaceKineticField initial;
  FaceKineticField final_state;
  std::vector<double> times;
  std::vector<double> mass;  // sum_i <f_{i+1/2}> dx per level
  std::size_t steps = 0;
};

/// Forward Euler with first-order upwind transport for
///   d_t f = -(1/eps)(v^+ D^- + v^- D^+) f + (sigma/eps^2) L f - sigma_A f + S
/// on the face grid. Coefficients are sampled at the faces. Refuses any dt
/// above explicit_kinetic_dt_limit.
inline KineticRun run_explicit_kinetic(const TransportProblem& p, const FaceKineticField& f0,
                                       double dt, double final_time) {
  validate(p);
  const StaggeredGrid& grid = p.grid;
  const VelocityGrid& vgrid = p.vgrid;
  const std::size_t n = grid.cells();
  const std::size_t nv = vgrid.count();
  if (f0.points() != n || f0.width() != nv)
    throw InvalidArgument("run_explicit_kinetic: initial data shape does not match the grids");
  const double limit = explicit_kinetic_dt_limit(p);
  if (!(dt > 0.0) || dt > limit)
    throw InvalidArgument("run_explicit_kinetic: dt = " + std::to_string(dt) +
                          " exceeds the explicit limit " + std::to_string(limit));

  const CollisionOperator op = build_collision_operator(vgrid, p.kernel);
  std::vector<double> sigma(n);
  std::vector<double> sigma_a(n);
  std::vector<double> source(n);
  for (std::size_t k = 0; k < n; ++k) {
    sigma[k] = p.sigma(grid.face(k));
    sigma_a[k] = p.sigma_a(grid.face(k));
    source[k] = p.source(grid.face(k));
  }
  const double eps = p.epsilon;
  const auto ni = static_cast<Eigen::Index>(nv);

  auto mass_of = [&](const FaceKineticField& f) {
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) m += vgrid.average_unchecked(&f(k, 0));
    return m * grid.dx();
  };

  const auto sched = detail::schedule(final_time, dt);
  KineticRun out;
  out.initial = f0;
  out.steps = sched.steps;
  out.times.push_back(0.0);
  out.mass.push_back(mass_of(f0));
  FaceKineticField f = f0;
  for (std::size_t s = 0; s < sched.steps; ++s) {
    const double h = s + 1 == sched.steps ? sched.last_dt : dt;
    const FaceKineticField transport = upwind_transport(grid, vgrid, f);
    FaceKineticField next(n, nv);
    for (std::size_t k = 0; k < n; ++k) {
      const Eigen::Map<const Eigen::VectorXd> fk(&f(k, 0), ni);
      const Eigen::VectorXd lf = op.matrix() * fk;
      for (std::size_t j = 0; j < nv; ++j) {
        const double rate = -transport(k, j) / eps +
                            sigma[k] / (eps * eps) * lf(static_cast<Eigen::Index>(j)) -
                            sigma_a[k] * f(k, j) + source[k];
        next(k, j) = f(k, j) + h * rate;
      }
    }
    if (!next.all_finite())
      throw NumericalFailure("run_explicit_kinetic: non-finite distribution", std::nullopt, s + 1);
    f = std::move(next);
    out.times.push_back(detail::step_time(sched, final_time, dt, s + 1));
    out.mass.push_back(mass_of(f));
  }
  out.final_state = std::move(f);
  return out;
}

inline KineticRun run_explicit_kinetic(const TransportProblem& p, const InitialData& f0,
                                       double dt, double final_time) {
  FaceKineticField sampled(p.grid.cells(), p.vgrid.count());
  for (std::size_t k = 0; k < p.grid.cells(); ++k)
    for (std::size_t j = 0; j < p.vgrid.count(); ++j)
      sampled(k, j) = f0(p.grid.face(k), p.vgrid.node(j));
  return run_explicit_kinetic(p, sampled, dt, final_time);
}

/// g_{i+1/2} = -(1/sigma_{i+1/2}) L^{-1}(v (delta^0 rho)_{i+1/2}).
inline FaceKineticField asymptotic_g(const CollisionOperator& op, const StaggeredGrid& grid,
                                     const std::vector<double>& sigma_faces,
                                     const CellField& rho) {
  if (sigma_faces.size() != grid.cells())
    throw InvalidArgument("asymptotic_g: one sigma per face required");
  const VelocityGrid& vgrid = op.grid();
  std::vector<double> v(vgrid.nodes().begin(), vgrid.nodes().end());
  const std::vector<double> l_inv_v = pseudo_inverse_apply(op, v);
  const FaceKineticField grad = delta_zero(grid, rho);
  FaceKineticField g(grid.cells(), vgrid.count());
  for (std::size_t k = 0; k < grid.cells(); ++k)
    for (std::size_t j = 0; j < vgrid.count(); ++j)
      g(k, j) = grad(k) / sigma_faces[k] * l_inv_v[j];
  return g;
}

/// <v g> of asymptotic_g, i.e. -kappa_{i+1/2} (delta^0 rho)_{i+1/2}, width 1.
inline FaceKineticField asymptotic_flux(const CollisionOperator& op, const StaggeredGrid& grid,
                                        const std::vector<double>& sigma_faces,
                                        const CellField& rho) {
  return velocity_flux(op.grid(), asymptotic_g(op, grid, sigma_faces, rho));
}

}  // namespace apkin
