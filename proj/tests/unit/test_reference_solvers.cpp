#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "apkin/reference_solvers.hpp"

using namespace apkin;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

TransportProblem make(std::size_t cells, std::size_t nv, double eps, double length = 1.0) {
  return TransportProblem(StaggeredGrid(cells, length),
                          build_velocity_grid(nv, QuadratureRule::gauss_legendre), eps);
}

double total(const StaggeredGrid& g, const CellField& rho) {
  double s = 0.0;
  for (double x : rho.values()) s += x;
  return s * g.dx();
}

// rho from <f> at faces of an explicit kinetic state, shifted to cells by averaging.
double face_density(const VelocityGrid& vg, const FaceKineticField& f, std::size_t k) {
  return vg.average_unchecked(&f(k, 0));
}

}  // namespace

TEST_CASE("diffusion problem from the transport problem", "[reference_solvers]") {
  TransportProblem p = make(16, 16, 1e-3);
  p.sigma = constant_coefficient(2.0);
  p.sigma_min = p.sigma_max = 2.0;
  const DiffusionProblem dp = make_diffusion_problem(p);
  for (double k : dp.kappa_faces) CHECK(k == Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(diffusion_stable_dt(dp) == Approx(dp.grid.dx() * dp.grid.dx() * 3.0));
}

TEST_CASE("diffusion mode decays by the discrete symbol", "[reference_solvers]") {
  for (double length : {1.0, 2.0}) {
    const TransportProblem p = make(32, 8, 1e-3, length);
    const DiffusionProblem dp = make_diffusion_problem(p);
    const double kappa = 1.0 / 3.0;
    const double dx = dp.grid.dx();
    const double dt = 0.4 * diffusion_stable_dt(dp);
    CellField rho(32);
    for (std::size_t i = 0; i < 32; ++i) rho(i) = std::sin(2 * kPi * dp.grid.node(i) / length);
    const double factor = 1.0 - 4.0 * kappa * dt / (dx * dx) * std::pow(std::sin(kPi * dx / length), 2);
    const CellField next = diffusion_step(dp, rho, dt);
    for (std::size_t i = 0; i < 32; ++i) CHECK(next(i) == Approx(factor * rho(i)).margin(1e-13));
  }
}

TEST_CASE("diffusion run conserves mass and flags unstable steps", "[reference_solvers]") {
  TransportProblem p = make(20, 8, 1e-3);
  p.sigma = [](double x) { return 1.5 + std::sin(2 * kPi * x); };
  p.sigma_min = 0.5;
  p.sigma_max = 2.5;
  const DiffusionProblem dp = make_diffusion_problem(p);
  CellField rho(20);
  for (std::size_t i = 0; i < 20; ++i) rho(i) = 1.0 + std::cos(2 * kPi * dp.grid.node(i));
  const double dt = 0.5 * diffusion_stable_dt(dp);
  const DiffusionRun r = run_diffusion(dp, rho, dt, 0.05);
  CHECK_FALSE(r.exceeds_stability);
  CHECK(r.times.back() == 0.05);
  CHECK(r.states.size() == r.steps + 1);
  CHECK(total(dp.grid, r.final_state()) == Approx(total(dp.grid, rho)).epsilon(1e-13));
  CHECK(run_diffusion(dp, rho, 3.0 * diffusion_stable_dt(dp), 0.01).exceeds_stability);
  CHECK_THROWS_AS(run_diffusion(dp, CellField(10), dt, 0.1), InvalidArgument);
}

TEST_CASE("explicit kinetic solver refuses steps above its limit", "[reference_solvers]") {
  const TransportProblem p = make(16, 8, 0.01);
  const double limit = explicit_kinetic_dt_limit(p);
  double vmax = 0.0;
  for (double v : p.vgrid.nodes()) vmax = std::max(vmax, std::abs(v));
  CHECK(limit == Approx(0.9 * std::min(0.01 * p.grid.dx() / vmax, 1e-4 / 1.0)));
  const InitialData f0 = [](double, double) { return 1.0; };
  CHECK_THROWS_AS(run_explicit_kinetic(p, f0, 1.01 * limit, 1e-3), InvalidArgument);
  CHECK_NOTHROW(run_explicit_kinetic(p, f0, limit, 10 * limit));
}

TEST_CASE("explicit kinetic solver conserves mass", "[reference_solvers]") {
  TransportProblem p = make(32, 8, 0.5);
  p.kernel = CollisionKernel::linear_anisotropic(0.3);
  const KineticRun r = run_explicit_kinetic(
      p, [](double x, double v) { return 1.0 + 0.5 * std::sin(2 * kPi * x) + 0.2 * v; },
      explicit_kinetic_dt_limit(p), 0.1);
  for (double m : r.mass) CHECK(m == Approx(r.mass.front()).epsilon(1e-13));
  CHECK(r.times.back() == 0.1);
}

TEST_CASE("explicit kinetic and AP scheme agree at moderate epsilon", "[reference_solvers]") {
  // Two different first-order discretizations of one kinetic problem: the gap
  // shrinks under refinement.
  const InitialData f0 = [](double x, double v) { return 1.0 + 0.5 * std::sin(2 * kPi * x) * (1 + v); };
  double prev = 0.0;
  for (std::size_t n : {32u, 64u, 128u}) {
    const TransportProblem p = make(n, 8, 0.5);
    const double T = 0.1;
    const KineticRun k = run_explicit_kinetic(p, f0, explicit_kinetic_dt_limit(p), T);
    const RunResult a = run(p, f0, T, FixedDt{explicit_kinetic_dt_limit(p)});
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // kinetic density at cell i as the mean of its two neighbouring faces
      const double rho_k = 0.5 * (face_density(p.vgrid, k.final_state, i) +
                                  face_density(p.vgrid, k.final_state, p.grid.prev(i)));
      gap = std::max(gap, std::abs(rho_k - a.final_state.rho(i)));
    }
    if (prev > 0.0) CHECK(gap < 0.7 * prev);
    prev = gap;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("asymptotic flux is Fick's law", "[reference_solvers]") {
  TransportProblem p = make(16, 16, 1e-6);
  p.kernel = CollisionKernel::linear_anisotropic(0.3);
  p.sigma = [](double x) { return 2.0 + std::cos(2 * kPi * x); };
  p.sigma_min = 1.0;
  p.sigma_max = 3.0;
  const ApScheme s(p);
  CellField rho(16);
  for (std::size_t i = 0; i < 16; ++i) rho(i) = std::sin(2 * kPi * s.grid().node(i));
  const FaceKineticField flux = asymptotic_flux(s.collision(), s.grid(), s.sigma_faces(), rho);
  const FaceKineticField grad = delta_zero(s.grid(), rho);
  const DiffusionProblem dp = make_diffusion_problem(s);
  for (std::size_t k = 0; k < 16; ++k)
    CHECK(flux[k] == Approx(-dp.kappa_faces[k] * grad[k]).margin(1e-13));
  const FaceKineticField g = asymptotic_g(s.collision(), s.grid(), s.sigma_faces(), rho);
  CHECK(zero_average_defect(s.vgrid(), g) <= 1e-14);
}
