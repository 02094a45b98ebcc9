// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "apkin/apkin.hpp"
#include "telegraph_oracle.hpp"

using namespace apkin;

namespace {

constexpr double kPi = std::numbers::pi;

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s criterion-%d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

TransportProblem gauss_problem(std::size_t cells, std::size_t nv, double eps) {
  return TransportProblem(StaggeredGrid(cells, 1.0),
                          build_velocity_grid(nv, QuadratureRule::gauss_legendre), eps);
}

// Shared by criteria 1-3: 20 runs of 500 steps on seeded random data.
struct EnergyMatrix {
  bool implicit_monotone = true;
  bool explicit_monotone = true;
  double implicit_worst = 0.0;
  double explicit_worst = 0.0;
  double max_defect = 0.0;
  double implicit_seconds = 0.0;
  double explicit_seconds = 0.0;
};

EnergyMatrix energy_matrix() {
  EnergyMatrix m;
  const double epsilons[] = {1.0, 1e-1, 1e-2, 1e-4, 1e-8};
  for (bool explicit_absorption : {false, true}) {
    const Clock clock;
    for (bool anisotropic : {false, true}) {
      for (double eps : epsilons) {
        TransportProblem p = gauss_problem(64, 16, eps);
        if (anisotropic) p.kernel = CollisionKernel::linear_anisotropic(0.3);
        if (explicit_absorption) {
          p.absorption_mode = AbsorptionMode::explicit_absorption;
          p.sigma_a = constant_coefficient(0.5);
          p.sigma_a_max = 0.5;
        }
        const ApScheme s(p);
        Lcg64 rng(42);
        const MicroMacroState init = random_state(s.grid(), s.vgrid(), rng);
        const double dt = s.cfl().dt_max;
        const RunResult r = run(s, init, 500.0 * dt, FixedDt{dt});
        const EnergyAudit a = audit_energy(r.energy, true, 1e-12);
        if (r.steps != 500) std::printf("  unexpected step count %zu\n", r.steps);
        m.max_defect = std::max(m.max_defect, r.max_zero_average_defect);
        if (explicit_absorption) {
          m.explicit_monotone &= a.monotone && r.steps == 500;
          m.explicit_worst = std::max(m.explicit_worst, a.max_violation);
        } else {
          m.implicit_monotone &= a.monotone && r.steps == 500;
          m.implicit_worst = std::max(m.implicit_worst, a.max_violation);
        }
      }
    }
    (explicit_absorption ? m.explicit_seconds : m.implicit_seconds) = clock.seconds();
  }
  return m;
}

void criterion_4() {
  const Clock clock;
  const ApScheme s(gauss_problem(64, 16, 1e-8));
  const DiffusionProblem dp = make_diffusion_problem(s);
  const double dt = std::min(s.cfl().dt_max, diffusion_stable_dt(dp));
  RunOptions o;
  o.record_energy = false;
  const RunResult r =
      run(s, s.decompose([](double x, double) { return 1.0 + 0.5 * std::sin(2 * kPi * x); }), 0.05,
          FixedDt{dt}, o);
  const DiffusionRun d = run_diffusion(dp, r.initial.rho, dt, 0.05);
  double diff = 0.0;
  for (std::size_t i = 0; i < 64; ++i)
    diff = std::max(diff, std::abs(r.final_state.rho(i) - d.final_state()(i)));
  const double t = clock.seconds();
  report(4, "diffusion-limit-agreement", diff <= 1e-6 && t <= 5.0,
         fmt("max |rho_AP - rho_diff| = %.3e (<= 1e-6)", diff) + fmt(", %.2f s (<= 5 s)", t));
}

void criterion_5() {
  double worst = 0.0;
  for (std::size_t n : {8u, 16u, 32u}) {
    const VelocityGrid g = build_velocity_grid(n, QuadratureRule::gauss_legendre);
    const double kappa = diffusion_coefficient(build_collision_operator(g, CollisionKernel::isotropic()), 1.0);
    worst = std::max(worst, std::abs(kappa - 1.0 / 3.0));
  }
  report(5, "kappa-reproduction", worst <= 1e-12,
         fmt("max |kappa - 1/3| over 8, 16, 32 nodes = %.3e (<= 1e-12)", worst));
}

void criterion_6() {
  const Clock clock;
  const ConvergenceTable a = convergence_study(
      [](std::size_t n) { return gauss_problem(n, 8, 1e-8); },
      [](double x, double) { return 1.0 + 0.5 * std::sin(2 * kPi * x); }, 0.01, {32, 64, 128},
      CflMode::parabolic);
  const ConvergenceTable b = convergence_study(
      [](std::size_t n) { return gauss_problem(n, 8, 1.0); },
      [](double x, double v) {
        return 1.0 + 0.5 * std::sin(2 * kPi * x) + 0.3 * v * std::cos(2 * kPi * x);
      },
      0.1, {32, 64, 128}, CflMode::hyperbolic);
  const double oa = a.finest_order_rho();
  const double ob = b.finest_order_rho();
  const double t = clock.seconds();
  const bool ok = oa >= 1.7 && oa <= 2.3 && ob >= 0.8 && ob <= 1.5 && t <= 60.0;
  report(6, "convergence-orders", ok,
         fmt("parabolic eps = 1e-8 order %.3f in [1.7, 2.3]", oa) +
             fmt(", hyperbolic eps = 1 order %.3f in [0.8, 1.5]", ob) + fmt(", %.2f s (<= 60 s)", t));
}

void criterion_7() {
  // Exact Fourier eigenmode of the velocity-discrete system as the smooth solution.
  std::vector<double> dxs;
  std::vector<double> dx_norms;
  for (std::size_t n : {16u, 32u, 64u, 128u}) {
    const ApScheme s(gauss_problem(n, 8, 1e-6));
    const ExactSolution ex = fourier_mode(s.collision(), 1e-6, 1.0, 1.0).solution();
    const TruncationReport r = truncation_errors(ex, s, 1e-9, 0);
    dxs.push_back(r.dx);
    dx_norms.push_back(r.a_norm + r.b_norm);
  }
  const double dx_slope = fit_power_law(dxs, dx_norms);

  std::vector<double> dts;
  std::vector<double> dt_norms;
  const ApScheme fine(gauss_problem(8192, 8, 1.0));
  const ExactSolution ex = fourier_mode(fine.collision(), 1.0, 1.0, 1.0).solution();
  for (double dt : {0.04, 0.02, 0.01, 0.005}) {
    const TruncationReport r = truncation_errors(ex, fine, dt, 0);
    dts.push_back(dt);
    dt_norms.push_back(r.a_norm + r.b_norm);
  }
  const double dt_slope = fit_power_law(dts, dt_norms);
  report(7, "truncation-scaling",
         dx_slope >= 1.7 && dx_slope <= 2.3 && dt_slope >= 0.7 && dt_slope <= 1.3,
         fmt("dx exponent %.3f in [1.7, 2.3]", dx_slope) + fmt(", dt exponent %.3f in [0.7, 1.3]", dt_slope));
}

void criterion_8() {
  const Clock clock;
  LemmaSuiteOptions o;
  o.trials = 100;
  const std::vector<LemmaCheck> checks = lemma_suite(o);
  std::string detail;
  for (const LemmaCheck& c : checks) {
    if (!detail.empty()) detail += ", ";
    detail += c.name + (c.passed ? " ok" : " FAILED") + fmt(" (%.3g)", c.worst);
  }
  const double t = clock.seconds();
  report(8, "discrete-lemma-suite", all_passed(checks) && t <= 5.0,
         detail + fmt("; %.2f s (<= 5 s)", t));
}

void criterion_9() {
  double worst_step = 0.0;
  double worst_traj = 0.0;
  // Half the stability bound: on the two-point grid the bound itself is not
  // sufficient for energy decay when eps is of order one.
  for (double eps : {1.0, 1e-1, 1e-4}) {
    TransportProblem p(StaggeredGrid(64, 1.0),
                       build_velocity_grid(2, QuadratureRule::two_point_telegraph), eps);
    p.kernel = CollisionKernel::constant(1.0);
    const ApScheme s(p);
    Lcg64 rng(9);
    MicroMacroState st = random_state(s.grid(), s.vgrid(), rng);
    oracle::TelegraphState o;
    for (std::size_t k = 0; k < 64; ++k) {
      o.rho.push_back(st.rho(k));
      o.g_minus.push_back(st.g(k, 0));
      o.g_plus.push_back(st.g(k, 1));
    }
    const double dt = 0.5 * s.cfl().dt_max;
    for (int n = 0; n < 200; ++n) {
      // one step of each from the library state, then compare trajectories
      oracle::TelegraphState from_lib{std::vector<double>(64), std::vector<double>(64),
                                      std::vector<double>(64)};
      for (std::size_t k = 0; k < 64; ++k) {
        from_lib.rho[k] = st.rho(k);
        from_lib.g_minus[k] = st.g(k, 0);
        from_lib.g_plus[k] = st.g(k, 1);
      }
      const oracle::TelegraphState one = oracle::telegraph_step(from_lib, s.grid().dx(), dt, eps, 1.0);
      st = s.step(st, dt);
      o = oracle::telegraph_step(o, s.grid().dx(), dt, eps, 1.0);
      for (std::size_t k = 0; k < 64; ++k) {
        worst_step = std::max({worst_step, std::abs(st.rho(k) - one.rho[k]),
                               std::abs(st.g(k, 0) - one.g_minus[k]),
                               std::abs(st.g(k, 1) - one.g_plus[k])});
        worst_traj = std::max({worst_traj, std::abs(st.rho(k) - o.rho[k]),
                               std::abs(st.g(k, 0) - o.g_minus[k]),
                               std::abs(st.g(k, 1) - o.g_plus[k])});
      }
    }
  }
  report(9, "telegraph-oracle-equivalence", worst_step <= 1e-13 && worst_traj <= 1e-13,
         fmt("eps in {1, 0.1, 1e-4}, dt = dt_max/2: max per-step difference %.3e, trajectory "
             "difference %.3e over 200 steps (<= 1e-13)",
             worst_step, worst_traj));
}

void criterion_10() {
  const InitialData f0 = [](double x, double v) {
    return 1.0 + 0.5 * std::sin(2 * kPi * x) + 0.3 * v * std::cos(2 * kPi * x);
  };
  std::vector<double> errs;
  for (std::size_t n : {64u, 128u, 256u}) {
    const TransportProblem p = gauss_problem(n, 8, 1.0);
    const double dt = 0.5 / static_cast<double>(n);
    const ApScheme s(p);
    RunOptions o;
    o.record_energy = false;
    const RunResult a = run(s, s.decompose(f0), 0.1, FixedDt{dt}, o);
    const KineticRun k = run_explicit_kinetic(p, f0, dt, 0.1);
    double e = 0.0;
    for (std::size_t f = 0; f < n; ++f) {
      // <f> on the face between cells f and f+1
      const double ap = 0.5 * (a.final_state.rho(f) + a.final_state.rho(s.grid().next(f)));
      e = std::max(e, std::abs(ap - p.vgrid.average_unchecked(&k.final_state(f, 0))));
    }
    errs.push_back(e);
  }
  const double r1 = errs[0] / errs[1];
  const double r2 = errs[1] / errs[2];
  report(10, "cross-solver-halving", r1 >= 1.6 && r1 <= 2.4 && r2 >= 1.6 && r2 <= 2.4,
         fmt("difference ratios %.3f, %.3f in [1.6, 2.4]", r1, r2) +
             fmt(" (finest difference %.3e)", errs[2]));
}

}  // namespace

int main() {
  const EnergyMatrix m = energy_matrix();
  report(1, "energy-monotonicity", m.implicit_monotone && m.implicit_seconds <= 10.0,
         fmt("10 runs x 500 steps, max relative increase %.3e (tolerance 1e-12)", m.implicit_worst) +
             fmt(", %.2f s (<= 10 s)", m.implicit_seconds));
  report(2, "explicit-absorption-stability", m.explicit_monotone,
         fmt("10 runs x 500 steps with sigma_A = 0.5, max relative increase %.3e (tolerance 1e-12)",
             m.explicit_worst));
  report(3, "zero-average-preservation", m.max_defect <= 1e-12,
         fmt("max face |<g>| over 20 runs = %.3e (<= 1e-12)", m.max_defect));
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
