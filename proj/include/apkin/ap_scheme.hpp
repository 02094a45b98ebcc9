#pragma once

// Micro-macro asymptotic-preserving scheme for
//   eps d_t f + v d_x f = (sigma/eps) L f - eps sigma_A f + eps S
// written for f = rho + eps g on staggered grids:
//
//   (g^{n+1} - g^n)/dt + (1/eps)(I - <.>)(v^+ D^- + v^- D^+) g^n
//        = (sigma/eps^2) L g^{n+1} - (1/eps^2) v delta^0 rho^n
//   (rho^{n+1} - rho^n)/dt + D^0 <v g^{n+1}> = -sigma_A rho^{n+1} + S
//
// The g update is implicit only in the collision term, so each face needs one
// small dense solve per step. The rho update then consumes g^{n+1}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "apkin/energy.hpp"
#include "apkin/errors.hpp"
#include "apkin/spatial_grid.hpp"
#include "apkin/velocity.hpp"

namespace apkin {

/// Smallest epsilon accepted by the scheme; the eps -> 0 limit itself is
/// served by the diffusion solver.
inline constexpr double kMinEpsilon = 1e-12;

/// Initial-layer flag threshold on ||g^0|| / max(1, ||rho^0||).
inline constexpr double kInitialLayerRatio = 1e3;

using Coefficient = std::function<double(double)>;
using InitialData = std::function<double(double x, double v)>;

inline Coefficient constant_coefficient(double c) {
  return [c](double) { return c; };
}

enum class AbsorptionMode { implicit, explicit_absorption };

inline std::string to_string(AbsorptionMode mode) {
  return mode == AbsorptionMode::implicit ? "implicit" : "explicit";
}

struct TransportProblem {
  TransportProblem(StaggeredGrid grid_, VelocityGrid vgrid_, double epsilon_)
      : grid(grid_), vgrid(std::move(vgrid_)), epsilon(epsilon_) {}

  StaggeredGrid grid;
  VelocityGrid vgrid;
  double epsilon;
  Coefficient sigma = constant_coefficient(1.0);
  double sigma_min = 1.0;
  double sigma_max = 1.0;
  Coefficient sigma_a = constant_coefficient(0.0);
  double sigma_a_max = 0.0;
  Coefficient source = constant_coefficient(0.0);
  CollisionKernel kernel = CollisionKernel::isotropic();
  AbsorptionMode absorption_mode = AbsorptionMode::implicit;
};

enum class BindingTerm { parabolic, hyperbolic, absorption_cap };

inline std::string to_string(BindingTerm b) {
  switch (b) {
    case BindingTerm::parabolic: return "parabolic";
    case BindingTerm::hyperbolic: return "hyperbolic";
    case BindingTerm::absorption_cap: return "absorption-cap";
  }
  return "unknown";
}

struct CflReport {
  double dt_max = 0.0;
  double sigma_tilde = 0.0;   // 2 s_min sigma_min
  double dt_implicit = 0.0;   // (sigma_tilde dx^2 + 2 eps dx) / 3
  AbsorptionMode mode = AbsorptionMode::implicit;
  BindingTerm binding_term = BindingTerm::parabolic;
};

/// Uniform stability bound. Implicit absorption:
///   dt <= (sigma_tilde dx^2 + 2 eps dx) / 3,  sigma_tilde = 2 s_min sigma_min.
/// Explicit absorption:
///   dt <= min(2 / (1 + sigma_A,max), 3 / (3 + sigma_A,max) dt_implicit).
inline CflReport max_stable_dt(const TransportProblem& p) {
  CflReport r;
  const double dx = p.grid.dx();
  r.sigma_tilde = 2.0 * p.kernel.s_min() * p.sigma_min;
  const double parabolic = r.sigma_tilde * dx * dx;
  const double hyperbolic = 2.0 * p.epsilon * dx;
  r.dt_implicit = (parabolic + hyperbolic) / 3.0;
  r.dt_max = r.dt_implicit;
  r.mode = p.absorption_mode;
  r.binding_term = parabolic >= hyperbolic ? BindingTerm::parabolic : BindingTerm::hyperbolic;
  if (p.absorption_mode == AbsorptionMode::explicit_absorption) {
    const double cap = 2.0 / (1.0 + p.sigma_a_max);
    const double scaled = 3.0 / (3.0 + p.sigma_a_max) * r.dt_implicit;
    if (cap < scaled) {
      r.dt_max = cap;
      r.binding_term = BindingTerm::absorption_cap;
    } else {
      r.dt_max = scaled;
    }
  }
  return r;
}

/// Step bound under which the error estimate holds:
///   dt <= dx^2 sigma_min / 6 + (2/3) eps dx.
inline double error_estimate_dt(const TransportProblem& p) {
  const double dx = p.grid.dx();
  return dx * dx * p.sigma_min / 6.0 + 2.0 / 3.0 * p.epsilon * dx;
}

/// Throws InvalidArgument when epsilon or the cross sections break their
/// bounds at the nodes where the scheme samples them.
inline void validate(const TransportProblem& p) {
  if (!std::isfinite(p.epsilon) || p.epsilon < kMinEpsilon)
    throw InvalidArgument("epsilon must be at least " + std::to_string(kMinEpsilon) +
                          " (the smallest supported value is 1e-12), got " +
                          std::to_string(p.epsilon));
  if (!(p.sigma_min > 0.0))
    throw InvalidArgument("cross sections must satisfy 0 < sigma_m, got sigma_m = " +
                          std::to_string(p.sigma_min));
  if (p.sigma_max < p.sigma_min)
    throw InvalidArgument("sigma_M must be at least sigma_m");
  if (p.sigma_a_max < 0.0)
    throw InvalidArgument("absorption bound sigma_A,M must be non-negative");
  const double tol = 1e-14;
  for (std::size_t k = 0; k < p.grid.cells(); ++k) {
    const double x = p.grid.face(k);
    const double s = p.sigma(x);
    if (!std::isfinite(s) || s < p.sigma_min * (1.0 - tol) || s > p.sigma_max * (1.0 + tol))
      throw InvalidArgument("sigma(" + std::to_string(x) + ") = " + std::to_string(s) +
                            " outside [sigma_m, sigma_M]");
  }
  for (std::size_t i = 0; i < p.grid.cells(); ++i) {
    const double x = p.grid.node(i);
    const double a = p.sigma_a(x);
    if (!std::isfinite(a) || a < 0.0 || a > p.sigma_a_max * (1.0 + tol) + tol)
      throw InvalidArgument("sigma_A(" + std::to_string(x) + ") = " + std::to_string(a) +
                            " outside [0, sigma_A,M]");
    if (!std::isfinite(p.source(x)))
      throw InvalidArgument("source is not finite at x = " + std::to_string(x));
  }
}

namespace detail {

/// Number of steps to reach T with nominal dt, and the length of the last
/// (possibly shortened) step.
struct Schedule {
  std::size_t steps = 0;
  double last_dt = 0.0;
};

inline Schedule schedule(double final_time, double dt) {
  if (!(final_time >= 0.0) || !std::isfinite(final_time))
    throw InvalidArgument("final time must be a non-negative number");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  Schedule s;
  if (final_time == 0.0) return s;
  const double ratio = final_time / dt;
  s.steps = static_cast<std::size_t>(std::max(1.0, std::ceil(ratio - 1e-9)));
  s.last_dt = final_time - static_cast<double>(s.steps - 1) * dt;
  return s;
}

inline double step_time(const Schedule& s, double final_time, double dt, std::size_t n) {
  return n >= s.steps ? final_time : static_cast<double>(n) * dt;
}

}  // namespace detail

/// A validated problem with its collision operator, node-sampled coefficients
/// and cached per-face factorizations.
class ApScheme {
 public:
  explicit ApScheme(TransportProblem problem)
      : problem_(std::move(problem)),
        op_(build_collision_operator(problem_.vgrid, problem_.kernel)),
        cache_(std::make_shared<Cache>()) {
    validate(problem_);
    const StaggeredGrid& grid = problem_.grid;
    sigma_faces_.resize(grid.cells());
    sigma_a_nodes_.resize(grid.cells());
    source_nodes_.resize(grid.cells());
    face_class_.resize(grid.cells());
    std::map<double, std::size_t> classes;
    for (std::size_t k = 0; k < grid.cells(); ++k) {
      sigma_faces_[k] = problem_.sigma(grid.face(k));
      auto [it, inserted] = classes.try_emplace(sigma_faces_[k], class_sigma_.size());
      if (inserted) {
        class_sigma_.push_back(sigma_faces_[k]);
        class_face_.push_back(k);
      }
      face_class_[k] = it->second;
    }
    for (std::size_t i = 0; i < grid.cells(); ++i) {
      sigma_a_nodes_[i] = problem_.sigma_a(grid.node(i));
      source_nodes_[i] = problem_.source(grid.node(i));
    }
  }

  const TransportProblem& problem() const noexcept { return problem_; }
  const StaggeredGrid& grid() const noexcept { return problem_.grid; }
  const VelocityGrid& vgrid() const noexcept { return problem_.vgrid; }
  const CollisionOperator& collision() const noexcept { return op_; }
  double epsilon() const noexcept { return problem_.epsilon; }
  const std::vector<double>& sigma_faces() const noexcept { return sigma_faces_; }
  const std::vector<double>& sigma_a_nodes() const noexcept { return sigma_a_nodes_; }
  const std::vector<double>& source_nodes() const noexcept { return source_nodes_; }

  CflReport cfl() const { return max_stable_dt(problem_); }

  /// rho^0 = <f^0> at cells, g^0 = (f^0 - <f^0>)/eps at faces.
  MicroMacroState decompose(const CellField& f_nodes, const FaceKineticField& f_faces) const {
    const std::size_t n = grid().cells();
    const std::size_t nv = vgrid().count();
    if (f_nodes.points() != n || f_nodes.width() != nv || f_faces.points() != n ||
        f_faces.width() != nv)
      throw InvalidArgument("decompose: initial data shape does not match the grids");
    MicroMacroState s;
    s.rho = CellField(n);
    s.g = FaceKineticField(n, nv);
    const double inv_eps = 1.0 / epsilon();
    for (std::size_t i = 0; i < n; ++i) s.rho(i) = vgrid().average_unchecked(&f_nodes(i, 0));
    for (std::size_t k = 0; k < n; ++k) {
      const double mean = vgrid().average_unchecked(&f_faces(k, 0));
      for (std::size_t j = 0; j < nv; ++j) s.g(k, j) = (f_faces(k, j) - mean) * inv_eps;
    }
    remove_face_means(s.g);
    return s;
  }

  MicroMacroState decompose(const InitialData& f0) const {
    const std::size_t n = grid().cells();
    const std::size_t nv = vgrid().count();
    CellField at_nodes(n, nv);
    FaceKineticField at_faces(n, nv);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < nv; ++j) {
        at_nodes(i, j) = f0(grid().node(i), vgrid().node(j));
        at_faces(i, j) = f0(grid().face(i), vgrid().node(j));
      }
    return decompose(at_nodes, at_faces);
  }

  /// State from explicit components; g is projected onto <g> = 0 per face.
  MicroMacroState make_state(CellField rho, FaceKineticField g) const {
    if (rho.points() != grid().cells() || rho.width() != 1 || g.points() != grid().cells() ||
        g.width() != vgrid().count())
      throw InvalidArgument("make_state: component shapes do not match the grids");
    remove_face_means(g);
    return MicroMacroState{std::move(rho), std::move(g), 0.0, 0};
  }

  /// One step of the scheme. Throws NumericalFailure on a singular face solve
  /// or a non-finite result.
  MicroMacroState step(const MicroMacroState& state, double dt) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("step: dt must be positive");
    const StaggeredGrid& grd = grid();
    const VelocityGrid& vg = vgrid();
    const std::size_t n = grd.cells();
    const std::size_t nv = vg.count();
    if (state.rho.points() != n || state.rho.width() != 1 || state.g.points() != n ||
        state.g.width() != nv)
      throw InvalidArgument("step: state shape does not match the problem");

    const auto factors = factorizations(dt);
    const double eps = epsilon();
    const double inv_dx = 1.0 / grd.dx();

    MicroMacroState next;
    next.g = FaceKineticField(n, nv);
    next.rho = CellField(n);
    next.time = state.time + dt;
    next.step_index = state.step_index + 1;

    const auto ni = static_cast<Eigen::Index>(nv);
    Eigen::VectorXd rhs(ni + 1);
    Eigen::VectorXd transport(ni);
    const FaceKineticField& g = state.g;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t kp = grd.next(k);
      const std::size_t km = grd.prev(k);
      const double sigma = sigma_faces_[k];
      const double drho = (state.rho(kp) - state.rho(k)) * inv_dx;
      for (std::size_t j = 0; j < nv; ++j) {
        const double v = vg.node(j);
        transport(static_cast<Eigen::Index>(j)) =
            v > 0.0 ? v * (g(k, j) - g(km, j)) * inv_dx : v * (g(kp, j) - g(k, j)) * inv_dx;
      }
      const double mean_transport = vg.average_unchecked(transport.data());
      // Mean-zero part of the right-hand side, scaled by eps^2/sigma.
      const double a = eps * eps / (sigma * dt);
      const double b = eps / sigma;
      for (std::size_t j = 0; j < nv; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        rhs(jj) = a * g(k, j) - b * (transport(jj) - mean_transport) - vg.node(j) * drho / sigma;
      }
      const double mean_rhs = vg.average_unchecked(rhs.data());
      for (Eigen::Index j = 0; j < ni; ++j) rhs(j) -= mean_rhs;
      rhs(ni) = 0.0;

      const Eigen::VectorXd h = factors->lu[face_class_[k]].solve(rhs);
      // <g^{n+1}> = <g^n>: averages of the transport, collision and v terms vanish.
      const double mean_g = vg.average_unchecked(&g(k, 0));
      for (std::size_t j = 0; j < nv; ++j) next.g(k, j) = h(static_cast<Eigen::Index>(j)) + mean_g;
    }

    const bool implicit = problem_.absorption_mode == AbsorptionMode::implicit;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t below = grd.prev(i);
      const double div = (vg.flux_unchecked(&next.g(i, 0)) - vg.flux_unchecked(&next.g(below, 0))) *
                         inv_dx;
      const double rho = state.rho(i);
      if (implicit) {
        next.rho(i) = (rho - dt * div + dt * source_nodes_[i]) / (1.0 + dt * sigma_a_nodes_[i]);
      } else {
        next.rho(i) = rho - dt * div - dt * sigma_a_nodes_[i] * rho + dt * source_nodes_[i];
      }
    }

    if (!next.g.all_finite() || !next.rho.all_finite())
      throw NumericalFailure("step produced non-finite values at t = " + std::to_string(next.time));
    return next;
  }

 private:
  struct Factors {
    double dt = 0.0;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu;
  };
  struct Cache {
    std::mutex mutex;
    std::shared_ptr<const Factors> factors;
  };

  void remove_face_means(FaceKineticField& g) const {
    for (std::size_t k = 0; k < g.points(); ++k) {
      const double mean = vgrid().average_unchecked(&g(k, 0));
      for (double& x : g.block(k)) x -= mean;
    }
  }

  // Bordered system [ (eps^2/(sigma dt)) I - L , 1 ; w^T/2 , 0 ] per distinct
  // face sigma: the collision solve scaled by eps^2/sigma and restricted to
  // mean-zero unknowns.
  std::shared_ptr<const Factors> factorizations(double dt) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    if (cache_->factors && cache_->factors->dt == dt) return cache_->factors;
    auto f = std::make_shared<Factors>();
    f->dt = dt;
    const auto n = static_cast<Eigen::Index>(vgrid().count());
    const double eps = epsilon();
    for (std::size_t c = 0; c < class_sigma_.size(); ++c) {
      const double sigma = class_sigma_[c];
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
      m.topLeftCorner(n, n) = -op_.matrix();
      m.topLeftCorner(n, n).diagonal().array() += eps * eps / (sigma * dt);
      for (Eigen::Index j = 0; j < n; ++j) {
        m(j, n) = 1.0;
        m(n, j) = 0.5 * vgrid().weight(static_cast<std::size_t>(j));
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
      const double rcond = lu.rcond();
      if (!(rcond > 1e-14))
        throw NumericalFailure("singular collision solve at face " +
                                   std::to_string(class_face_[c]),
                               class_face_[c]);
      f->lu.push_back(std::move(lu));
    }
    cache_->factors = f;
    return f;
  }

  TransportProblem problem_;
  CollisionOperator op_;
  std::vector<double> sigma_faces_;
  std::vector<double> sigma_a_nodes_;
  std::vector<double> source_nodes_;
  std::vector<std::size_t> face_class_;
  std::vector<double> class_sigma_;
  std::vector<std::size_t> class_face_;
  std::shared_ptr<Cache> cache_;
};

/// rho^0 = <f^0>, eps g^0 = f^0 - rho^0, sampling f0 at cells and faces.
inline MicroMacroState decompose_initial(const TransportProblem& p, const InitialData& f0) {
  return ApScheme(p).decompose(f0);
}

/// Single step without reusing factorizations.
inline MicroMacroState step(const MicroMacroState& state, const TransportProblem& p, double dt) {
  return ApScheme(p).step(state, dt);
}

struct AutoCfl {};
struct FixedDt {
  double dt;
};
using DtPolicy = std::variant<AutoCfl, FixedDt>;

struct RunOptions {
  bool keep_states = false;
  bool record_energy = true;
  std::vector<double> snapshot_times;
  std::function<void(const MicroMacroState&)> observer;
};

struct RunResult {
  MicroMacroState initial;
  MicroMacroState final_state;
  std::vector<MicroMacroState> states;     // every level, when keep_states
  std::vector<MicroMacroState> snapshots;  // first level at or past each snapshot time
  std::vector<EnergyRecord> energy;        // every level, when record_energy
  std::size_t steps = 0;
  double dt = 0.0;
  double dt_max = 0.0;
  bool exceeds_cfl = false;
  bool initial_layer = false;
  double max_zero_average_defect = 0.0;
};

/// Advances from `initial` to exactly `final_time`; the last step is shortened
/// to land on it.
inline RunResult run(const ApScheme& scheme, const MicroMacroState& initial, double final_time,
                     const DtPolicy& policy, const RunOptions& options = {}) {
  RunResult result;
  const CflReport cfl = scheme.cfl();
  result.dt_max = cfl.dt_max;
  result.dt = std::holds_alternative<AutoCfl>(policy) ? cfl.dt_max : std::get<FixedDt>(policy).dt;
  result.exceeds_cfl = result.dt > cfl.dt_max * (1.0 + 1e-12);
  const auto sched = detail::schedule(final_time, result.dt);

  const StaggeredGrid& grid = scheme.grid();
  const VelocityGrid& vgrid = scheme.vgrid();
  const double eps = scheme.epsilon();
  {
    const double g0 = std::sqrt(g_norm_sq(grid, vgrid, initial.g));
    const double r0 = std::sqrt(rho_norm_sq(grid, initial.rho));
    result.initial_layer = g0 > kInitialLayerRatio * std::max(1.0, r0);
  }

  std::vector<double> pending = options.snapshot_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next_snapshot = 0;
  auto visit = [&](const MicroMacroState& s) {
    result.max_zero_average_defect =
        std::max(result.max_zero_average_defect, zero_average_defect(vgrid, s.g));
    if (options.record_energy) result.energy.push_back(energy(grid, vgrid, s, eps));
    if (options.keep_states) result.states.push_back(s);
    while (next_snapshot < pending.size() &&
           s.time >= pending[next_snapshot] - 1e-12 * std::max(1.0, final_time)) {
      result.snapshots.push_back(s);
      ++next_snapshot;
    }
    if (options.observer) options.observer(s);
  };

  result.initial = initial;
  MicroMacroState current = initial;
  visit(current);
  for (std::size_t n = 0; n < sched.steps; ++n) {
    const double dt = n + 1 == sched.steps ? sched.last_dt : result.dt;
    try {
      current = scheme.step(current, dt);
    } catch (const NumericalFailure& e) {
      throw e.at_step(n + 1);
    }
    current.time = detail::step_time(sched, final_time, result.dt, n + 1);
    visit(current);
  }
  result.steps = sched.steps;
  result.final_state = std::move(current);
  return result;
}

inline RunResult run(const TransportProblem& problem, const InitialData& f0, double final_time,
                     const DtPolicy& policy, const RunOptions& options = {}) {
  const ApScheme scheme(problem);
  return run(scheme, scheme.decompose(f0), final_time, policy, options);
}

}  // namespace apkin
