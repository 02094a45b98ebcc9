#pragma once

// Velocity-space discretization on v in [-1, 1]: the quadrature average <.>,
// the linear collision operator L and its pseudo-inverse on mean-zero
// functions, and the diffusion coefficient kappa = -<v L^{-1} v> / sigma.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "apkin/errors.hpp"

namespace apkin {

enum class QuadratureRule { gauss_legendre, two_point_telegraph };

inline std::string to_string(QuadratureRule rule) {
  return rule == QuadratureRule::gauss_legendre ? "gauss-legendre"
                                                : "two-point-telegraph";
}

/// Quadrature nodes and weights on [-1, 1] with sum(weights) = 2, so that
/// average(phi) = 1/2 sum_i w_i phi(v_i) realizes <phi>.
class VelocityGrid {
 public:
  std::size_t count() const noexcept { return nodes_.size(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double node(std::size_t j) const { return nodes_[j]; }
  double weight(std::size_t j) const { return weights_[j]; }
  QuadratureRule rule() const noexcept { return rule_; }

  /// <phi> without size checks; phi must have count() entries.
  double average_unchecked(const double* phi) const noexcept {
    double sum = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) sum += weights_[j] * phi[j];
    return 0.5 * sum;
  }

  /// <v phi>, the flux moment.
  double flux_unchecked(const double* phi) const noexcept {
    double sum = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j)
      sum += weights_[j] * nodes_[j] * phi[j];
    return 0.5 * sum;
  }

  friend bool operator==(const VelocityGrid&, const VelocityGrid&) = default;

 private:
  friend VelocityGrid build_velocity_grid(std::size_t, QuadratureRule);
  VelocityGrid(std::vector<double> nodes, std::vector<double> weights,
               QuadratureRule rule)
      : nodes_(std::move(nodes)), weights_(std::move(weights)), rule_(rule) {}

  std::vector<double> nodes_;
  std::vector<double> weights_;
  QuadratureRule rule_;
};

namespace detail {

// Newton iteration on P_n from the Chebyshev-like initial guess; only the
// positive half is computed and mirrored so the node set is exactly symmetric.
inline void gauss_legendre(std::size_t n, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute the derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double kk = static_cast<double>(k);
      const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
      p0 = p1;
      p1 = p2;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

}  // namespace detail

/// Builds a symmetric velocity quadrature. Throws InvalidArgument for odd
/// counts, counts below two, or a telegraph rule with count != 2.
inline VelocityGrid build_velocity_grid(std::size_t count, QuadratureRule rule) {
  if (count < 2) throw InvalidArgument("velocity grid needs at least 2 nodes");
  if (count % 2 != 0)
    throw InvalidArgument("velocity grid node count must be even, got " +
                          std::to_string(count));
  if (rule == QuadratureRule::two_point_telegraph) {
    if (count != 2)
      throw InvalidArgument("two-point-telegraph rule requires exactly 2 nodes");
    return VelocityGrid({-1.0, 1.0}, {1.0, 1.0}, rule);
  }
  std::vector<double> nodes;
  std::vector<double> weights;
  detail::gauss_legendre(count, nodes, weights);
  return VelocityGrid(std::move(nodes), std::move(weights), rule);
}

/// <phi> = 1/2 sum_i w_i phi(v_i).
inline double average(const VelocityGrid& grid, std::span<const double> phi) {
  if (phi.size() != grid.count())
    throw InvalidArgument("average: expected " + std::to_string(grid.count()) +
                          " values, got " + std::to_string(phi.size()));
  return grid.average_unchecked(phi.data());
}

/// Samples f at the velocity nodes.
inline std::vector<double> sample(const VelocityGrid& grid,
                                  const std::function<double(double)>& f) {
  std::vector<double> out(grid.count());
  for (std::size_t j = 0; j < grid.count(); ++j) out[j] = f(grid.node(j));
  return out;
}

/// Scattering kernel s(v, v') with user-asserted bounds 0 < s_min <= s <= s_max.
class CollisionKernel {
 public:
  using Evaluator = std::function<double(double, double)>;

  CollisionKernel(Evaluator s, double s_min, double s_max,
                  std::string name = "custom")
      : s_(std::move(s)), s_min_(s_min), s_max_(s_max), name_(std::move(name)) {}

  /// s = 1/2, for which L phi = <phi> - phi.
  static CollisionKernel isotropic() {
    return CollisionKernel([](double, double) { return 0.5; }, 0.5, 0.5,
                           "isotropic");
  }

  static CollisionKernel constant(double value) {
    return CollisionKernel([value](double, double) { return value; }, value,
                           value, "constant");
  }

  /// s = (1 + b v v') / 2 with |b| < 1.
  static CollisionKernel linear_anisotropic(double b) {
    return CollisionKernel(
        [b](double v, double w) { return 0.5 * (1.0 + b * v * w); },
        0.5 * (1.0 - std::abs(b)), 0.5 * (1.0 + std::abs(b)),
        "linear-anisotropic");
  }

  /// Kernel given only at the node pairs of `grid`, row-major count x count.
  /// Evaluating off the nodes throws InvalidArgument.
  static CollisionKernel tabulated(const VelocityGrid& grid,
                                   std::vector<double> table, double s_min,
                                   double s_max) {
    const std::size_t n = grid.count();
    if (table.size() != n * n)
      throw InvalidArgument("kernel table needs " + std::to_string(n * n) +
                            " entries, got " + std::to_string(table.size()));
    std::vector<double> nodes(grid.nodes().begin(), grid.nodes().end());
    auto index_of = [nodes](double v) {
      for (std::size_t j = 0; j < nodes.size(); ++j)
        if (std::abs(nodes[j] - v) <= 1e-14) return j;
      throw InvalidArgument("tabulated kernel evaluated off the velocity nodes");
    };
    return CollisionKernel(
        [table = std::move(table), index_of, n](double v, double w) {
          return table[index_of(v) * n + index_of(w)];
        },
        s_min, s_max, "custom-table");
  }

  double operator()(double v, double w) const { return s_(v, w); }
  double s_min() const noexcept { return s_min_; }
  double s_max() const noexcept { return s_max_; }
  const std::string& name() const noexcept { return name_; }

 private:
  Evaluator s_;
  double s_min_;
  double s_max_;
  std::string name_;
};

/// Dense matrix of phi -> L phi at the quadrature nodes,
/// (L phi)_i = sum_j w_j s(v_i, v_j) (phi_j - phi_i).
class CollisionOperator {
 public:
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  const VelocityGrid& grid() const noexcept { return grid_; }
  double s_min() const noexcept { return s_min_; }
  double s_max() const noexcept { return s_max_; }
  /// 2 s_min: <phi L phi> <= -spectral_gap <phi^2> on mean-zero phi.
  double spectral_gap() const noexcept { return 2.0 * s_min_; }
  /// max_i |sum_j w_j s(v_i, v_j) - 1|; zero for kernels normalized to one.
  double normalization_defect() const noexcept { return normalization_defect_; }

  std::vector<double> apply(std::span<const double> phi) const {
    if (phi.size() != grid_.count())
      throw InvalidArgument("collision operator: length mismatch");
    Eigen::Map<const Eigen::VectorXd> x(phi.data(),
                                        static_cast<Eigen::Index>(phi.size()));
    Eigen::VectorXd y = matrix_ * x;
    return {y.data(), y.data() + y.size()};
  }

  /// LU factorization of [L 1; w^T/2 0], reused by pseudo_inverse_apply.
  const Eigen::PartialPivLU<Eigen::MatrixXd>& bordered() const noexcept {
    return bordered_;
  }
  double bordered_rcond() const noexcept { return bordered_rcond_; }

 private:
  friend CollisionOperator build_collision_operator(const VelocityGrid&,
                                                    const CollisionKernel&);
  CollisionOperator(VelocityGrid grid, Eigen::MatrixXd matrix, double s_min,
                    double s_max, double defect)
      : grid_(std::move(grid)),
        matrix_(std::move(matrix)),
        s_min_(s_min),
        s_max_(s_max),
        normalization_defect_(defect) {
    const auto n = static_cast<Eigen::Index>(grid_.count());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + 1, n + 1);
    b.topLeftCorner(n, n) = matrix_;
    for (Eigen::Index j = 0; j < n; ++j) {
      b(j, n) = 1.0;
      b(n, j) = 0.5 * grid_.weight(static_cast<std::size_t>(j));
    }
    bordered_.compute(b);
    bordered_rcond_ = bordered_.rcond();
  }

  VelocityGrid grid_;
  Eigen::MatrixXd matrix_;
  double s_min_;
  double s_max_;
  double normalization_defect_;
  Eigen::PartialPivLU<Eigen::MatrixXd> bordered_;
  double bordered_rcond_ = 0.0;
};

/// Discretizes L with the grid's quadrature. Throws InvalidKernel when the
/// asserted bounds or the symmetry s(v,v') = s(v',v) fail at a node pair.
inline CollisionOperator build_collision_operator(const VelocityGrid& grid,
                                                  const CollisionKernel& kernel) {
  if (!(kernel.s_min() > 0.0))
    throw InvalidKernel("kernel lower bound s_min must be positive, got " +
                        std::to_string(kernel.s_min()));
  if (kernel.s_max() < kernel.s_min())
    throw InvalidKernel("kernel bounds inverted: s_max < s_min");
  const std::size_t n = grid.count();
  Eigen::MatrixXd s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = kernel(grid.node(i), grid.node(j));

  const double bound_tol = 1e-14 * std::max(1.0, kernel.s_max());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double sij = s(i, j);
      if (!std::isfinite(sij) || sij < kernel.s_min() - bound_tol ||
          sij > kernel.s_max() + bound_tol)
        throw InvalidKernel("kernel value " + std::to_string(sij) + " at (" +
                            std::to_string(grid.node(i)) + ", " +
                            std::to_string(grid.node(j)) +
                            ") outside [s_min, s_max]");
      if (std::abs(sij - s(j, i)) > 1e-14 * std::max(1.0, std::abs(sij)))
        throw InvalidKernel("kernel is not symmetric at node pair (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
    }
  }

  Eigen::MatrixXd m(n, n);
  double defect = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = grid.weight(j) * s(i, j);
      row += m(i, j);
    }
    m(i, i) -= row;
    defect = std::max(defect, std::abs(row - 1.0));
  }
  return CollisionOperator(grid, std::move(m), kernel.s_min(), kernel.s_max(),
                           defect);
}

/// Solves L psi = phi with <psi> = 0 through the bordered system.
/// phi must satisfy |<phi>| <= 1e-12 max(1, max|phi|).
inline std::vector<double> pseudo_inverse_apply(const CollisionOperator& op,
                                                std::span<const double> phi) {
  const VelocityGrid& grid = op.grid();
  const double mean = average(grid, phi);
  double scale = 1.0;
  for (double x : phi) scale = std::max(scale, std::abs(x));
  if (std::abs(mean) > 1e-12 * scale)
    throw InvalidArgument("pseudo_inverse_apply: input is not mean-zero (<phi> = " +
                          std::to_string(mean) + ")");
  if (!(op.bordered_rcond() > 1e-14))
    throw NumericalFailure("pseudo_inverse_apply: bordered collision system is singular");

  const auto n = static_cast<Eigen::Index>(grid.count());
  Eigen::VectorXd rhs(n + 1);
  for (Eigen::Index j = 0; j < n; ++j) rhs(j) = phi[static_cast<std::size_t>(j)];
  rhs(n) = 0.0;
  const Eigen::VectorXd sol = op.bordered().solve(rhs);
  std::vector<double> psi(sol.data(), sol.data() + n);

  const Eigen::Map<const Eigen::VectorXd> x(psi.data(), n);
  const Eigen::Map<const Eigen::VectorXd> b(phi.data(), n);
  const double residual = (op.matrix() * x - b).lpNorm<Eigen::Infinity>();
  const double ref = op.matrix().lpNorm<Eigen::Infinity>() * x.lpNorm<Eigen::Infinity>() +
                     b.lpNorm<Eigen::Infinity>();
  if (!std::isfinite(residual) || residual > 1e-11 * std::max(ref, 1e-300))
    throw NumericalFailure("pseudo_inverse_apply: residual " +
                           std::to_string(residual) + " too large");
  return psi;
}

/// kappa = -<v L^{-1} v> / sigma.
inline double diffusion_coefficient(const CollisionOperator& op, double sigma) {
  if (!(sigma > 0.0))
    throw InvalidArgument("diffusion_coefficient: sigma must be positive");
  const VelocityGrid& grid = op.grid();
  std::vector<double> v(grid.nodes().begin(), grid.nodes().end());
  const std::vector<double> psi = pseudo_inverse_apply(op, v);
  return -grid.flux_unchecked(psi.data()) / sigma;
}

}  // namespace apkin
