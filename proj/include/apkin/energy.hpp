#pragma once

// Micro-macro state and the discrete norms used by the energy estimate:
//   ||mu||^2   = sum_i mu_i^2 dx            (cell fields)
//   |||phi|||^2 = sum_i <phi_{i+1/2}^2> dx   (face kinetic fields)
// Sums run in ascending index order with velocity innermost, so results are
// reproducible bit-for-bit for a given state.

#include <cmath>
#include <cstddef>
#include <vector>

#include "apkin/spatial_grid.hpp"
#include "apkin/velocity.hpp"

namespace apkin {

/// (rho^n, g^n) at one time level.
struct MicroMacroState {
  CellField rho;        // width 1, integer nodes
  FaceKineticField g;   // width = velocity count, half nodes
  double time = 0.0;
  std::size_t step_index = 0;
};

/// max over faces of |<g_{i+1/2}>|.
inline double zero_average_defect(const VelocityGrid& vgrid, const FaceKineticField& g) {
  double worst = 0.0;
  for (std::size_t k = 0; k < g.points(); ++k)
    worst = std::max(worst, std::abs(vgrid.average_unchecked(&g(k, 0))));
  return worst;
}

inline double rho_norm_sq(const StaggeredGrid& grid, const CellField& mu) {
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) sum += mu[i] * mu[i];
  return sum * grid.dx();
}

inline double g_norm_sq(const StaggeredGrid& grid, const VelocityGrid& vgrid,
                        const FaceKineticField& phi) {
  double sum = 0.0;
  for (std::size_t k = 0; k < phi.points(); ++k) {
    double face = 0.0;
    for (std::size_t j = 0; j < vgrid.count(); ++j)
      face += vgrid.weight(j) * phi(k, j) * phi(k, j);
    sum += 0.5 * face;
  }
  return sum * grid.dx();
}

/// (phi, psi) = sum_i <phi psi> dx.
inline double g_inner(const StaggeredGrid& grid, const VelocityGrid& vgrid,
                      const FaceKineticField& phi, const FaceKineticField& psi) {
  double sum = 0.0;
  for (std::size_t k = 0; k < phi.points(); ++k) {
    double face = 0.0;
    for (std::size_t j = 0; j < vgrid.count(); ++j)
      face += vgrid.weight(j) * phi(k, j) * psi(k, j);
    sum += 0.5 * face;
  }
  return sum * grid.dx();
}

struct EnergyRecord {
  std::size_t step_index = 0;
  double time = 0.0;
  double rho_norm_sq = 0.0;
  double g_norm_sq = 0.0;
  double energy = 0.0;  // rho_norm_sq + epsilon^2 g_norm_sq
};

inline EnergyRecord energy(const StaggeredGrid& grid, const VelocityGrid& vgrid,
                           const MicroMacroState& state, double epsilon) {
  EnergyRecord r;
  r.step_index = state.step_index;
  r.time = state.time;
  r.rho_norm_sq = rho_norm_sq(grid, state.rho);
  r.g_norm_sq = g_norm_sq(grid, vgrid, state.g);
  r.energy = r.rho_norm_sq + epsilon * epsilon * r.g_norm_sq;
  return r;
}

}  // namespace apkin
