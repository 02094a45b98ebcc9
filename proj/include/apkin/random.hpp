#pragma once

// Seeded 64-bit linear congruential generator. The recurrence and the
// uniform mapping are fixed so random initial data is reproducible in any
// language:
//   state <- 6364136223846793005 * state + 1442695040888963407  (mod 2^64)
//   uniform = (state >> 11) * 2^-53                               in [0, 1)

#include <cstdint>

#include "apkin/energy.hpp"
#include "apkin/spatial_grid.hpp"
#include "apkin/velocity.hpp"

namespace apkin {

class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit Lcg64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ = kMultiplier * state_ + kIncrement;
    return state_;
  }

  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Fills every entry uniformly in [lo, hi), location-major.
template <Staggering Where>
void fill_uniform(GridField<Where>& field, Lcg64& rng, double lo = -1.0, double hi = 1.0) {
  for (double& x : field.values()) x = rng.uniform(lo, hi);
}

/// Random O(1) well-prepared state: rho uniform in [0.5, 1.5), g uniform in
/// [-1, 1) then projected to zero velocity average per face.
inline MicroMacroState random_state(const StaggeredGrid& grid, const VelocityGrid& vgrid,
                                    Lcg64& rng) {
  MicroMacroState s;
  s.rho = CellField(grid.cells());
  s.g = FaceKineticField(grid.cells(), vgrid.count());
  fill_uniform(s.rho, rng, 0.5, 1.5);
  fill_uniform(s.g, rng);
  s.g = project_fluctuation(vgrid, s.g);
  return s;
}

}  // namespace apkin
