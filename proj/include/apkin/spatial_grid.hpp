#pragma once

// Staggered periodic grids and the finite-difference operators acting on them.
//
// Cell (integer) nodes sit at x_i = i dx and carry rho-like quantities; face
// (half-integer) nodes sit at x_{i+1/2} = (i + 1/2) dx and carry g-like
// quantities. Face k stores x_{k+1/2}, i.e. the face between cells k and k+1.
// All indices wrap modulo the cell count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "apkin/errors.hpp"
#include "apkin/velocity.hpp"

namespace apkin {

class StaggeredGrid {
 public:
  StaggeredGrid(std::size_t cells, double length) : cells_(cells), length_(length) {
    if (cells < 4)
      throw InvalidArgument("staggered grid needs at least 4 cells, got " +
                            std::to_string(cells));
    if (!(length > 0.0) || !std::isfinite(length))
      throw InvalidArgument("staggered grid length must be positive");
    dx_ = length / static_cast<double>(cells);
  }

  std::size_t cells() const noexcept { return cells_; }
  double dx() const noexcept { return dx_; }
  double length() const noexcept { return length_; }
  double node(std::size_t i) const noexcept { return static_cast<double>(i) * dx_; }
  double face(std::size_t k) const noexcept {
    return (static_cast<double>(k) + 0.5) * dx_;
  }
  std::size_t next(std::size_t i) const noexcept { return i + 1 == cells_ ? 0 : i + 1; }
  std::size_t prev(std::size_t i) const noexcept { return i == 0 ? cells_ - 1 : i - 1; }

  friend bool operator==(const StaggeredGrid&, const StaggeredGrid&) = default;

 private:
  std::size_t cells_;
  double length_;
  double dx_;
};

enum class Staggering { cell, face };

/// Values on one of the two staggered grids, `width` entries per location,
/// stored location-major (velocity index innermost).
template <Staggering Where>
class GridField {
 public:
  GridField() = default;
  explicit GridField(std::size_t points, std::size_t width = 1, double fill = 0.0)
      : points_(points), width_(width), values_(points * width, fill) {
    if (width == 0) throw InvalidArgument("grid field width must be positive");
  }
  GridField(std::size_t points, std::size_t width, std::vector<double> values)
      : points_(points), width_(width), values_(std::move(values)) {
    if (values_.size() != points * width)
      throw InvalidArgument("grid field: value count does not match shape");
  }

  std::size_t points() const noexcept { return points_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j = 0) noexcept {
    return values_[i * width_ + j];
  }
  const double& operator()(std::size_t i, std::size_t j = 0) const noexcept {
    return values_[i * width_ + j];
  }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  const double& operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> block(std::size_t i) noexcept {
    return {values_.data() + i * width_, width_};
  }
  std::span<const double> block(std::size_t i) const noexcept {
    return {values_.data() + i * width_, width_};
  }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool same_shape(const GridField& other) const noexcept {
    return points_ == other.points_ && width_ == other.width_;
  }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(),
                       [](double x) { return std::isfinite(x); });
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
  }

  GridField& operator+=(const GridField& rhs) {
    require_shape(rhs);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += rhs.values_[k];
    return *this;
  }
  GridField& operator-=(const GridField& rhs) {
    require_shape(rhs);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= rhs.values_[k];
    return *this;
  }
  GridField& operator*=(double a) noexcept {
    for (double& x : values_) x *= a;
    return *this;
  }
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(double s, GridField a) { return a *= s; }
  friend GridField operator*(GridField a, double s) { return a *= s; }

  friend bool operator==(const GridField&, const GridField&) = default;

 private:
  void require_shape(const GridField& rhs) const {
    if (!same_shape(rhs)) throw InvalidArgument("grid field shape mismatch");
  }

  std::size_t points_ = 0;
  std::size_t width_ = 1;
  std::vector<double> values_;
};

/// Integer-node values; width 1 for rho-like data, width = velocity count for
/// kinetic samples at cell nodes.
using CellField = GridField<Staggering::cell>;
/// Half-node values; width = velocity count for g-like data, width 1 for
/// per-face scalars such as fluxes.
using FaceKineticField = GridField<Staggering::face>;

namespace detail {

template <class Field>
void require_points(const StaggeredGrid& grid, const Field& f, const char* op) {
  if (f.points() != grid.cells())
    throw InvalidArgument(std::string(op) + ": field has " +
                          std::to_string(f.points()) + " points, grid has " +
                          std::to_string(grid.cells()));
}

}  // namespace detail

/// (D^- phi)_{i+1/2} = (phi_{i+1/2} - phi_{i-1/2}) / dx.
inline FaceKineticField d_minus(const StaggeredGrid& grid, const FaceKineticField& phi) {
  detail::require_points(grid, phi, "d_minus");
  FaceKineticField out(phi.points(), phi.width());
  const double inv = 1.0 / grid.dx();
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    const std::size_t km = grid.prev(k);
    for (std::size_t j = 0; j < phi.width(); ++j)
      out(k, j) = (phi(k, j) - phi(km, j)) * inv;
  }
  return out;
}

/// (D^+ phi)_{i+1/2} = (phi_{i+3/2} - phi_{i+1/2}) / dx.
inline FaceKineticField d_plus(const StaggeredGrid& grid, const FaceKineticField& phi) {
  detail::require_points(grid, phi, "d_plus");
  FaceKineticField out(phi.points(), phi.width());
  const double inv = 1.0 / grid.dx();
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    const std::size_t kp = grid.next(k);
    for (std::size_t j = 0; j < phi.width(); ++j)
      out(k, j) = (phi(kp, j) - phi(k, j)) * inv;
  }
  return out;
}

/// (D^c phi)_{i+1/2} = (phi_{i+3/2} - phi_{i-1/2}) / (2 dx).
inline FaceKineticField d_center(const StaggeredGrid& grid, const FaceKineticField& phi) {
  detail::require_points(grid, phi, "d_center");
  FaceKineticField out(phi.points(), phi.width());
  const double inv = 0.5 / grid.dx();
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    const std::size_t kp = grid.next(k);
    const std::size_t km = grid.prev(k);
    for (std::size_t j = 0; j < phi.width(); ++j)
      out(k, j) = (phi(kp, j) - phi(km, j)) * inv;
  }
  return out;
}

/// (D^0 phi)_i = (phi_{i+1/2} - phi_{i-1/2}) / dx, faces to cells.
inline CellField d_zero(const StaggeredGrid& grid, const FaceKineticField& phi) {
  detail::require_points(grid, phi, "d_zero");
  CellField out(phi.points(), phi.width());
  const double inv = 1.0 / grid.dx();
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    const std::size_t below = grid.prev(i);  // face i-1/2
    for (std::size_t j = 0; j < phi.width(); ++j)
      out(i, j) = (phi(i, j) - phi(below, j)) * inv;
  }
  return out;
}

/// (delta^0 mu)_{i+1/2} = (mu_{i+1} - mu_i) / dx, cells to faces.
inline FaceKineticField delta_zero(const StaggeredGrid& grid, const CellField& mu) {
  detail::require_points(grid, mu, "delta_zero");
  FaceKineticField out(mu.points(), mu.width());
  const double inv = 1.0 / grid.dx();
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    const std::size_t kp = grid.next(k);
    for (std::size_t j = 0; j < mu.width(); ++j)
      out(k, j) = (mu(kp, j) - mu(k, j)) * inv;
  }
  return out;
}

/// (v^+ D^- + v^- D^+) phi per velocity node, v^{+-} = (v +- |v|) / 2.
inline FaceKineticField upwind_transport(const StaggeredGrid& grid,
                                         const VelocityGrid& vgrid,
                                         const FaceKineticField& phi) {
  detail::require_points(grid, phi, "upwind_transport");
  if (phi.width() != vgrid.count())
    throw InvalidArgument("upwind_transport: field width does not match velocity grid");
  FaceKineticField out(phi.points(), phi.width());
  const double inv = 1.0 / grid.dx();
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    const std::size_t kp = grid.next(k);
    const std::size_t km = grid.prev(k);
    for (std::size_t j = 0; j < vgrid.count(); ++j) {
      const double v = vgrid.node(j);
      out(k, j) = v > 0.0 ? v * (phi(k, j) - phi(km, j)) * inv
                          : v * (phi(kp, j) - phi(k, j)) * inv;
    }
  }
  return out;
}

/// phi - <phi> at every face.
inline FaceKineticField project_fluctuation(const VelocityGrid& vgrid,
                                            const FaceKineticField& phi) {
  if (phi.width() != vgrid.count())
    throw InvalidArgument("project_fluctuation: field width does not match velocity grid");
  FaceKineticField out = phi;
  for (std::size_t k = 0; k < phi.points(); ++k) {
    const double mean = vgrid.average_unchecked(&phi(k, 0));
    for (double& x : out.block(k)) x -= mean;
  }
  return out;
}

/// <phi> per location, as a width-1 field of the same staggering.
template <Staggering Where>
GridField<Where> velocity_average(const VelocityGrid& vgrid, const GridField<Where>& phi) {
  if (phi.width() != vgrid.count())
    throw InvalidArgument("velocity_average: field width does not match velocity grid");
  GridField<Where> out(phi.points());
  for (std::size_t k = 0; k < phi.points(); ++k)
    out(k) = vgrid.average_unchecked(&phi(k, 0));
  return out;
}

/// <v phi> per location.
template <Staggering Where>
GridField<Where> velocity_flux(const VelocityGrid& vgrid, const GridField<Where>& phi) {
  if (phi.width() != vgrid.count())
    throw InvalidArgument("velocity_flux: field width does not match velocity grid");
  GridField<Where> out(phi.points());
  for (std::size_t k = 0; k < phi.points(); ++k)
    out(k) = vgrid.flux_unchecked(&phi(k, 0));
  return out;
}

/// Multiplies each velocity column by a function of the node value.
inline FaceKineticField scale_by_velocity(const VelocityGrid& vgrid,
                                          const FaceKineticField& phi,
                                          double (*weight)(double)) {
  FaceKineticField out = phi;
  for (std::size_t k = 0; k < phi.points(); ++k)
    for (std::size_t j = 0; j < vgrid.count(); ++j) out(k, j) *= weight(vgrid.node(j));
  return out;
}

}  // namespace apkin
