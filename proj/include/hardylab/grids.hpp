#pragma once

#include <string>
#include <vector>

namespace hardylab {

enum class Spacing { uniform, logarithmic };

// How an axis end is closed. Dirichlet ends carry a zero ghost value one
// grid step outside the last node; mirror ends are reflecting. A lower
// mirror reflects about the coordinate origin (even parity, or the natural
// condition of a degenerate measure such as s^{d-3} ds); an upper mirror
// reflects about a plane just beyond the last node.
enum class Boundary { dirichlet, mirror };

/// One-dimensional node set. A radial axis has strictly positive nodes;
/// a signed axis is uniform and may cross zero (the y coordinate).
class Axis {
 public:
  Axis() = default;
  Axis(std::vector<double> nodes, Spacing spacing, bool signed_axis,
       Boundary lower = Boundary::dirichlet, Boundary upper = Boundary::dirichlet,
       double upper_plane = 0.0);

  const std::vector<double>& nodes() const { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  Spacing spacing() const { return spacing_; }
  bool is_signed() const { return signed_; }
  Boundary lower() const { return lower_; }
  Boundary upper() const { return upper_; }
  double inner_cutoff() const { return nodes_.front(); }
  double outer_radius() const { return nodes_.back(); }
  // Reflection plane of an upper mirror end.
  double upper_plane() const { return upper_plane_; }

  // Location of the zero ghost value beyond each Dirichlet end.
  double lower_ghost() const;
  double upper_ghost() const;

  // Dimensionless mesh parameter: log step for logarithmic axes, the
  // spacing relative to the smallest |node| for uniform radial axes and
  // relative to the half-extent for signed axes.
  double relative_step() const;

  Axis with_boundaries(Boundary lower, Boundary upper) const;

 private:
  std::vector<double> nodes_;
  Spacing spacing_ = Spacing::uniform;
  bool signed_ = false;
  Boundary lower_ = Boundary::dirichlet;
  Boundary upper_ = Boundary::dirichlet;
  double upper_plane_ = 0.0;
};

using RadialGrid = Axis;

// Cartesian plane grids carry (rho, z), (rho, s) or (y, z). Polar grids
// carry (r, theta) with theta the angle from the singular axis {rho = 0},
// so rho = r sin(theta) and s = r cos(theta).
enum class PlaneCoordinates { cartesian, polar };

/// Tensor-product grid; node (i, j) has flat index j * n1 + i.
class PlaneGrid {
 public:
  PlaneGrid(Axis axis1, Axis axis2, PlaneCoordinates coordinates = PlaneCoordinates::cartesian);

  PlaneCoordinates coordinates() const { return coordinates_; }

  const Axis& axis1() const { return axis1_; }
  const Axis& axis2() const { return axis2_; }
  std::size_t n1() const { return axis1_.size(); }
  std::size_t n2() const { return axis2_.size(); }
  std::size_t size() const { return n1() * n2(); }
  std::size_t index(std::size_t i, std::size_t j) const { return j * n1() + i; }

 private:
  Axis axis1_;
  Axis axis2_;
  PlaneCoordinates coordinates_ = PlaneCoordinates::cartesian;
};

RadialGrid make_radial_grid(Spacing kind, double inner_cutoff, double outer_radius, int n);

// Uniform grid on [lo, hi], used for the signed y coordinate.
Axis make_signed_grid(double lo, double hi, int n);

// axis2 must lie in the open half-line (0, inf).
PlaneGrid make_plane_grid(Axis axis1, Axis axis2);

// (r, theta) grid for the channels with d >= 3: r logarithmic on
// [r_inner, r_outer] with Dirichlet ends, theta logarithmic from
// theta_min (Dirichlet, the cone around the singular axis is cut out) up
// to a mirror at theta = pi/2 (even sector in z).
PlaneGrid make_polar_grid(double r_inner, double r_outer, int n_r, double theta_min, int n_theta);

// Measure densities are products of coordinate powers x^p per axis.
enum class MeasureKind {
  line,           // dx
  rho_drho,       // rho drho
  r_dr,           // r dr (alias of rho_drho on a radial axis)
  r_pow_dr,       // r^{d-1} dr
  rho_drho_dz,    // rho drho dz on (rho, z)
  dy_dz,          // dy dz
  s_pow_drho_ds,  // rho s^{d-3} drho ds
  polar_r_theta,  // r^{d-1} sin(theta) cos(theta)^{d-3} dr dtheta on a polar grid
};

std::string to_string(MeasureKind kind);

/// Trapezoid weights times the measure density at each node. axis_weights
/// keep the per-axis factors so that forms can build tensor stencils.
struct Quadrature {
  MeasureKind measure_kind = MeasureKind::line;
  int dimension = 0;  // ambient d for the power measures, 0 otherwise
  std::vector<double> weights;
  std::vector<double> axis1_weights;
  std::vector<double> axis2_weights;
  double axis1_power = 0.0;
  double axis2_power = 0.0;
};

// sin(theta) cos(theta)^{d-3}, the angular density of polar_r_theta.
double polar_angular_density(double theta, int d);

// 1D trapezoid weights honouring mirror ends (a mirror end extends the
// first cell to the origin).
std::vector<double> trapezoid_weights(const Axis& axis);

double measure_power(MeasureKind kind, int axis, int d);

Quadrature quadrature_for(const RadialGrid& grid, MeasureKind kind, int d = 0);
Quadrature quadrature_for(const PlaneGrid& grid, MeasureKind kind, int d = 0);

}  // namespace hardylab
