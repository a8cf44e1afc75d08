#pragma once

#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "hardylab/grids.hpp"

namespace hardylab {

/// Partial-wave channel of the Aharonov-Bohm operator. nu = m + alpha is
/// the eigenvalue of -i d/dphi + alpha on e^{i m phi}.
struct ChannelSpec {
  double alpha = 0.0;
  int d = 2;
  int m = 0;
  bool z_radial = false;  // required for d >= 4

  double nu() const { return static_cast<double>(m) + alpha; }
};

/// Fibre of the confining model at Fourier variable xi (dual to x).
struct ConfiningSpec {
  double beta = 0.0;
  double xi = 0.0;
};

enum class ConfiningSubtraction { none, quarter, quarter_plus_beta, full_thm2, with_xi_term };

enum class WeightKind {
  inv_rho2,
  inv_z2,
  inv_z2_plus_y2_over_z4,
  inv_r2,
  identity,
  xi2_term,
  y2_over_z4,
};

/// Sparse symmetric matrix of a quadratic form in quadrature coordinates:
/// u^T H u approximates the integral of the form density for nodal values u.
struct FormMatrix {
  Eigen::SparseMatrix<double> matrix;
  Quadrature quadrature;

  Eigen::Index dimension() const { return matrix.rows(); }
};

/// Diagonal of (density x quadrature weight).
struct DiagonalWeight {
  WeightKind kind = WeightKind::identity;
  Eigen::VectorXd values;
};

// Integral of |grad u|^2 against the quadrature's measure, Dirichlet ends
// closed by zero ghost values, midpoint densities on every difference.
FormMatrix assemble_gradient_form(const RadialGrid& grid, const Quadrature& quadrature);
FormMatrix assemble_gradient_form(const PlaneGrid& grid, const Quadrature& quadrature);

// d = 2 on a radial rho grid. d >= 3 on a (rho, s = |z|) plane grid whose
// s axis should carry a mirror lower end (even sector in z), or on a polar
// grid from make_polar_grid.
FormMatrix assemble_ab_channel(const ChannelSpec& spec, const RadialGrid& grid,
                               bool subtract_dimensional);
FormMatrix assemble_ab_channel(const ChannelSpec& spec, const PlaneGrid& grid,
                               bool subtract_dimensional);

// Fibre operator (xi + beta y / z^2)^2 - d_y^2 - d_z^2 on a (y, z) grid
// minus the selected lower-bound density.
FormMatrix assemble_confining(const ConfiningSpec& spec, const PlaneGrid& grid,
                              ConfiningSubtraction subtract);

DiagonalWeight assemble_weight(WeightKind kind, const RadialGrid& grid, const Quadrature& quadrature,
                               double coefficient = 1.0);
DiagonalWeight assemble_weight(WeightKind kind, const PlaneGrid& grid, const Quadrature& quadrature,
                               double coefficient = 1.0);

// H - coefficient * W, touching only the diagonal.
FormMatrix subtract_weight(FormMatrix form, const DiagonalWeight& weight, double coefficient);

double dist_to_integers(double alpha);

// The channel m = round(-alpha) minimises (m + alpha)^2.
int nearest_channel(double alpha);

struct AngularSpectrum {
  std::vector<std::pair<int, double>> levels;  // (m, (m + alpha)^2)
  double minimum = 0.0;
  std::vector<int> minimizers;
};

AngularSpectrum angular_spectrum(double alpha, int m_lo, int m_hi);

// Shifted oscillator -d_y^2 + (xi + beta y / z^2)^2 at a fixed height z on a
// signed y axis (Dirichlet ends), measure dy.
FormMatrix assemble_shifted_oscillator(const ConfiningSpec& spec, double z, const Axis& y_axis);

// 2|beta|/z^2 (n + 1/2) for n = 0..n_max.
std::vector<double> landau_levels(double beta, double z, int n_max);

struct GroundStateAnsatz {
  double beta = 0.0;
  double xi = 0.0;
  std::vector<double> y0;   // -z^2 xi / beta per node
  std::vector<double> eta;  // exp(-|beta| (y - y0)^2 / (2 z^2)) per node
};

GroundStateAnsatz ground_state(const ConfiningSpec& spec, const PlaneGrid& grid);

}  // namespace hardylab
