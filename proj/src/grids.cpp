#include "hardylab/grids.hpp"

#include <cmath>
#include <stdexcept>

namespace hardylab {

Axis::Axis(std::vector<double> nodes, Spacing spacing, bool signed_axis, Boundary lower,
           Boundary upper, double upper_plane)
    : nodes_(std::move(nodes)), spacing_(spacing), signed_(signed_axis), lower_(lower),
      upper_(upper), upper_plane_(upper_plane) {
  if (nodes_.size() < 2) throw std::invalid_argument("axis needs at least two nodes");
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    if (!(nodes_[i + 1] > nodes_[i])) throw std::invalid_argument("axis nodes must increase");
  }
  if (!signed_ && !(nodes_.front() > 0.0)) {
    throw std::invalid_argument("radial axis nodes must be positive");
  }
  if (upper_ == Boundary::mirror && !(upper_plane_ > nodes_.back())) {
    throw std::invalid_argument("upper mirror plane must lie beyond the last node");
  }
  if (lower_ == Boundary::mirror && signed_) {
    throw std::invalid_argument("mirror boundary requires a radial axis");
  }
}

double Axis::lower_ghost() const {
  const double x0 = nodes_[0];
  const double x1 = nodes_[1];
  if (spacing_ == Spacing::logarithmic) return x0 * x0 / x1;
  const double g = x0 - (x1 - x0);
  // A radial axis never puts its ghost below the singular set.
  return signed_ ? g : std::max(g, 0.0);
}

double Axis::upper_ghost() const {
  const std::size_t n = nodes_.size();
  const double a = nodes_[n - 2];
  const double b = nodes_[n - 1];
  if (spacing_ == Spacing::logarithmic) return b * b / a;
  return b + (b - a);
}

double Axis::relative_step() const {
  if (spacing_ == Spacing::logarithmic) return std::log(nodes_[1] / nodes_[0]);
  const double h = nodes_[1] - nodes_[0];
  if (signed_) return h / (0.5 * (nodes_.back() - nodes_.front()));
  return h / nodes_.front();
}

Axis Axis::with_boundaries(Boundary lower, Boundary upper) const {
  return Axis(nodes_, spacing_, signed_, lower, upper, upper_plane_);
}

PlaneGrid::PlaneGrid(Axis axis1, Axis axis2, PlaneCoordinates coordinates)
    : axis1_(std::move(axis1)), axis2_(std::move(axis2)), coordinates_(coordinates) {}

RadialGrid make_radial_grid(Spacing kind, double inner_cutoff, double outer_radius, int n) {
  if (!(inner_cutoff > 0.0)) {
    throw std::invalid_argument("inner_cutoff must be positive (Dirichlet truncation)");
  }
  if (!(outer_radius > inner_cutoff)) {
    throw std::invalid_argument("outer_radius must exceed inner_cutoff");
  }
  if (n < 3) throw std::invalid_argument("radial grid needs n >= 3");
  std::vector<double> nodes(static_cast<std::size_t>(n));
  const double last = static_cast<double>(n - 1);
  if (kind == Spacing::uniform) {
    const double h = (outer_radius - inner_cutoff) / last;
    for (int i = 0; i < n; ++i) nodes[i] = inner_cutoff + h * i;
  } else {
    const double log_ratio = std::log(outer_radius / inner_cutoff) / last;
    for (int i = 0; i < n; ++i) nodes[i] = inner_cutoff * std::exp(log_ratio * i);
  }
  nodes.front() = inner_cutoff;
  nodes.back() = outer_radius;
  return RadialGrid(std::move(nodes), kind, false);
}

Axis make_signed_grid(double lo, double hi, int n) {
  if (!(hi > lo)) throw std::invalid_argument("signed grid needs hi > lo");
  if (n < 3) throw std::invalid_argument("signed grid needs n >= 3");
  std::vector<double> nodes(static_cast<std::size_t>(n));
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) nodes[i] = lo + h * i;
  nodes.back() = hi;
  return Axis(std::move(nodes), Spacing::uniform, true);
}

PlaneGrid make_plane_grid(Axis axis1, Axis axis2) {
  if (axis2.is_signed() || !(axis2.inner_cutoff() > 0.0)) {
    throw std::invalid_argument("axis2 must be strictly positive (half-space z > 0)");
  }
  return PlaneGrid(std::move(axis1), std::move(axis2));
}

PlaneGrid make_polar_grid(double r_inner, double r_outer, int n_r, double theta_min, int n_theta) {
  auto r = make_radial_grid(Spacing::logarithmic, r_inner, r_outer, n_r);
  const double half_pi = 0.5 * std::acos(-1.0);
  if (!(theta_min > 0.0) || !(theta_min < 0.5 * half_pi)) {
    throw std::invalid_argument("theta_min must lie in (0, pi/4)");
  }
  if (n_theta < 3) throw std::invalid_argument("angular grid needs n >= 3");
  // Geometric nodes theta_min q^j whose mirror plane pi/2 sits halfway
  // between the last node and its geometric successor.
  const double last = static_cast<double>(n_theta - 1);
  double top = half_pi / 1.1;
  for (int iter = 0; iter < 200; ++iter) {
    const double q = std::pow(top / theta_min, 1.0 / last);
    top = 2.0 * half_pi / (1.0 + q);
  }
  const double log_ratio = std::log(top / theta_min) / last;
  std::vector<double> theta(static_cast<std::size_t>(n_theta));
  for (int j = 0; j < n_theta; ++j) theta[j] = theta_min * std::exp(log_ratio * j);
  theta.front() = theta_min;
  theta.back() = top;
  Axis angular(std::move(theta), Spacing::logarithmic, false, Boundary::dirichlet, Boundary::mirror,
               half_pi);
  return PlaneGrid(std::move(r), std::move(angular), PlaneCoordinates::polar);
}

double polar_angular_density(double theta, int d) {
  return std::sin(theta) * std::pow(std::cos(theta), d - 3);
}

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::line: return "line";
    case MeasureKind::rho_drho: return "rho_drho";
    case MeasureKind::r_dr: return "r_dr";
    case MeasureKind::r_pow_dr: return "r_pow_dr";
    case MeasureKind::rho_drho_dz: return "rho_drho_dz";
    case MeasureKind::dy_dz: return "dy_dz";
    case MeasureKind::s_pow_drho_ds: return "s_pow_drho_ds";
    case MeasureKind::polar_r_theta: return "polar_r_theta";
  }
  return "unknown";
}

std::vector<double> trapezoid_weights(const Axis& axis) {
  const auto& x = axis.nodes();
  const std::size_t n = x.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? x[0] : 0.5 * (x[i - 1] + x[i]);
    const double right = i + 1 == n ? x[n - 1] : 0.5 * (x[i] + x[i + 1]);
    w[i] = right - left;
  }
  if (axis.lower() == Boundary::mirror) w[0] = 0.5 * (x[0] + x[1]);
  if (axis.upper() == Boundary::mirror) w[n - 1] = axis.upper_plane() - 0.5 * (x[n - 2] + x[n - 1]);
  return w;
}

double measure_power(MeasureKind kind, int axis, int d) {
  switch (kind) {
    case MeasureKind::line:
    case MeasureKind::dy_dz: return 0.0;
    case MeasureKind::rho_drho:
    case MeasureKind::r_dr: return axis == 0 ? 1.0 : 0.0;
    case MeasureKind::r_pow_dr: return axis == 0 ? static_cast<double>(d - 1) : 0.0;
    case MeasureKind::rho_drho_dz: return axis == 0 ? 1.0 : 0.0;
    case MeasureKind::s_pow_drho_ds: return axis == 0 ? 1.0 : static_cast<double>(d - 3);
    case MeasureKind::polar_r_theta: return axis == 0 ? static_cast<double>(d - 1) : 0.0;
  }
  return 0.0;
}

namespace {

bool is_plane_measure(MeasureKind kind) {
  return kind == MeasureKind::rho_drho_dz || kind == MeasureKind::dy_dz ||
         kind == MeasureKind::s_pow_drho_ds || kind == MeasureKind::polar_r_theta;
}

std::vector<double> weighted(const Axis& axis, double power) {
  auto w = trapezoid_weights(axis);
  if (power != 0.0) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= std::pow(axis[i], power);
  }
  return w;
}

void check_power_dimension(MeasureKind kind, int d) {
  if (kind == MeasureKind::r_pow_dr && d < 1) {
    throw std::invalid_argument("r_pow_dr measure needs the dimension d >= 1");
  }
  if ((kind == MeasureKind::s_pow_drho_ds || kind == MeasureKind::polar_r_theta) && d < 3) {
    throw std::invalid_argument(to_string(kind) + " measure needs the dimension d >= 3");
  }
}

}  // namespace

Quadrature quadrature_for(const RadialGrid& grid, MeasureKind kind, int d) {
  if (is_plane_measure(kind)) {
    throw std::invalid_argument("measure " + to_string(kind) + " needs a plane grid");
  }
  check_power_dimension(kind, d);
  const double p = measure_power(kind, 0, d);
  if (p != 0.0 && grid.is_signed()) {
    throw std::invalid_argument("measure " + to_string(kind) + " needs a radial axis");
  }
  Quadrature q;
  q.measure_kind = kind;
  q.dimension = d;
  q.axis1_power = p;
  q.axis1_weights = weighted(grid, p);
  q.axis2_weights = {1.0};
  q.weights = q.axis1_weights;
  return q;
}

Quadrature quadrature_for(const PlaneGrid& grid, MeasureKind kind, int d) {
  if (!is_plane_measure(kind)) {
    throw std::invalid_argument("measure " + to_string(kind) + " needs a radial grid");
  }
  check_power_dimension(kind, d);
  const bool polar = grid.coordinates() == PlaneCoordinates::polar;
  if (polar != (kind == MeasureKind::polar_r_theta)) {
    throw std::invalid_argument("measure " + to_string(kind) + " does not match the grid coordinates");
  }
  Quadrature q;
  q.measure_kind = kind;
  q.dimension = d;
  q.axis1_power = measure_power(kind, 0, d);
  q.axis2_power = measure_power(kind, 1, d);
  if (q.axis1_power != 0.0 && grid.axis1().is_signed()) {
    throw std::invalid_argument("measure " + to_string(kind) + " needs a radial axis1");
  }
  q.axis1_weights = weighted(grid.axis1(), q.axis1_power);
  q.axis2_weights = weighted(grid.axis2(), q.axis2_power);
  if (polar) {
    for (std::size_t j = 0; j < grid.n2(); ++j) {
      q.axis2_weights[j] *= polar_angular_density(grid.axis2()[j], d);
    }
  }
  q.weights.resize(grid.size());
  for (std::size_t j = 0; j < grid.n2(); ++j) {
    for (std::size_t i = 0; i < grid.n1(); ++i) {
      q.weights[grid.index(i, j)] = q.axis1_weights[i] * q.axis2_weights[j];
    }
  }
  return q;
}

}  // namespace hardylab
