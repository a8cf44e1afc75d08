#include "hardylab/forms.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace hardylab {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// One difference (u_a - u_b)^2 with coefficient c, written symmetrically.
void add_edge(Triplets& t, Eigen::Index a, Eigen::Index b, double c) {
  t.emplace_back(a, a, c);
  t.emplace_back(b, b, c);
  t.emplace_back(a, b, -c);
  t.emplace_back(b, a, -c);
}

// Edge coefficients along one axis, including ghost edges at Dirichlet ends.
// `density(x)` is evaluated at edge midpoints. `emit(i, j_or_minus1, c)`
// receives node indices along the axis; -1 marks the ghost.
template <class Density, class Emit>
void axis_edges(const Axis& axis, Density&& density, Emit&& emit) {
  const auto& x = axis.nodes();
  const std::size_t n = x.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    emit(static_cast<long>(i), static_cast<long>(i + 1),
         density(0.5 * (x[i] + x[i + 1])) / (x[i + 1] - x[i]));
  }
  if (axis.lower() == Boundary::dirichlet) {
    const double g = axis.lower_ghost();
    emit(0L, -1L, density(0.5 * (g + x[0])) / (x[0] - g));
  }
  if (axis.upper() == Boundary::dirichlet) {
    const double g = axis.upper_ghost();
    emit(static_cast<long>(n - 1), -1L, density(0.5 * (x[n - 1] + g)) / (g - x[n - 1]));
  }
}

auto power_density(double power) {
  return [power](double x) { return power == 0.0 ? 1.0 : std::pow(x, power); };
}

Eigen::SparseMatrix<double> from_triplets(Eigen::Index n, const Triplets& t) {
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

void add_diagonal(Eigen::SparseMatrix<double>& m, const Eigen::VectorXd& diag) {
  for (Eigen::Index k = 0; k < diag.size(); ++k) m.coeffRef(k, k) += diag[k];
}

double checked_inverse_square(double x, const char* what) {
  if (x == 0.0) throw std::invalid_argument(std::string("weight evaluated on singular set: ") + what);
  return 1.0 / (x * x);
}

double density_1d(WeightKind kind, double x) {
  switch (kind) {
    case WeightKind::inv_rho2:
    case WeightKind::inv_z2:
    case WeightKind::inv_r2: return checked_inverse_square(x, "1/x^2");
    case WeightKind::identity:
    case WeightKind::xi2_term: return 1.0;
    case WeightKind::inv_z2_plus_y2_over_z4:
    case WeightKind::y2_over_z4:
      throw std::invalid_argument("weight kind needs a (y, z) plane grid");
  }
  return 1.0;
}

double density_2d(WeightKind kind, double a, double b) {
  switch (kind) {
    case WeightKind::inv_rho2: return checked_inverse_square(a, "1/rho^2");
    case WeightKind::inv_z2: return checked_inverse_square(b, "1/z^2");
    case WeightKind::inv_r2: return 1.0 / (a * a + b * b);
    case WeightKind::identity:
    case WeightKind::xi2_term: return 1.0;
    case WeightKind::inv_z2_plus_y2_over_z4: {
      const double iz2 = checked_inverse_square(b, "1/z^2");
      return (1.0 + a * a * iz2) * iz2;
    }
    case WeightKind::y2_over_z4: {
      const double iz2 = checked_inverse_square(b, "1/z^2");
      return a * a * iz2 * iz2;
    }
  }
  return 1.0;
}

// (rho, s) at node (i, j) of a (rho, s) or (r, theta) grid.
std::pair<double, double> cylindrical(const PlaneGrid& grid, std::size_t i, std::size_t j) {
  const double a = grid.axis1()[i];
  const double b = grid.axis2()[j];
  if (grid.coordinates() == PlaneCoordinates::polar) return {a * std::sin(b), a * std::cos(b)};
  return {a, b};
}

void check_weight_sizes(std::size_t nodes, const Quadrature& q) {
  if (q.weights.size() != nodes) {
    throw std::invalid_argument("quadrature does not match the grid");
  }
}

}  // namespace

FormMatrix assemble_gradient_form(const RadialGrid& grid, const Quadrature& quadrature) {
  check_weight_sizes(grid.size(), quadrature);
  Triplets t;
  t.reserve(4 * grid.size());
  axis_edges(grid, power_density(quadrature.axis1_power), [&](long a, long b, double c) {
    if (b < 0) {
      t.emplace_back(a, a, c);
    } else {
      add_edge(t, a, b, c);
    }
  });
  return {from_triplets(static_cast<Eigen::Index>(grid.size()), t), quadrature};
}

FormMatrix assemble_gradient_form(const PlaneGrid& grid, const Quadrature& quadrature) {
  check_weight_sizes(grid.size(), quadrature);
  const bool polar = quadrature.measure_kind == MeasureKind::polar_r_theta;
  if (polar != (grid.coordinates() == PlaneCoordinates::polar)) {
    throw std::invalid_argument("quadrature does not match the grid coordinates");
  }
  const int d = quadrature.dimension;
  std::function<double(double)> density1 = power_density(quadrature.axis1_power);
  std::function<double(double)> density2 = power_density(quadrature.axis2_power);
  if (polar) density2 = [d](double theta) { return polar_angular_density(theta, d); };
  Triplets t;
  t.reserve(8 * grid.size());
  for (std::size_t j = 0; j < grid.n2(); ++j) {
    const double w2 = quadrature.axis2_weights[j];
    axis_edges(grid.axis1(), density1, [&](long a, long b, double c) {
      const auto ia = static_cast<Eigen::Index>(grid.index(static_cast<std::size_t>(a), j));
      if (b < 0) {
        t.emplace_back(ia, ia, c * w2);
      } else {
        add_edge(t, ia, static_cast<Eigen::Index>(grid.index(static_cast<std::size_t>(b), j)),
                 c * w2);
      }
    });
  }
  for (std::size_t i = 0; i < grid.n1(); ++i) {
    // |d_theta u|^2 / r^2 in polar coordinates.
    const double w1 = polar ? quadrature.axis1_weights[i] / (grid.axis1()[i] * grid.axis1()[i])
                            : quadrature.axis1_weights[i];
    axis_edges(grid.axis2(), density2, [&](long a, long b, double c) {
      const auto ia = static_cast<Eigen::Index>(grid.index(i, static_cast<std::size_t>(a)));
      if (b < 0) {
        t.emplace_back(ia, ia, c * w1);
      } else {
        add_edge(t, ia, static_cast<Eigen::Index>(grid.index(i, static_cast<std::size_t>(b))),
                 c * w1);
      }
    });
  }
  return {from_triplets(static_cast<Eigen::Index>(grid.size()), t), quadrature};
}

FormMatrix assemble_ab_channel(const ChannelSpec& spec, const RadialGrid& grid,
                               bool subtract_dimensional) {
  if (spec.d < 2) throw std::invalid_argument("dimension d must be >= 2");
  if (spec.d != 2) {
    throw std::invalid_argument("d >= 3 channels live on a (rho, z) plane grid");
  }
  (void)subtract_dimensional;  // ((d-2)/2)^2 vanishes for d = 2
  const auto q = quadrature_for(grid, MeasureKind::rho_drho);
  auto form = assemble_gradient_form(grid, q);
  const double nu2 = spec.nu() * spec.nu();
  if (nu2 != 0.0) {
    Eigen::VectorXd diag(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      diag[static_cast<Eigen::Index>(i)] = nu2 / (grid[i] * grid[i]) * q.weights[i];
    }
    add_diagonal(form.matrix, diag);
  }
  return form;
}

FormMatrix assemble_ab_channel(const ChannelSpec& spec, const PlaneGrid& grid,
                               bool subtract_dimensional) {
  if (spec.d < 2) throw std::invalid_argument("dimension d must be >= 2");
  if (spec.d == 2) throw std::invalid_argument("d = 2 channels live on a radial rho grid");
  if (spec.d >= 4 && !spec.z_radial) {
    throw std::invalid_argument("d >= 4 is only supported in the z-radial sector (z_radial flag)");
  }
  const bool polar = grid.coordinates() == PlaneCoordinates::polar;
  const auto kind = polar ? MeasureKind::polar_r_theta
                    : spec.d == 3 ? MeasureKind::rho_drho_dz
                                  : MeasureKind::s_pow_drho_ds;
  const auto q = quadrature_for(grid, kind, spec.d);
  auto form = assemble_gradient_form(grid, q);
  const double nu2 = spec.nu() * spec.nu();
  const double half = 0.5 * (spec.d - 2);
  const double dim_const = subtract_dimensional ? half * half : 0.0;
  Eigen::VectorXd diag(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.n2(); ++j) {
    for (std::size_t i = 0; i < grid.n1(); ++i) {
      const auto [rho, s] = cylindrical(grid, i, j);
      const std::size_t k = grid.index(i, j);
      const double density = nu2 / (rho * rho) - dim_const / (rho * rho + s * s);
      diag[static_cast<Eigen::Index>(k)] = density * q.weights[k];
    }
  }
  add_diagonal(form.matrix, diag);
  return form;
}

FormMatrix assemble_confining(const ConfiningSpec& spec, const PlaneGrid& grid,
                              ConfiningSubtraction subtract) {
  if (subtract == ConfiningSubtraction::with_xi_term && spec.beta == 0.0) {
    throw std::invalid_argument("with_xi_term subtraction requires beta != 0");
  }
  const auto q = quadrature_for(grid, MeasureKind::dy_dz);
  auto form = assemble_gradient_form(grid, q);
  const double b = std::abs(spec.beta);
  Eigen::VectorXd diag(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.n2(); ++j) {
    const double z = grid.axis2()[j];
    const double iz2 = 1.0 / (z * z);
    for (std::size_t i = 0; i < grid.n1(); ++i) {
      const double y = grid.axis1()[i];
      const double shifted = spec.xi + spec.beta * y * iz2;
      double density = shifted * shifted;
      switch (subtract) {
        case ConfiningSubtraction::none: break;
        case ConfiningSubtraction::quarter: density -= 0.25 * iz2; break;
        case ConfiningSubtraction::quarter_plus_beta: density -= (0.25 + b) * iz2; break;
        case ConfiningSubtraction::full_thm2:
          density -= (0.25 + b) * iz2 + b * y * y * iz2 * iz2;
          break;
        case ConfiningSubtraction::with_xi_term:
          density -= (0.25 + b) * iz2 + b * y * y * iz2 * iz2 + spec.xi * spec.xi / b;
          break;
      }
      const std::size_t k = grid.index(i, j);
      diag[static_cast<Eigen::Index>(k)] = density * q.weights[k];
    }
  }
  add_diagonal(form.matrix, diag);
  return form;
}

DiagonalWeight assemble_weight(WeightKind kind, const RadialGrid& grid, const Quadrature& quadrature,
                               double coefficient) {
  check_weight_sizes(grid.size(), quadrature);
  DiagonalWeight w{kind, Eigen::VectorXd(static_cast<Eigen::Index>(grid.size()))};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    w.values[static_cast<Eigen::Index>(i)] =
        coefficient * density_1d(kind, grid[i]) * quadrature.weights[i];
  }
  return w;
}

DiagonalWeight assemble_weight(WeightKind kind, const PlaneGrid& grid, const Quadrature& quadrature,
                               double coefficient) {
  check_weight_sizes(grid.size(), quadrature);
  const bool polar = grid.coordinates() == PlaneCoordinates::polar;
  if (polar && kind != WeightKind::inv_rho2 && kind != WeightKind::inv_r2 &&
      kind != WeightKind::identity) {
    throw std::invalid_argument("weight kind needs a cartesian plane grid");
  }
  DiagonalWeight w{kind, Eigen::VectorXd(static_cast<Eigen::Index>(grid.size()))};
  for (std::size_t j = 0; j < grid.n2(); ++j) {
    for (std::size_t i = 0; i < grid.n1(); ++i) {
      const std::size_t k = grid.index(i, j);
      const auto [a, b] = cylindrical(grid, i, j);
      w.values[static_cast<Eigen::Index>(k)] =
          coefficient * density_2d(kind, a, b) * quadrature.weights[k];
    }
  }
  return w;
}

FormMatrix subtract_weight(FormMatrix form, const DiagonalWeight& weight, double coefficient) {
  if (weight.values.size() != form.dimension()) {
    throw std::invalid_argument("weight dimension does not match the form");
  }
  add_diagonal(form.matrix, -coefficient * weight.values);
  return form;
}

double dist_to_integers(double alpha) { return std::abs(alpha - std::round(alpha)); }

int nearest_channel(double alpha) { return static_cast<int>(std::lround(-alpha)); }

AngularSpectrum angular_spectrum(double alpha, int m_lo, int m_hi) {
  if (m_hi < m_lo) throw std::invalid_argument("empty angular mode range");
  AngularSpectrum out;
  out.minimum = std::numeric_limits<double>::infinity();
  for (int m = m_lo; m <= m_hi; ++m) {
    const double nu = m + alpha;
    out.levels.emplace_back(m, nu * nu);
  }
  for (const auto& [m, e] : out.levels) out.minimum = std::min(out.minimum, e);
  // Ties such as alpha = 1/2 are resolved up to rounding of m + alpha.
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + out.minimum);
  for (const auto& [m, e] : out.levels) {
    if (e <= out.minimum + slack) out.minimizers.push_back(m);
  }
  return out;
}

FormMatrix assemble_shifted_oscillator(const ConfiningSpec& spec, double z, const Axis& y_axis) {
  if (z == 0.0) throw std::invalid_argument("shifted oscillator needs z != 0");
  if (!y_axis.is_signed()) throw std::invalid_argument("shifted oscillator needs a signed y axis");
  const Quadrature quadrature = quadrature_for(y_axis, MeasureKind::line);
  FormMatrix form = assemble_gradient_form(y_axis, quadrature);
  for (std::size_t i = 0; i < y_axis.size(); ++i) {
    const double a = spec.xi + spec.beta * y_axis[i] / (z * z);
    const auto k = static_cast<Eigen::Index>(i);
    form.matrix.coeffRef(k, k) += a * a * quadrature.weights[i];
  }
  return form;
}

std::vector<double> landau_levels(double beta, double z, int n_max) {
  if (beta == 0.0) throw std::invalid_argument("Landau levels need beta != 0 (beta = 0 is continuous)");
  if (z == 0.0) throw std::invalid_argument("Landau levels need z != 0");
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  std::vector<double> levels;
  const double omega = 2.0 * std::abs(beta) / (z * z);
  for (int n = 0; n <= n_max; ++n) levels.push_back(omega * (n + 0.5));
  return levels;
}

GroundStateAnsatz ground_state(const ConfiningSpec& spec, const PlaneGrid& grid) {
  if (spec.beta == 0.0) throw std::invalid_argument("ground state ansatz needs beta != 0");
  GroundStateAnsatz g;
  g.beta = spec.beta;
  g.xi = spec.xi;
  g.y0.resize(grid.size());
  g.eta.resize(grid.size());
  const double b = std::abs(spec.beta);
  for (std::size_t j = 0; j < grid.n2(); ++j) {
    const double z = grid.axis2()[j];
    const double y0 = -z * z * spec.xi / spec.beta;
    for (std::size_t i = 0; i < grid.n1(); ++i) {
      const double dy = grid.axis1()[i] - y0;
      const std::size_t k = grid.index(i, j);
      g.y0[k] = y0;
      g.eta[k] = std::exp(-b * dy * dy / (2.0 * z * z));
    }
  }
  return g;
}

}  // namespace hardylab
