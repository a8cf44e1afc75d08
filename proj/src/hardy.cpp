#include "hardylab/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hardylab/sweep.hpp"

namespace hardylab {

std::string to_string(Theorem theorem) {
  switch (theorem) {
    case Theorem::ab: return "ab";
    case Theorem::confining_elementary: return "confining_elementary";
    case Theorem::confining_full: return "confining_full";
    case Theorem::confining_with_xi: return "confining_with_xi";
    case Theorem::hardy_1d: return "hardy_1d";
    case Theorem::hardy_3d: return "hardy_3d";
  }
  return "unknown";
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::certified_nonnegative: return "certified_nonnegative";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

Theorem theorem_from_string(const std::string& name) {
  for (auto t : {Theorem::ab, Theorem::confining_elementary, Theorem::confining_full,
                 Theorem::confining_with_xi, Theorem::hardy_1d, Theorem::hardy_3d}) {
    if (to_string(t) == name) return t;
  }
  throw std::invalid_argument("unknown theorem '" + name + "'");
}

Verdict verdict_from_string(const std::string& name) {
  for (auto v : {Verdict::certified_nonnegative, Verdict::violated, Verdict::inconclusive}) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown verdict '" + name + "'");
}

std::string to_string(ConfiningVariant variant) {
  switch (variant) {
    case ConfiningVariant::elementary: return "elementary";
    case ConfiningVariant::full: return "full";
    case ConfiningVariant::with_xi: return "with_xi";
  }
  return "unknown";
}

ConfiningVariant confining_variant_from_string(const std::string& name) {
  for (auto v : {ConfiningVariant::elementary, ConfiningVariant::full, ConfiningVariant::with_xi}) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown confining variant '" + name + "'");
}

double tol_disc(const GridDescriptor& grid, double c, double scale) {
  return c * grid.relative_step * scale;
}

Verdict decide_verdict(const std::vector<MarginRow>& rows) {
  if (rows.empty()) return Verdict::inconclusive;
  bool all_good = true;
  for (const auto& r : rows) {
    if (r.converged && std::isfinite(r.margin) && r.margin < -r.tol_disc) return Verdict::violated;
    if (!r.converged || !std::isfinite(r.margin)) all_good = false;
  }
  return all_good ? Verdict::certified_nonnegative : Verdict::inconclusive;
}

namespace {

std::string format_label(const char* prefix, double value) {
  std::ostringstream os;
  os << prefix << value;
  return os.str();
}

void fill_from_result(MarginRow& row, const EigenResult& r) {
  row.residual = r.residual;
  row.converged = r.converged;
  row.iterations = r.iterations;
  row.diagnostic = r.diagnostic;
}

void mark_failed(MarginRow& row, const std::string& what) {
  row.converged = false;
  row.lambda_min = std::numeric_limits<double>::quiet_NaN();
  row.margin = std::numeric_limits<double>::quiet_NaN();
  row.residual = std::numeric_limits<double>::infinity();
  row.diagnostic = what;
}

bool nonincreasing(const std::vector<ConvergenceEntry>& column, double slack) {
  for (std::size_t i = 1; i < column.size(); ++i) {
    if (column[i].value > column[i - 1].value + slack) return false;
  }
  return true;
}

int steps_for(double log_length, double h) {
  return std::max(3, static_cast<int>(std::lround(log_length / h)) + 1);
}

}  // namespace

// ---- Aharonov-Bohm channels ------------------------------------------------

std::vector<RadialGrid> default_ab_family_2d() {
  std::vector<RadialGrid> family;
  for (double outer : {1e2, 1e4, 1e6}) {
    family.push_back(make_radial_grid(Spacing::logarithmic, 1e-12, outer, 400));
  }
  return family;
}

PlaneGrid polar_ab_grid(double R, double h) {
  if (!(R > 1.0)) throw std::invalid_argument("polar grid needs R > 1");
  if (!(h > 0.0)) throw std::invalid_argument("polar grid needs a positive log step");
  const double half_pi = 0.5 * std::acos(-1.0);
  const int n_r = steps_for(2.0 * std::log(R), h);
  const int n_theta = steps_for(std::log(half_pi * R), h);
  return make_polar_grid(1.0 / R, R, n_r, 1.0 / R, n_theta);
}

std::vector<PlaneGrid> default_ab_family_polar() {
  std::vector<PlaneGrid> family;
  for (double R : {1e4, 1e6, 1e8}) family.push_back(polar_ab_grid(R, 0.1));
  return family;
}

HardyReport verify_ab(double alpha, int d, const AbOptions& options) {
  if (d < 2) throw std::invalid_argument("dimension d must be >= 2");
  if (d >= 4 && !options.z_radial) {
    throw std::invalid_argument("d >= 4 is only supported in the z-radial sector (z_radial flag)");
  }
  const int center = nearest_channel(alpha);
  std::vector<int> m_set = options.m_set;
  if (m_set.empty()) {
    for (int m = center - 2; m <= center + 2; ++m) m_set.push_back(m);
  }
  if (std::find(m_set.begin(), m_set.end(), center) == m_set.end()) {
    throw std::invalid_argument("m_set must contain round(-alpha) = " + std::to_string(center));
  }
  std::sort(m_set.begin(), m_set.end());
  m_set.erase(std::unique(m_set.begin(), m_set.end()), m_set.end());

  const double dist = dist_to_integers(alpha);
  const double rhs = options.rhs_constant.value_or(dist * dist);

  HardyReport report;
  report.theorem = Theorem::ab;
  report.target_constant = rhs;
  report.parameters["alpha"] = {alpha};
  report.parameters["d"] = {static_cast<double>(d)};
  report.parameters["m_set"] = std::vector<double>(m_set.begin(), m_set.end());
  report.parameters["rhs_constant"] = {rhs};
  report.parameters["tol_c"] = {options.tol_c};

  std::vector<RadialGrid> radial;
  std::vector<PlaneGrid> plane;
  if (d == 2) {
    radial = options.radial_family.empty() ? default_ab_family_2d() : options.radial_family;
  } else {
    plane = options.plane_family.empty() ? default_ab_family_polar() : options.plane_family;
  }
  const std::size_t n_grids = d == 2 ? radial.size() : plane.size();
  report.rows.resize(m_set.size() * n_grids);

  parallel_for(report.rows.size(), options.workers, [&](std::size_t task) {
    const int m = m_set[task / n_grids];
    const std::size_t g = task % n_grids;
    MarginRow& row = report.rows[task];
    row.label = "m=" + std::to_string(m);
    row.channel_or_xi = m;
    try {
      ChannelSpec spec{alpha, d, m, options.z_radial};
      FormMatrix H;
      DiagonalWeight W;
      if (d == 2) {
        row.grid = describe(radial[g]);
        H = assemble_ab_channel(spec, radial[g], true);
        W = assemble_weight(WeightKind::inv_rho2, radial[g], H.quadrature);
      } else {
        row.grid = describe(plane[g]);
        H = assemble_ab_channel(spec, plane[g], true);
        W = assemble_weight(WeightKind::inv_rho2, plane[g], H.quadrature);
      }
      row.tol_disc = tol_disc(row.grid, options.tol_c);
      const auto r = smallest_eigenpair(Pencil(subtract_weight(std::move(H), W, rhs), W),
                                        options.solver);
      row.margin = r.lambda_min;
      row.lambda_min = r.lambda_min + rhs;
      fill_from_result(row, r);
    } catch (const std::exception& e) {
      mark_failed(row, e.what());
    }
  });

  // Convergence column of the minimising channel.
  for (std::size_t g = 0; g < n_grids; ++g) {
    const std::size_t k =
        static_cast<std::size_t>(std::find(m_set.begin(), m_set.end(), center) - m_set.begin());
    const auto& row = report.rows[k * n_grids + g];
    report.convergence.push_back({row.grid, row.margin});
  }
  report.convergence_monotone = nonincreasing(report.convergence, 1e-9);
  if (!report.convergence_monotone) {
    report.diagnostics.push_back("minimising-channel margins are not nonincreasing along the family");
  }
  report.verdict = decide_verdict(report.rows);
  return report;
}

// ---- Confining field -------------------------------------------------------

std::vector<PlaneGrid> default_confining_family() {
  std::vector<PlaneGrid> family;
  for (int n : {100, 200, 300}) {
    family.push_back(make_plane_grid(make_signed_grid(-6.0, 6.0, n),
                                     make_radial_grid(Spacing::logarithmic, 0.1, 30.0, n)));
  }
  return family;
}

HardyReport verify_confining(double beta, ConfiningVariant variant, const ConfiningOptions& options) {
  if (variant == ConfiningVariant::with_xi && beta == 0.0) {
    throw std::invalid_argument("with_xi variant requires beta != 0");
  }
  if (!(options.y2_scale >= 0.0)) throw std::invalid_argument("y2_scale must be >= 0");
  std::vector<double> xi_set = options.xi_set;
  if (xi_set.empty()) {
    for (int k = -4; k <= 4; ++k) xi_set.push_back(k);
  }
  const auto family = options.family.empty() ? default_confining_family() : options.family;
  const double b = std::abs(beta);

  HardyReport report;
  report.theorem = variant == ConfiningVariant::elementary ? Theorem::confining_elementary
                   : variant == ConfiningVariant::full     ? Theorem::confining_full
                                                           : Theorem::confining_with_xi;
  report.target_constant = b;
  report.parameters["beta"] = {beta};
  report.parameters["xi_set"] = xi_set;
  report.parameters["y2_scale"] = {options.y2_scale};
  report.parameters["tol_c"] = {options.tol_c};

  const auto subtraction = variant == ConfiningVariant::elementary ? ConfiningSubtraction::quarter_plus_beta
                           : variant == ConfiningVariant::full     ? ConfiningSubtraction::full_thm2
                                                                   : ConfiningSubtraction::with_xi_term;
  const std::size_t n_grids = family.size();
  report.rows.resize(xi_set.size() * n_grids);

  parallel_for(report.rows.size(), options.workers, [&](std::size_t task) {
    const double xi = xi_set[task / n_grids];
    const PlaneGrid& grid = family[task % n_grids];
    MarginRow& row = report.rows[task];
    row.label = format_label("xi=", xi);
    row.channel_or_xi = xi;
    try {
      row.grid = describe(grid);
      // Identity-weighted margins carry units of 1/z^2; the tolerance is
      // scaled by the innermost z.
      const double z_min = grid.axis2().inner_cutoff();
      row.tol_disc = tol_disc(row.grid, options.tol_c, 1.0 / (z_min * z_min));
      const ConfiningSpec spec{beta, xi};
      auto H = assemble_confining(spec, grid, subtraction);
      if (variant != ConfiningVariant::elementary && options.y2_scale != 1.0 && b != 0.0) {
        const auto y2 = assemble_weight(WeightKind::y2_over_z4, grid, H.quadrature);
        H = subtract_weight(std::move(H), y2, (options.y2_scale - 1.0) * b);
      }
      const auto I = assemble_weight(WeightKind::identity, grid, H.quadrature);
      const auto r = smallest_eigenpair(Pencil(H, I), options.solver);
      row.margin = r.lambda_min;
      row.lambda_min = r.lambda_min;
      fill_from_result(row, r);
      if (options.best_constant) {
        auto Hq = assemble_confining(spec, grid, ConfiningSubtraction::quarter);
        const auto w = assemble_weight(WeightKind::inv_z2_plus_y2_over_z4, grid, Hq.quadrature);
        const auto rb = smallest_eigenpair(Pencil(Hq, w), options.solver);
        if (rb.converged) row.best_constant = rb.lambda_min;
      }
    } catch (const std::exception& e) {
      mark_failed(row, e.what());
    }
  });

  for (std::size_t g = 0; g < n_grids; ++g) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < xi_set.size(); ++k) {
      worst = std::min(worst, report.rows[k * n_grids + g].margin);
    }
    report.convergence.push_back({report.rows[g].grid, worst});
  }
  report.convergence_monotone = nonincreasing(report.convergence, 1e-9);
  report.verdict = decide_verdict(report.rows);
  return report;
}

// ---- Baselines -------------------------------------------------------------

std::vector<RadialGrid> default_baseline_family() {
  std::vector<RadialGrid> family;
  for (int n : {100, 200, 400}) {
    family.push_back(make_radial_grid(Spacing::logarithmic, 1e-6, 1e6, n));
  }
  return family;
}

HardyReport hardy_baseline(int dimension, const BaselineOptions& options) {
  if (dimension != 1 && dimension != 3) throw std::invalid_argument("baseline dimension must be 1 or 3");
  const auto family = options.family.empty() ? default_baseline_family() : options.family;
  HardyReport report;
  report.theorem = dimension == 1 ? Theorem::hardy_1d : Theorem::hardy_3d;
  report.target_constant = 0.25;
  report.parameters["dimension"] = {static_cast<double>(dimension)};
  report.parameters["tol_c"] = {options.tol_c};
  report.rows.resize(family.size());

  parallel_for(family.size(), options.workers, [&](std::size_t g) {
    MarginRow& row = report.rows[g];
    row.label = dimension == 1 ? "hardy_1d" : "hardy_3d";
    row.channel_or_xi = dimension;
    try {
      const RadialGrid& grid = family[g];
      row.grid = describe(grid);
      row.tol_disc = tol_disc(row.grid, options.tol_c);
      const auto q = dimension == 1 ? quadrature_for(grid, MeasureKind::line)
                                    : quadrature_for(grid, MeasureKind::r_pow_dr, 3);
      const auto H = assemble_gradient_form(grid, q);
      const auto W = assemble_weight(dimension == 1 ? WeightKind::inv_z2 : WeightKind::inv_r2, grid, q);
      const auto r = smallest_eigenpair(Pencil(H, W), options.solver);
      row.lambda_min = r.lambda_min;
      row.margin = r.lambda_min - report.target_constant;
      fill_from_result(row, r);
    } catch (const std::exception& e) {
      mark_failed(row, e.what());
    }
  });
  for (const auto& row : report.rows) report.convergence.push_back({row.grid, row.lambda_min});
  report.convergence_monotone = nonincreasing(report.convergence, 1e-9);
  report.verdict = decide_verdict(report.rows);
  return report;
}

std::vector<HardyReport> hardy_baselines(const BaselineOptions& options) {
  return {hardy_baseline(1, options), hardy_baseline(3, options)};
}

// ---- Sharpness -------------------------------------------------------------

double SharpnessSequence::profile(double r) const {
  if (r <= n) return 1.0;
  if (r >= n * n) return 0.0;
  return std::log(n * n / r) / std::log(n);
}

double SharpnessSequence::profile_derivative(double r) const {
  if (r <= n || r >= n * n) return 0.0;
  return -1.0 / (r * std::log(n));
}

SharpnessSequence sharpness_sequence(double n, double log_step) {
  if (!(n > 1.0)) throw std::invalid_argument("sharpness sequence needs n > 1");
  if (!(log_step > 0.0)) throw std::invalid_argument("log_step must be positive");
  SharpnessSequence s;
  s.n = n;
  s.closed_form = 1.0 / std::log(n);
  const int nodes = std::max(200, static_cast<int>(std::ceil(std::log(n) / log_step)) + 1);
  const auto grid = make_radial_grid(Spacing::logarithmic, n, n * n, nodes);
  const auto q = quadrature_for(grid, MeasureKind::r_dr);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // One-sided derivative at the endpoints: the log-linear piece.
    const double r = grid[i];
    const double fp = -1.0 / (r * std::log(n));
    sum += fp * fp * q.weights[i];
  }
  s.dirichlet_integral = sum;
  s.nodes = nodes;
  return s;
}

}  // namespace hardylab
