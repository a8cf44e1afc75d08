#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hardylab/eigensolve.hpp"
#include "hardylab/forms.hpp"
#include "hardylab/grids.hpp"

namespace hardylab {

enum class Theorem { ab, confining_elementary, confining_full, confining_with_xi, hardy_1d, hardy_3d };
enum class Verdict { certified_nonnegative, violated, inconclusive };

std::string to_string(Theorem theorem);
std::string to_string(Verdict verdict);
Theorem theorem_from_string(const std::string& name);
Verdict verdict_from_string(const std::string& name);

struct MarginRow {
  GridDescriptor grid;
  std::string label;          // "m=0", "xi=-2", "hardy_1d", ...
  double channel_or_xi = 0.0;
  double lambda_min = 0.0;    // smallest eigenvalue before the target is subtracted
  double margin = 0.0;        // lambda_min - target, or the pre-subtracted eigenvalue
  double residual = 0.0;
  double tol_disc = 0.0;
  bool converged = false;
  int iterations = 0;
  std::optional<double> best_constant;
  std::optional<double> reference;  // closed-form or oracle value the row is compared with
  std::string diagnostic;

  bool operator==(const MarginRow&) const = default;
};

struct ConvergenceEntry {
  GridDescriptor grid;
  double value = 0.0;

  bool operator==(const ConvergenceEntry&) const = default;
};

struct HardyReport {
  Theorem theorem = Theorem::ab;
  std::map<std::string, std::vector<double>> parameters;
  double target_constant = 0.0;
  std::vector<MarginRow> rows;
  std::vector<ConvergenceEntry> convergence;
  bool convergence_monotone = true;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> diagnostics;

  bool operator==(const HardyReport&) const = default;
};

// Discretisation tolerance c * h * scale, h the grid's relative step.
double tol_disc(const GridDescriptor& grid, double c, double scale = 1.0);

// violated: some converged margin < -tol_disc. certified: every solve
// converged and every margin >= -tol_disc. Otherwise inconclusive.
Verdict decide_verdict(const std::vector<MarginRow>& rows);

struct SweepOptions {
  SolverOptions solver;
  double tol_c = 0.01;
  int workers = 1;
};

// ---- Aharonov-Bohm channels ------------------------------------------------

struct AbOptions : SweepOptions {
  std::vector<int> m_set;                 // empty: round(-alpha) - 2 .. round(-alpha) + 2
  std::optional<double> rhs_constant;     // replaces dist(alpha, Z)^2 (falsification controls)
  std::vector<RadialGrid> radial_family;  // d = 2; empty: default family
  std::vector<PlaneGrid> plane_family;    // d >= 3; empty: default polar family
  bool z_radial = false;
};

// Log rho grids on [1e-12, R], R in {1e2, 1e4, 1e6}, n = 400.
std::vector<RadialGrid> default_ab_family_2d();
// Polar grids r in [1/R, R], theta_min = 1/R, R in {1e4, 1e6, 1e8}, log
// steps near 0.1 in both r and theta.
std::vector<PlaneGrid> default_ab_family_polar();
// r in [1/R, R], theta_min = 1/R, log step close to h on both axes.
PlaneGrid polar_ab_grid(double R, double h);

HardyReport verify_ab(double alpha, int d, const AbOptions& options = {});

// ---- Confining field -------------------------------------------------------

enum class ConfiningVariant { elementary, full, with_xi };
std::string to_string(ConfiningVariant variant);
ConfiningVariant confining_variant_from_string(const std::string& name);

struct ConfiningOptions : SweepOptions {
  std::vector<double> xi_set;          // empty: -4, -3, ..., 4
  std::vector<PlaneGrid> family;       // empty: default family
  double y2_scale = 1.0;               // inflation of the |beta| y^2/z^4 term
  bool best_constant = true;
};

// y uniform on [-6, 6], z logarithmic on [0.1, 30], n x n for n in {100, 200, 300}.
std::vector<PlaneGrid> default_confining_family();

HardyReport verify_confining(double beta, ConfiningVariant variant,
                             const ConfiningOptions& options = {});

// ---- Baselines -------------------------------------------------------------

struct BaselineOptions : SweepOptions {
  std::vector<RadialGrid> family;  // empty: default family
};

// Log grids on [1e-6, 1e6] with n in {100, 200, 400}.
std::vector<RadialGrid> default_baseline_family();

// dimension 1: Dirichlet form on the half-line against 1/z^2.
// dimension 3: radial s-wave, measure r^2 dr, weight 1/r^2.
HardyReport hardy_baseline(int dimension, const BaselineOptions& options = {});
std::vector<HardyReport> hardy_baselines(const BaselineOptions& options = {});

// ---- Sharpness sequence ----------------------------------------------------

struct SharpnessSequence {
  double n = 0.0;
  double dirichlet_integral = 0.0;  // quadrature of |f_n'|^2 r dr over [n, n^2]
  double closed_form = 0.0;         // 1 / ln n
  int nodes = 0;

  double profile(double r) const;
  double profile_derivative(double r) const;
};

SharpnessSequence sharpness_sequence(double n, double log_step = 0.005);

}  // namespace hardylab
