#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardylab/eigensolve.hpp"
#include "hardylab/hardy.hpp"
#include "hardylab/identities.hpp"

namespace hardylab::cli {

inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& commands();

/// Bad configuration value or unknown key; key() names the offender.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// --help / --version or a malformed command line; text() is what to print.
class UsageError : public std::runtime_error {
 public:
  UsageError(std::string text, int exit_code)
      : std::runtime_error(text), text_(std::move(text)), exit_code_(exit_code) {}
  const std::string& text() const { return text_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string text_;
  int exit_code_;
};

// Grid overrides. Empty / unset fields take the command's default family.
struct GridFamilySpec {
  std::optional<Spacing> kind;
  std::optional<double> inner;
  std::vector<double> outer;
  std::vector<int> n;
  std::optional<double> step;      // log step of polar grids (verify-ab, d >= 3)
  std::optional<double> y_extent;  // y in [-y_extent, y_extent]
  std::optional<double> z_inner;
  std::optional<double> z_outer;
};

struct RunConfig {
  std::string command;

  // verify-ab
  double alpha = 0.5;
  int dim = 2;
  std::optional<int> m_min;
  std::optional<int> m_max;
  std::optional<double> rhs;
  bool z_radial = false;

  // verify-confining, identities, weyl, spectrum-landau
  double beta = 1.0;
  ConfiningVariant variant = ConfiningVariant::full;
  std::vector<double> xi;
  double y2_scale = 1.0;
  bool best_constant = true;

  // sharpness
  std::vector<double> sharpness_n;
  double sharpness_log_step = 0.005;

  // weyl
  std::vector<double> weyl_k{0.0, 1.0};
  std::vector<double> weyl_n{8.0, 16.0, 32.0};
  int weyl_nodes = 64;

  // spectrum-landau
  double landau_z = 1.0;
  double landau_xi = 0.0;
  int landau_n_max = 2;

  // identities
  std::string convention = "both";  // printed, corrected or both
  int diamagnetic_seeds = 100;

  GridFamilySpec grid;
  SolverOptions solver;
  double tol_c = 0.01;
  int workers = 1;

  std::string output_path = "report.json";
  std::string output_format = "json";  // json or csv
  std::string plot_path;               // optional extra CSV
};

// args excludes the program name. The config file (explicit argument or
// --config) is read first; flags and --set key=value override it, and
// HARDYLAB_SEED overrides solver.seed last.
RunConfig parse_config(const std::vector<std::string>& args,
                       const std::optional<std::string>& config_file = std::nullopt);

// key = value lines with dotted keys and # comments.
void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin);
void apply_key(RunConfig& config, const std::string& key, const std::string& value);
void validate(const RunConfig& config);

struct ReportFile {
  int schema_version = kSchemaVersion;
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<MarginRow> rows;
  std::vector<ConvergenceEntry> convergence;
  bool convergence_monotone = true;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> diagnostics;
  double timing_ms = 0.0;

  bool operator==(const ReportFile&) const = default;
};

nlohmann::json to_json(const ReportFile& report);
ReportFile report_from_json(const nlohmann::json& j);
std::string serialize(const ReportFile& report);
ReportFile parse_report(const std::string& text);

// Residual-style rows pass when residual < tol_disc.
Verdict residual_verdict(const std::vector<MarginRow>& rows);

int exit_code(Verdict verdict);

// Runs the command; throws on invalid parameters.
ReportFile execute(const RunConfig& config);

// execute + write. 0 certified, 2 violated, 3 inconclusive (including a
// failed computation), 4 when the report cannot be written.
int run(const RunConfig& config);

// Wide CSV: one line per grid in first-seen order, one column per series
// (channel, xi, identity). Pencil commands plot lambda_min, residual
// commands plot the residual. Throws std::invalid_argument on an empty report.
std::string render_plot_data(const ReportFile& report);
void emit_plot_data(const ReportFile& report, const std::string& path);

}  // namespace hardylab::cli
