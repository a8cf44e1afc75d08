#include "hardylab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "hardylab/forms.hpp"
#include "hardylab/sweep.hpp"

namespace hardylab::cli {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError(key, "expected a number, got '" + raw + "'");
  }
  if (!std::isfinite(x)) throw ConfigError(key, "must be finite, got '" + raw + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError(key, "expected an integer, got '" + raw + "'");
  }
  return x;
}

int to_int(const std::string& key, const std::string& raw) {
  const long long x = to_integer(key, raw);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(key, "integer out of range: '" + raw + "'");
  }
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + raw + "'");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& item : split_list(raw)) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& raw) {
  std::vector<int> out;
  for (const auto& item : split_list(raw)) out.push_back(to_int(key, item));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of integers");
  return out;
}

std::string to_choice(const std::string& key, const std::string& raw,
                      std::initializer_list<const char*> choices) {
  const std::string v = trim(raw);
  std::string listed;
  for (const char* c : choices) {
    if (v == c) return v;
    listed += listed.empty() ? c : std::string(", ") + c;
  }
  throw ConfigError(key, "expected one of {" + listed + "}, got '" + raw + "'");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.alpha = to_double(k, v); }},
      {"dim", [](RunConfig& c, const std::string& k, const std::string& v) { c.dim = to_int(k, v); }},
      {"ab.m_min", [](RunConfig& c, const std::string& k, const std::string& v) { c.m_min = to_int(k, v); }},
      {"ab.m_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.m_max = to_int(k, v); }},
      {"ab.rhs", [](RunConfig& c, const std::string& k, const std::string& v) { c.rhs = to_double(k, v); }},
      {"ab.z_radial", [](RunConfig& c, const std::string& k, const std::string& v) { c.z_radial = to_bool(k, v); }},
      {"beta", [](RunConfig& c, const std::string& k, const std::string& v) { c.beta = to_double(k, v); }},
      {"confining.variant",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.variant = confining_variant_from_string(to_choice(k, v, {"elementary", "full", "with_xi"}));
       }},
      {"confining.xi", [](RunConfig& c, const std::string& k, const std::string& v) { c.xi = to_double_list(k, v); }},
      {"confining.y2_scale",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.y2_scale = to_double(k, v); }},
      {"confining.best_constant",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.best_constant = to_bool(k, v); }},
      {"sharpness.n",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.sharpness_n = to_double_list(k, v); }},
      {"sharpness.log_step",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.sharpness_log_step = to_double(k, v); }},
      {"weyl.k", [](RunConfig& c, const std::string& k, const std::string& v) { c.weyl_k = to_double_list(k, v); }},
      {"weyl.n", [](RunConfig& c, const std::string& k, const std::string& v) { c.weyl_n = to_double_list(k, v); }},
      {"weyl.nodes", [](RunConfig& c, const std::string& k, const std::string& v) { c.weyl_nodes = to_int(k, v); }},
      {"landau.z", [](RunConfig& c, const std::string& k, const std::string& v) { c.landau_z = to_double(k, v); }},
      {"landau.xi", [](RunConfig& c, const std::string& k, const std::string& v) { c.landau_xi = to_double(k, v); }},
      {"landau.n_max",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.landau_n_max = to_int(k, v); }},
      {"identities.convention",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.convention = to_choice(k, v, {"printed", "corrected", "both"});
       }},
      {"identities.seeds",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.diamagnetic_seeds = to_int(k, v); }},
      {"grid.kind",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.grid.kind = to_choice(k, v, {"uniform", "logarithmic"}) == "uniform" ? Spacing::uniform
                                                                                  : Spacing::logarithmic;
       }},
      {"grid.inner", [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.inner = to_double(k, v); }},
      {"grid.outer",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.outer = to_double_list(k, v); }},
      {"grid.n", [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.n = to_int_list(k, v); }},
      {"grid.step", [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.step = to_double(k, v); }},
      {"grid.y_extent",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.y_extent = to_double(k, v); }},
      {"grid.z_inner",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.z_inner = to_double(k, v); }},
      {"grid.z_outer",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.z_outer = to_double(k, v); }},
      {"solver.tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.tol = to_double(k, v); }},
      {"solver.max_iter",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.max_iter = to_int(k, v); }},
      {"solver.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long s = to_integer(k, v);
         if (s < 0) throw ConfigError(k, "seed must be >= 0");
         c.solver.seed = static_cast<std::uint64_t>(s);
       }},
      {"sweep.workers", [](RunConfig& c, const std::string& k, const std::string& v) { c.workers = to_int(k, v); }},
      {"sweep.tol_c", [](RunConfig& c, const std::string& k, const std::string& v) { c.tol_c = to_double(k, v); }},
      {"output.path",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.output_path = trim(v);
         if (c.output_path.empty()) throw ConfigError(k, "must not be empty");
       }},
      {"output.format",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.output_format = to_choice(k, v, {"json", "csv"}); }},
      {"output.plot", [](RunConfig& c, const std::string&, const std::string& v) { c.plot_path = trim(v); }},
  };
  return table;
}

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
  std::vector<std::string> commands;  // empty: every command
};

const std::vector<FlagSpec>& flag_specs() {
  static const std::vector<FlagSpec> flags = {
      {"--alpha", "alpha", "flux alpha", {"verify-ab"}},
      {"--dim", "dim", "dimension d >= 2", {"verify-ab"}},
      {"--m-min", "ab.m_min", "lowest channel m", {"verify-ab"}},
      {"--m-max", "ab.m_max", "highest channel m", {"verify-ab"}},
      {"--rhs", "ab.rhs", "constant replacing dist(alpha, Z)^2", {"verify-ab"}},
      {"--z-radial", "ab.z_radial", "z-radial sector (needed for d >= 4)", {"verify-ab"}},
      {"--beta", "beta", "field strength beta", {"verify-confining", "identities", "weyl", "spectrum-landau"}},
      {"--variant", "confining.variant", "elementary, full or with_xi", {"verify-confining"}},
      {"--xi", "confining.xi", "comma-separated xi values", {"verify-confining"}},
      {"--y2-scale", "confining.y2_scale", "inflation of the |beta| y^2/z^4 term", {"verify-confining"}},
      {"--best-constant", "confining.best_constant", "also solve for the best constant", {"verify-confining"}},
      {"--n", "sharpness.n", "comma-separated n values", {"sharpness"}},
      {"--log-step", "sharpness.log_step", "log step of the quadrature", {"sharpness"}},
      {"--k", "weyl.k", "comma-separated wave numbers", {"weyl"}},
      {"--n", "weyl.n", "comma-separated packet distances", {"weyl"}},
      {"--nodes", "weyl.nodes", "quadrature nodes per axis", {"weyl"}},
      {"--z", "landau.z", "height z of the fibre", {"spectrum-landau"}},
      {"--xi", "landau.xi", "Fourier variable xi", {"spectrum-landau"}},
      {"--n-max", "landau.n_max", "highest level index", {"spectrum-landau"}},
      {"--convention", "identities.convention", "printed, corrected or both", {"identities"}},
      {"--seeds", "identities.seeds", "random test functions for the diamagnetic check", {"identities"}},
      {"--grid-kind", "grid.kind", "uniform or logarithmic", {}},
      {"--grid-inner", "grid.inner", "inner cutoff", {}},
      {"--grid-outer", "grid.outer", "comma-separated outer radii", {}},
      {"--grid-n", "grid.n", "comma-separated node counts", {}},
      {"--grid-step", "grid.step", "log step of polar grids", {}},
      {"--y-extent", "grid.y_extent", "half-width of the y axis", {}},
      {"--z-inner", "grid.z_inner", "lower z cutoff", {}},
      {"--z-outer", "grid.z_outer", "upper z cutoff", {}},
      {"--tol", "solver.tol", "eigensolver residual tolerance", {}},
      {"--max-iter", "solver.max_iter", "eigensolver iteration cap", {}},
      {"--seed", "solver.seed", "random seed", {}},
      {"--workers", "sweep.workers", "worker threads (0: one per core)", {}},
      {"--tol-c", "sweep.tol_c", "constant c of tol_disc = c h", {}},
      {"-o,--output", "output.path", "report path", {}},
      {"--format", "output.format", "json or csv", {}},
      {"--plot", "output.plot", "extra CSV plot-data path", {}},
  };
  return flags;
}

std::string read_file(const std::string& path, const std::string& key) {
  std::ifstream in(path);
  if (!in) throw ConfigError(key, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string describe_command(const std::string& name) {
  static const std::map<std::string, std::string> text = {
      {"verify-ab", "Aharonov-Bohm Hardy margins per channel"},
      {"verify-confining", "confining-field Hardy margins per xi fibre"},
      {"baselines", "classical Hardy constants in 1D and 3D"},
      {"sharpness", "Dirichlet integrals of the log cutoff sequence"},
      {"identities", "substitution, commutator, V_f and diamagnetic checks"},
      {"weyl", "quasimode residuals of the confining operator"},
      {"spectrum-landau", "lowest levels of the shifted oscillator"},
  };
  return text.at(name);
}

bool is_residual_command(const std::string& command) {
  return command == "sharpness" || command == "identities" || command == "weyl" ||
         command == "spectrum-landau";
}

std::string format_number(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"verify-ab", "verify-confining", "baselines", "sharpness",
                                                 "identities", "weyl", "spectrum-landau"};
  return names;
}

void apply_key(RunConfig& config, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError(key, "unknown key");
  it->second(config, key, value);
}

void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin) {
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number), "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(number), "missing key");
    apply_key(config, key, trim(line.substr(eq + 1)));
  }
}

void validate(const RunConfig& c) {
  if (std::find(commands().begin(), commands().end(), c.command) == commands().end()) {
    throw ConfigError("command", "unknown command '" + c.command + "'");
  }
  if (c.dim < 2) throw ConfigError("dim", "must be >= 2");
  if (c.command == "verify-ab" && c.dim >= 4 && !c.z_radial) {
    throw ConfigError("ab.z_radial", "d >= 4 needs the z-radial sector (set ab.z_radial = true)");
  }
  if (c.m_min && c.m_max && *c.m_min > *c.m_max) throw ConfigError("ab.m_min", "must be <= ab.m_max");
  if (c.rhs && *c.rhs < 0.0) throw ConfigError("ab.rhs", "must be >= 0");
  if (c.command == "verify-confining" && c.variant == ConfiningVariant::with_xi && c.beta == 0.0) {
    throw ConfigError("beta", "the with_xi variant needs beta != 0");
  }
  if ((c.command == "spectrum-landau" || c.command == "identities") && c.beta == 0.0) {
    throw ConfigError("beta", "must be nonzero for " + c.command);
  }
  if (c.y2_scale < 0.0) throw ConfigError("confining.y2_scale", "must be >= 0");
  for (double n : c.sharpness_n) {
    if (!(n > 1.0)) throw ConfigError("sharpness.n", "every n must be > 1");
  }
  if (!(c.sharpness_log_step > 0.0)) throw ConfigError("sharpness.log_step", "must be > 0");
  for (double k : c.weyl_k) {
    if (k < 0.0) throw ConfigError("weyl.k", "every k must be >= 0");
  }
  for (double n : c.weyl_n) {
    if (n < 1.0) throw ConfigError("weyl.n", "every n must be >= 1");
  }
  if (c.weyl_nodes < 8) throw ConfigError("weyl.nodes", "must be >= 8");
  if (c.landau_z == 0.0) throw ConfigError("landau.z", "must be nonzero");
  if (c.landau_n_max < 0) throw ConfigError("landau.n_max", "must be >= 0");
  if (c.diamagnetic_seeds < 1) throw ConfigError("identities.seeds", "must be >= 1");

  const auto& g = c.grid;
  if (g.inner && !(*g.inner > 0.0)) throw ConfigError("grid.inner", "must be > 0");
  for (double r : g.outer) {
    if (!(r > g.inner.value_or(0.0))) throw ConfigError("grid.outer", "every outer radius must exceed grid.inner");
    if (c.command == "verify-ab" && c.dim >= 3 && !(r > 1.0)) {
      throw ConfigError("grid.outer", "polar grids need R > 1");
    }
  }
  for (int n : g.n) {
    if (n < 3) throw ConfigError("grid.n", "every node count must be >= 3");
  }
  if (!g.outer.empty() && !g.n.empty() && g.outer.size() != g.n.size() && g.outer.size() != 1 &&
      g.n.size() != 1) {
    throw ConfigError("grid.n", "grid.outer and grid.n must have equal lengths or one entry");
  }
  if (g.step && !(*g.step > 0.0)) throw ConfigError("grid.step", "must be > 0");
  if (g.y_extent && !(*g.y_extent > 0.0)) throw ConfigError("grid.y_extent", "must be > 0");
  if (g.z_inner && !(*g.z_inner > 0.0)) throw ConfigError("grid.z_inner", "must be > 0");
  if (g.z_outer && !(*g.z_outer > g.z_inner.value_or(0.1))) {
    throw ConfigError("grid.z_outer", "must exceed grid.z_inner");
  }
  if (!(c.solver.tol > 0.0)) throw ConfigError("solver.tol", "must be > 0");
  if (c.solver.max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");
  if (c.workers < 0) throw ConfigError("sweep.workers", "must be >= 0");
  if (!(c.tol_c > 0.0)) throw ConfigError("sweep.tol_c", "must be > 0");
}

RunConfig parse_config(const std::vector<std::string>& args, const std::optional<std::string>& config_file) {
  CLI::App app{"Numerical verification of magnetic Hardy inequalities", "hardylab"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--set", sets, "override key=value (repeatable)");

  // Flags are captured as text and converted with the config-file rules.
  struct Captured {
    CLI::Option* option;
    std::string key;
    std::shared_ptr<std::string> text;
  };
  std::map<CLI::App*, std::vector<Captured>> captured;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : commands()) {
    CLI::App* sub = app.add_subcommand(name, describe_command(name));
    subs[name] = sub;
    sub->fallthrough();
    for (const auto& f : flag_specs()) {
      if (!f.commands.empty() && std::find(f.commands.begin(), f.commands.end(), name) == f.commands.end()) {
        continue;
      }
      auto text = std::make_shared<std::string>();
      CLI::Option* opt = sub->add_option(f.flag, *text, std::string(f.help) + " [" + f.key + "]");
      captured[sub].push_back({opt, f.key, text});
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::string text = app.help();
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) text = sub->help();
    }
    throw UsageError(text, 0);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), 1);
  }

  RunConfig config;
  CLI::App* chosen = nullptr;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) {
      config.command = name;
      chosen = sub;
    }
  }
  if (config_file && !config_path.empty()) {
    throw ConfigError("config", "config file given twice");
  }
  if (config_file) apply_config_text(config, read_file(*config_file, "config"), *config_file);
  if (!config_path.empty()) apply_config_text(config, read_file(config_path, "config"), config_path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(trim(s), "--set expects key=value");
    apply_key(config, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  for (const auto& c : captured[chosen]) {
    if (c.option->count() > 0) apply_key(config, c.key, *c.text);
  }
  if (const char* env = std::getenv("HARDYLAB_SEED")) {
    const long long s = to_integer("HARDYLAB_SEED", env);
    if (s < 0) throw ConfigError("HARDYLAB_SEED", "seed must be >= 0");
    config.solver.seed = static_cast<std::uint64_t>(s);
  }
  validate(config);
  return config;
}

// ---- Report serialisation ---------------------------------------------------

namespace {

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw std::invalid_argument("report: expected a number, got " + j.dump());
}

json grid_json(const GridDescriptor& g) {
  return json{{"kind", g.kind},
              {"inner", number(g.inner)},
              {"outer", number(g.outer)},
              {"n", g.n},
              {"n1", g.n1},
              {"n2", g.n2},
              {"extent1", number(g.extent1)},
              {"relative_step", number(g.relative_step)},
              {"angular_cutoff", number(g.angular_cutoff)}};
}

GridDescriptor grid_from_json(const json& j) {
  GridDescriptor g;
  g.kind = j.at("kind").get<std::string>();
  g.inner = read_number(j.at("inner"));
  g.outer = read_number(j.at("outer"));
  g.n = j.at("n").get<long>();
  g.n1 = j.at("n1").get<long>();
  g.n2 = j.at("n2").get<long>();
  g.extent1 = read_number(j.at("extent1"));
  g.relative_step = read_number(j.at("relative_step"));
  g.angular_cutoff = read_number(j.at("angular_cutoff"));
  return g;
}

json optional_number(const std::optional<double>& x) { return x ? number(*x) : json(nullptr); }

std::optional<double> read_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return read_number(j);
}

}  // namespace

json to_json(const ReportFile& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back(json{{"grid", grid_json(r.grid)},
                        {"label", r.label},
                        {"channel_or_xi", number(r.channel_or_xi)},
                        {"lambda_min", number(r.lambda_min)},
                        {"margin", number(r.margin)},
                        {"residual", number(r.residual)},
                        {"tol_disc", number(r.tol_disc)},
                        {"converged", r.converged},
                        {"iterations", r.iterations},
                        {"best_constant", optional_number(r.best_constant)},
                        {"reference", optional_number(r.reference)},
                        {"diagnostic", r.diagnostic}});
  }
  json convergence = json::array();
  for (const auto& c : report.convergence) {
    convergence.push_back(json{{"grid", grid_json(c.grid)}, {"value", number(c.value)}});
  }
  return json{{"schema_version", report.schema_version},
              {"command", report.command},
              {"parameters", report.parameters},
              {"rows", rows},
              {"convergence", convergence},
              {"convergence_monotone", report.convergence_monotone},
              {"verdict", to_string(report.verdict)},
              {"diagnostics", report.diagnostics},
              {"timing_ms", number(report.timing_ms)}};
}

ReportFile report_from_json(const json& j) {
  ReportFile report;
  report.schema_version = j.at("schema_version").get<int>();
  if (report.schema_version > kSchemaVersion) {
    throw std::invalid_argument("report: unsupported schema_version " + std::to_string(report.schema_version));
  }
  report.command = j.at("command").get<std::string>();
  report.parameters = j.at("parameters");
  for (const auto& r : j.at("rows")) {
    MarginRow row;
    row.grid = grid_from_json(r.at("grid"));
    row.label = r.at("label").get<std::string>();
    row.channel_or_xi = read_number(r.at("channel_or_xi"));
    row.lambda_min = read_number(r.at("lambda_min"));
    row.margin = read_number(r.at("margin"));
    row.residual = read_number(r.at("residual"));
    row.tol_disc = read_number(r.at("tol_disc"));
    row.converged = r.at("converged").get<bool>();
    row.iterations = r.at("iterations").get<int>();
    row.best_constant = read_optional(r.at("best_constant"));
    row.reference = read_optional(r.at("reference"));
    row.diagnostic = r.at("diagnostic").get<std::string>();
    report.rows.push_back(std::move(row));
  }
  if (j.contains("convergence")) {
    for (const auto& c : j.at("convergence")) {
      report.convergence.push_back({grid_from_json(c.at("grid")), read_number(c.at("value"))});
    }
  }
  report.convergence_monotone = j.value("convergence_monotone", true);
  report.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  if (j.contains("diagnostics")) report.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  report.timing_ms = read_number(j.at("timing_ms"));
  return report;
}

std::string serialize(const ReportFile& report) { return to_json(report).dump(2) + "\n"; }

ReportFile parse_report(const std::string& text) { return report_from_json(json::parse(text)); }

Verdict residual_verdict(const std::vector<MarginRow>& rows) {
  bool all_ok = true;
  for (const auto& r : rows) {
    if (!r.converged) {
      all_ok = false;
      continue;
    }
    if (!(r.residual < r.tol_disc)) return Verdict::violated;
  }
  return all_ok ? Verdict::certified_nonnegative : Verdict::inconclusive;
}

int exit_code(Verdict verdict) {
  switch (verdict) {
    case Verdict::certified_nonnegative: return 0;
    case Verdict::violated: return 2;
    case Verdict::inconclusive: return 3;
  }
  return 3;
}

// ---- Commands ---------------------------------------------------------------

namespace {

// Pairs grid.outer with grid.n, broadcasting a single entry.
std::vector<std::pair<double, int>> zip_family(std::vector<double> outer, std::vector<int> n) {
  const std::size_t count = std::max(outer.size(), n.size());
  std::vector<std::pair<double, int>> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.emplace_back(outer[outer.size() == 1 ? 0 : i], n[n.size() == 1 ? 0 : i]);
  }
  return out;
}

std::vector<RadialGrid> radial_family(const RunConfig& c, double inner, std::vector<double> outer,
                                      std::vector<int> n) {
  std::vector<RadialGrid> family;
  for (const auto& [R, count] :
       zip_family(c.grid.outer.empty() ? outer : c.grid.outer, c.grid.n.empty() ? n : c.grid.n)) {
    family.push_back(make_radial_grid(c.grid.kind.value_or(Spacing::logarithmic), c.grid.inner.value_or(inner), R,
                                      count));
  }
  return family;
}

bool radial_overridden(const GridFamilySpec& g) {
  return g.kind || g.inner || !g.outer.empty() || !g.n.empty();
}

json solver_json(const RunConfig& c) {
  return json{{"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}, {"seed", c.solver.seed},
              {"tol_c", c.tol_c}, {"workers", c.workers}};
}

void absorb(ReportFile& out, const HardyReport& r) {
  for (const auto& [k, v] : r.parameters) out.parameters[k] = v;
  out.parameters["theorem"] = to_string(r.theorem);
  out.parameters["target_constant"] = number(r.target_constant);
  out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
  out.convergence.insert(out.convergence.end(), r.convergence.begin(), r.convergence.end());
  out.convergence_monotone = out.convergence_monotone && r.convergence_monotone;
  out.diagnostics.insert(out.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
}

ReportFile run_ab(const RunConfig& c) {
  AbOptions o;
  o.solver = c.solver;
  o.tol_c = c.tol_c;
  o.workers = c.workers;
  o.z_radial = c.z_radial;
  o.rhs_constant = c.rhs;
  if (c.m_min || c.m_max) {
    const int center = nearest_channel(c.alpha);
    for (int m = c.m_min.value_or(center - 2); m <= c.m_max.value_or(center + 2); ++m) o.m_set.push_back(m);
  }
  if (c.dim == 2 && radial_overridden(c.grid)) {
    o.radial_family = radial_family(c, 1e-12, {1e2, 1e4, 1e6}, {400});
  }
  if (c.dim >= 3 && (!c.grid.outer.empty() || c.grid.step)) {
    const std::vector<double> radii = c.grid.outer.empty() ? std::vector<double>{1e4, 1e6, 1e8} : c.grid.outer;
    for (double R : radii) o.plane_family.push_back(polar_ab_grid(R, c.grid.step.value_or(0.1)));
  }
  ReportFile out;
  absorb(out, verify_ab(c.alpha, c.dim, o));
  out.verdict = decide_verdict(out.rows);
  return out;
}

ReportFile run_confining(const RunConfig& c) {
  ConfiningOptions o;
  o.solver = c.solver;
  o.tol_c = c.tol_c;
  o.workers = c.workers;
  o.xi_set = c.xi;
  o.y2_scale = c.y2_scale;
  o.best_constant = c.best_constant;
  const auto& g = c.grid;
  if (g.y_extent || g.z_inner || g.z_outer || !g.n.empty()) {
    const double ext = g.y_extent.value_or(6.0);
    for (int n : g.n.empty() ? std::vector<int>{100, 200, 300} : g.n) {
      o.family.push_back(make_plane_grid(make_signed_grid(-ext, ext, n),
                                         make_radial_grid(Spacing::logarithmic, g.z_inner.value_or(0.1),
                                                          g.z_outer.value_or(30.0), n)));
    }
  }
  ReportFile out;
  absorb(out, verify_confining(c.beta, c.variant, o));
  out.parameters["beta"] = c.beta;
  out.parameters["variant"] = to_string(c.variant);
  out.verdict = decide_verdict(out.rows);
  return out;
}

ReportFile run_baselines(const RunConfig& c) {
  BaselineOptions o;
  o.solver = c.solver;
  o.tol_c = c.tol_c;
  o.workers = c.workers;
  if (radial_overridden(c.grid)) o.family = radial_family(c, 1e-6, {1e6}, {100, 200, 400});
  ReportFile out;
  for (const auto& r : hardy_baselines(o)) absorb(out, r);
  out.parameters.erase("theorem");
  out.verdict = decide_verdict(out.rows);
  return out;
}

void residual_row(MarginRow& row, double value, double reference, double residual, double tol) {
  row.lambda_min = value;
  row.reference = reference;
  row.residual = residual;
  row.tol_disc = tol;
  row.margin = tol - residual;
  row.converged = true;
}

ReportFile run_sharpness(const RunConfig& c) {
  std::vector<double> ns = c.sharpness_n;
  if (ns.empty()) ns = {std::exp(5.0), std::exp(10.0), std::exp(20.0)};
  constexpr double kTol = 0.01;
  ReportFile out;
  out.parameters["n"] = ns;
  out.parameters["log_step"] = c.sharpness_log_step;
  out.rows.resize(ns.size());
  parallel_for(ns.size(), c.workers, [&](std::size_t i) {
    const auto s = sharpness_sequence(ns[i], c.sharpness_log_step);
    MarginRow& row = out.rows[i];
    row.label = "dirichlet_integral";
    row.channel_or_xi = ns[i];
    row.grid.kind = "logarithmic";
    row.grid.inner = ns[i];
    row.grid.outer = ns[i] * ns[i];
    row.grid.n = s.nodes;
    row.grid.n1 = s.nodes;
    row.grid.relative_step = std::log(ns[i]) / (s.nodes - 1);
    residual_row(row, s.dirichlet_integral, s.closed_form,
                 std::abs(s.dirichlet_integral - s.closed_form) / s.closed_form, kTol);
  });
  out.verdict = residual_verdict(out.rows);
  return out;
}

ReportFile run_weyl(const RunConfig& c) {
  ReportFile out;
  out.parameters["beta"] = c.beta;
  out.parameters["k"] = c.weyl_k;
  out.parameters["n"] = c.weyl_n;
  out.parameters["nodes"] = c.weyl_nodes;
  const std::size_t per_k = c.weyl_n.size();
  std::vector<double> residuals(c.weyl_k.size() * per_k);
  parallel_for(residuals.size(), c.workers, [&](std::size_t t) {
    residuals[t] = weyl_residual(c.beta, c.weyl_k[t / per_k], c.weyl_n[t % per_k], c.weyl_nodes);
  });
  for (std::size_t t = 0; t < residuals.size(); ++t) {
    const double n = c.weyl_n[t % per_k];
    MarginRow row;
    row.label = "k=" + format_number(c.weyl_k[t / per_k]);
    row.channel_or_xi = c.weyl_k[t / per_k];
    row.grid.kind = "packet";
    row.grid.inner = 0.75 * n;
    row.grid.outer = 1.25 * n;
    row.grid.n = static_cast<long>(c.weyl_nodes) * c.weyl_nodes * c.weyl_nodes;
    row.grid.n1 = c.weyl_nodes;
    row.grid.relative_step = 2.0 / c.weyl_nodes;
    // Each packet must improve on the previous one along n.
    const double previous = t % per_k == 0 ? std::numeric_limits<double>::infinity() : residuals[t - 1];
    residual_row(row, residuals[t], previous, residuals[t], previous);
    row.reference.reset();
    row.margin = previous - residuals[t];
    out.rows.push_back(row);
  }
  out.verdict = residual_verdict(out.rows);
  if (out.verdict == Verdict::violated) {
    out.diagnostics.push_back("weyl residuals do not strictly decrease along n");
  }
  return out;
}

ReportFile run_landau(const RunConfig& c) {
  constexpr double kTol = 1e-3;
  const double ext = c.grid.y_extent.value_or(10.0);
  const int n = c.grid.n.empty() ? 2000 : c.grid.n.front();
  const Axis y = make_signed_grid(-ext, ext, n);
  const ConfiningSpec spec{c.beta, c.landau_xi};
  const FormMatrix H = assemble_shifted_oscillator(spec, c.landau_z, y);
  const DiagonalWeight W = assemble_weight(WeightKind::identity, y, H.quadrature);
  const auto pairs = lowest_eigenpairs(Pencil(H, W), c.landau_n_max + 1, c.solver);
  const auto levels = landau_levels(c.beta, c.landau_z, c.landau_n_max);
  ReportFile out;
  out.parameters["beta"] = c.beta;
  out.parameters["z"] = c.landau_z;
  out.parameters["xi"] = c.landau_xi;
  out.parameters["n_max"] = c.landau_n_max;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    MarginRow row;
    row.label = "n=" + std::to_string(k);
    row.channel_or_xi = static_cast<double>(k);
    row.grid = describe(y);
    residual_row(row, pairs[k].lambda_min, levels[k], std::abs(pairs[k].lambda_min - levels[k]) / levels[k], kTol);
    row.converged = pairs[k].converged;
    row.iterations = pairs[k].iterations;
    std::ostringstream os;
    os << "solver residual " << std::setprecision(3) << pairs[k].residual;
    row.diagnostic = os.str();
    out.rows.push_back(row);
  }
  out.verdict = residual_verdict(out.rows);
  return out;
}

GridDescriptor describe_box(const BoxGrid& g) {
  GridDescriptor d;
  d.kind = "box";
  d.inner = g.lo[2];
  d.outer = g.hi[2];
  d.n = static_cast<long>(g.n[0]) * g.n[1] * g.n[2];
  d.n1 = static_cast<long>(g.n[0]) * g.n[1];
  d.n2 = g.n[2];
  d.extent1 = 0.5 * (g.hi[0] - g.lo[0]);
  d.relative_step = 2.0 / (g.n[2] - 1);
  return d;
}

// Box of +-9 widths around the test function; z nodes clustered at the bump.
BoxGrid identity_box(const TestFunction& psi, int n_xy, int n_z) {
  BoxGrid g;
  for (int a = 0; a < 3; ++a) {
    g.lo[a] = psi.center[a] - 9.0 * psi.width[a];
    g.hi[a] = psi.center[a] + 9.0 * psi.width[a];
  }
  g.n = {n_xy, n_xy, n_z};
  g.cluster = {0.0, 0.0, 1.0};
  return g;
}


constexpr double kIdentityTol = 1e-6;
constexpr double kVfTol = 1e-12;

std::string order_note(double coarse, double fine) {
  std::ostringstream os;
  os << "observed order " << std::setprecision(3) << std::log2(coarse / fine);
  return os.str();
}


ReportFile run_identities(const RunConfig& c) {
  ReportFile out;
  out.parameters["beta"] = c.beta;
  out.parameters["convention"] = c.convention;
  out.parameters["seed"] = c.solver.seed;
  std::vector<Convention> conventions;
  if (c.convention != "corrected") conventions.push_back(Convention::printed);
  if (c.convention != "printed") conventions.push_back(Convention::corrected);

  // V_f against its closed form.
  {
    std::mt19937_64 rng(c.solver.seed);
    std::uniform_real_distribution<double> ub(0.1, 10.0), ux(-5.0, 5.0), uy(-5.0, 5.0), uz(0.1, 5.0);
    const auto ansatz = AnsatzFunction::paper_choice();
    double worst = 0.0;
    const int points = 10000;
    for (int i = 0; i < points; ++i) {
      const double b = ub(rng), xi = ux(rng), y = uy(rng), z = uz(rng);
      const double v = vf_potential(ansatz, b, xi, y, z);
      const double ref = vf_closed_form(b, xi, y, z);
      worst = std::max(worst, std::abs(v - ref) / std::abs(ref));
    }
    MarginRow row;
    row.label = "vf_closed_form";
    row.grid.kind = "points";
    row.grid.n = points;
    residual_row(row, worst, 0.0, worst, kVfTol);
    row.reference.reset();
    out.rows.push_back(row);
  }

  // Substitution chain and commutator under z refinement.
  const TestFunction psi = TestFunction::random(c.solver.seed, {0.5, 0.3, 2.0}, {0.4, 0.5, 0.2});
  const BoxGrid base = identity_box(psi, 49, 101);
  const std::vector<int> factors = {1, 2, 4, 8};
  const ConfiningSpec spec{c.beta, 0.0};
  const AnsatzFunction ansatz = AnsatzFunction::paper_choice();

  struct Job {
    std::string label;
    std::function<IdentityCheck(const BoxGrid&)> check;
  };
  std::vector<Job> jobs;
  for (auto stage : {SubstitutionStage::form2, SubstitutionStage::form3, SubstitutionStage::form4}) {
    for (auto conv : conventions) {
      if (stage != SubstitutionStage::form4 && conv == Convention::corrected && conventions.size() == 2) continue;
      const std::string label = stage == SubstitutionStage::form4 ? to_string(stage) + "/" + to_string(conv)
                                                                  : to_string(stage);
      jobs.push_back({label, [=, &psi, &ansatz](const BoxGrid& g) {
                        return substitution_identity_residual(stage, psi, spec, g, &ansatz, conv);
                      }});
    }
  }
  const double beta = c.beta;
  for (auto [j, k] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
    for (int sign : {1, -1}) {
      for (auto conv : conventions) {
        const std::string label = "commutator(" + std::to_string(j) + "," + std::to_string(k) + "," +
                                  (sign > 0 ? "+" : "-") + ")/" + to_string(conv);
        jobs.push_back({label, [=, &psi](const BoxGrid& g) {
                          return commutator_identity_residual(psi, j, k, sign, beta, g, conv);
                        }});
      }
    }
  }
  std::vector<IdentityCheck> checks(jobs.size() * factors.size());
  parallel_for(checks.size(), c.workers, [&](std::size_t t) {
    BoxGrid g = base;
    g.n[2] = (base.n[2] - 1) * factors[t % factors.size()] + 1;
    checks[t] = jobs[t / factors.size()].check(g);
  });
  for (std::size_t job = 0; job < jobs.size(); ++job) {
    for (std::size_t f = 0; f < factors.size(); ++f) {
      const auto& r = checks[job * factors.size() + f];
      BoxGrid g = base;
      g.n[2] = (base.n[2] - 1) * factors[f] + 1;
      MarginRow row;
      row.label = jobs[job].label;
      row.grid = describe_box(g);
      // Second-order quadrature: the fine-grid tolerance scales with h^2.
      const double steps_to_finest = static_cast<double>(factors.back() / factors[f]);
      residual_row(row, r.lhs, r.rhs, r.residual, kIdentityTol * steps_to_finest * steps_to_finest);
      if (f > 0) row.diagnostic = order_note(checks[job * factors.size() + f - 1].residual, r.residual);
      out.rows.push_back(row);
    }
  }

  // Diamagnetic inequality over random complex phases.
  for (auto kind : {MagneticPotential::Kind::aharonov_bohm, MagneticPotential::Kind::confining}) {
    const bool ab = kind == MagneticPotential::Kind::aharonov_bohm;
    const MagneticPotential potential{kind, ab ? 0.5 : c.beta};
    std::vector<double> margins(static_cast<std::size_t>(c.diamagnetic_seeds));
    const Point3 center = ab ? Point3{3.0, 0.0, 2.0} : Point3{0.5, 0.3, 2.0};
    const Point3 width{0.3, 0.3, 0.2};
    parallel_for(margins.size(), c.workers, [&](std::size_t s) {
      const auto t = TestFunction::random(c.solver.seed + 1 + s, center, width);
      margins[s] = diamagnetic_margin(t, potential, identity_box(t, 33, 33));
    });
    const double worst = *std::min_element(margins.begin(), margins.end());
    MarginRow row;
    row.label = ab ? "diamagnetic/ab" : "diamagnetic/confining";
    row.grid.kind = "box";
    row.grid.n = 33L * 33 * 33;
    row.lambda_min = worst;
    row.margin = worst;
    row.residual = std::max(0.0, -worst);
    row.tol_disc = 1e-8;
    row.converged = true;
    row.diagnostic = "minimum over " + std::to_string(c.diamagnetic_seeds) + " random test functions";
    out.rows.push_back(row);
  }

  out.verdict = residual_verdict(out.rows);
  if (out.verdict == Verdict::violated) {
    std::set<std::string> failing;
    for (const auto& r : out.rows) {
      if (!(r.residual < r.tol_disc)) failing.insert(r.label);
    }
    std::string list;
    for (const auto& l : failing) list += (list.empty() ? "" : ", ") + l;
    out.diagnostics.push_back("identities outside tolerance: " + list);
  }
  return out;
}

}  // namespace

ReportFile execute(const RunConfig& config) {
  validate(config);
  const auto t0 = std::chrono::steady_clock::now();
  ReportFile out;
  if (config.command == "verify-ab") {
    out = run_ab(config);
  } else if (config.command == "verify-confining") {
    out = run_confining(config);
  } else if (config.command == "baselines") {
    out = run_baselines(config);
  } else if (config.command == "sharpness") {
    out = run_sharpness(config);
  } else if (config.command == "identities") {
    out = run_identities(config);
  } else if (config.command == "weyl") {
    out = run_weyl(config);
  } else {
    out = run_landau(config);
  }
  out.command = config.command;
  out.parameters["solver"] = solver_json(config);
  out.timing_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << text;
  os.flush();
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

int run(const RunConfig& config) {
  ReportFile report;
  try {
    report = execute(config);
  } catch (const std::exception& e) {
    report.command = config.command;
    report.verdict = Verdict::inconclusive;
    report.diagnostics.push_back(std::string("run failed: ") + e.what());
  }
  try {
    if (config.output_format == "csv") {
      write_text(config.output_path, report.rows.empty() ? std::string() : render_plot_data(report));
    } else {
      write_text(config.output_path, serialize(report));
    }
    if (!config.plot_path.empty()) emit_plot_data(report, config.plot_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hardylab: %s\n", e.what());
    return 4;
  }
  for (const auto& d : report.diagnostics) std::fprintf(stderr, "hardylab: %s\n", d.c_str());
  return exit_code(report.verdict);
}

std::string render_plot_data(const ReportFile& report) {
  if (report.rows.empty()) throw std::invalid_argument("plot data needs a report with at least one row");
  const bool residual = is_residual_command(report.command);
  std::vector<GridDescriptor> grids;
  std::vector<std::string> series;
  std::map<std::pair<std::size_t, std::string>, double> cells;
  for (const auto& r : report.rows) {
    auto g = std::find(grids.begin(), grids.end(), r.grid);
    if (g == grids.end()) g = grids.insert(grids.end(), r.grid);
    if (std::find(series.begin(), series.end(), r.label) == series.end()) series.push_back(r.label);
    cells[{static_cast<std::size_t>(g - grids.begin()), r.label}] = residual ? r.residual : r.lambda_min;
  }
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  std::ostringstream os;
  os << std::setprecision(17);
  os << "grid_kind,grid_inner,grid_outer,grid_n,relative_step";
  for (const auto& s : series) os << "," << quote((residual ? "residual[" : "lambda_min[") + s + "]");
  os << "\n";
  for (std::size_t i = 0; i < grids.size(); ++i) {
    const auto& g = grids[i];
    os << g.kind << "," << g.inner << "," << g.outer << "," << g.n << "," << g.relative_step;
    for (const auto& s : series) {
      os << ",";
      const auto it = cells.find({i, s});
      if (it != cells.end()) os << it->second;
    }
    os << "\n";
  }
  return os.str();
}

void emit_plot_data(const ReportFile& report, const std::string& path) {
  write_text(path, render_plot_data(report));
}

}  // namespace hardylab::cli
