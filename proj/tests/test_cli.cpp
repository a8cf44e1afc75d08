#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "hardylab/cli.hpp"

using namespace hardylab;
using namespace hardylab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hardylab_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Small AB family used by the run tests.
std::vector<std::string> small_ab(std::vector<std::string> extra = {}) {
  std::vector<std::string> a{"verify-ab", "--alpha", "0.5", "--m-min", "-1", "--m-max", "0",
                             "--grid-outer", "50,100", "--grid-n", "100,200"};
  a.insert(a.end(), extra.begin(), extra.end());
  return a;
}

struct SeedGuard {
  SeedGuard() { unsetenv("HARDYLAB_SEED"); }
  ~SeedGuard() { unsetenv("HARDYLAB_SEED"); }
};

}  // namespace

TEST_CASE("parsing flags") {
  SeedGuard guard;
  const auto c = parse_config({"verify-confining", "--beta", "2", "--variant", "with_xi", "--xi", "-4,0,4"});
  CHECK(c.command == "verify-confining");
  CHECK(c.beta == 2.0);
  CHECK(c.variant == ConfiningVariant::with_xi);
  CHECK(c.xi == std::vector<double>{-4.0, 0.0, 4.0});

  const auto ab = parse_config({"verify-ab", "--alpha", "0.3", "--dim", "3", "--m-min", "-2", "--m-max", "2"});
  CHECK(ab.alpha == 0.3);
  CHECK(ab.dim == 3);
  CHECK(ab.m_min == -2);
  CHECK(ab.m_max == 2);

  // --n and --xi belong to different keys depending on the command.
  CHECK(parse_config({"sharpness", "--n", "1.5,2"}).sharpness_n == std::vector<double>{1.5, 2.0});
  CHECK(parse_config({"weyl", "--n", "4,8"}).weyl_n == std::vector<double>{4.0, 8.0});
  CHECK(parse_config({"spectrum-landau", "--xi", "1.5"}).landau_xi == 1.5);

  for (const auto& name : commands()) CHECK(parse_config({name}).command == name);
}

TEST_CASE("usage errors") {
  SeedGuard guard;
  CHECK_THROWS_AS(parse_config({}), UsageError);
  CHECK_THROWS_AS(parse_config({"no-such-command"}), UsageError);
  CHECK_THROWS_AS(parse_config({"verify-ab", "--beta", "1"}), UsageError);
  try {
    parse_config({"verify-ab", "--help"});
    FAIL("expected help");
  } catch (const UsageError& e) {
    CHECK(e.exit_code() == 0);
    CHECK(e.text().find("--alpha") != std::string::npos);
  }
}

TEST_CASE("precedence: file < --set < flags < environment") {
  SeedGuard guard;
  const auto file = scratch("precedence.cfg");
  write(file, "# tolerance\nsolver.tol = 1e-6\nbeta = 0.5   # trailing comment\n\nsolver.seed = 3\n");
  auto c = parse_config({"verify-confining"}, file.string());
  CHECK(c.solver.tol == 1e-6);
  CHECK(c.beta == 0.5);
  CHECK(c.solver.seed == 3);

  c = parse_config({"verify-confining", "--tol", "1e-8"}, file.string());
  CHECK(c.solver.tol == 1e-8);

  c = parse_config({"--config", file.string(), "--set", "beta=2", "verify-confining"});
  CHECK(c.beta == 2.0);
  c = parse_config({"--config", file.string(), "--set", "beta=2", "verify-confining", "--beta", "4"});
  CHECK(c.beta == 4.0);

  setenv("HARDYLAB_SEED", "11", 1);
  c = parse_config({"verify-confining", "--seed", "5"}, file.string());
  CHECK(c.solver.seed == 11);
  setenv("HARDYLAB_SEED", "x", 1);
  CHECK_THROWS_AS(parse_config({"verify-confining"}), ConfigError);
}

TEST_CASE("errors name the key") {
  SeedGuard guard;
  try {
    parse_config({"verify-confining", "--beta", "abc"});
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "beta");
    CHECK(std::string(e.what()).find("abc") != std::string::npos);
  }
  RunConfig c;
  CHECK_THROWS_WITH_AS(apply_key(c, "no.such.key", "1"), doctest::Contains("no.such.key"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_config_text(c, "beta 1\n", "inline"), doctest::Contains("inline"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_key(c, "dim", "2.5"), doctest::Contains("dim"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_key(c, "confining.variant", "other"), doctest::Contains("confining.variant"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config({"sharpness", "--n", "1"}), ConfigError);
  CHECK_THROWS_AS(parse_config({"verify-ab", "--dim", "1"}), ConfigError);
  CHECK_THROWS_AS(parse_config({"verify-ab", "--grid-outer", "10,20", "--grid-n", "50,60,70"}), ConfigError);
  CHECK_NOTHROW(parse_config({"verify-ab", "--grid-outer", "10,20", "--grid-n", "50"}));
  CHECK_THROWS_AS(parse_config({"verify-confining", "--tol", "0"}), ConfigError);
  CHECK_THROWS_AS(parse_config({"verify-confining", "--format", "xml"}), ConfigError);
}

TEST_CASE("report JSON round trip") {
  ReportFile r;
  r.command = "verify-ab";
  r.parameters = {{"alpha", 0.5}};
  MarginRow row;
  row.label = "m=0";
  row.grid.kind = "logarithmic";
  row.grid.inner = 1e-3;
  row.grid.outer = 100.0;
  row.grid.n = 200;
  row.grid.relative_step = 0.05;
  row.lambda_min = 0.26;
  row.channel_or_xi = 0.0;
  row.margin = 0.01;
  row.tol_disc = 5e-4;
  row.residual = std::numeric_limits<double>::infinity();
  row.converged = true;
  row.iterations = 12;
  row.reference = 0.25;
  r.rows.push_back(row);
  row.label = "m=-1";
  row.margin = std::numeric_limits<double>::quiet_NaN();
  row.reference.reset();
  row.converged = false;
  r.rows.push_back(row);
  r.convergence.push_back({row.grid, 0.01});
  r.convergence_monotone = false;
  r.verdict = Verdict::violated;
  r.diagnostics = {"note"};
  r.timing_ms = 12.5;

  const ReportFile back = parse_report(serialize(r));
  CHECK(back.command == r.command);
  CHECK(back.parameters == r.parameters);
  REQUIRE(back.rows.size() == 2);
  CHECK(std::isinf(back.rows[0].residual));
  CHECK(back.rows[0].reference == 0.25);
  CHECK(std::isnan(back.rows[1].margin));
  CHECK_FALSE(back.rows[1].reference.has_value());
  CHECK(back.verdict == Verdict::violated);
  CHECK(back.convergence_monotone == false);
  CHECK(back.diagnostics == r.diagnostics);
  r.rows[1].margin = 0.0;
  ReportFile back2 = parse_report(serialize(r));
  CHECK(back2 == r);

  const auto j = to_json(r);
  CHECK(j.at("schema_version") == kSchemaVersion);
  CHECK_THROWS(report_from_json(nlohmann::json{{"schema_version", 99}}));
}

TEST_CASE("verdict helpers") {
  CHECK(exit_code(Verdict::certified_nonnegative) == 0);
  CHECK(exit_code(Verdict::violated) == 2);
  CHECK(exit_code(Verdict::inconclusive) == 3);
  MarginRow a;
  a.residual = 1e-9;
  a.tol_disc = 1e-6;
  a.converged = true;
  CHECK(residual_verdict({a}) == Verdict::certified_nonnegative);
  MarginRow b = a;
  b.converged = false;
  CHECK(residual_verdict({a, b}) == Verdict::inconclusive);
  MarginRow c = a;
  c.residual = 1e-3;
  CHECK(residual_verdict({b, c}) == Verdict::violated);
}

TEST_CASE("exit codes of full runs") {
  SeedGuard guard;
  const auto out = scratch("ab.json");
  SUBCASE("certified") {
    CHECK(run(parse_config(small_ab({"-o", out.string()}))) == 0);
    const auto r = parse_report(slurp(out));
    CHECK(r.verdict == Verdict::certified_nonnegative);
    CHECK(r.rows.size() == 4);
    CHECK(r.parameters.contains("solver"));
  }
  SUBCASE("violated") {
    CHECK(run(parse_config(small_ab({"--rhs", "0.5", "-o", out.string()}))) == 2);
    CHECK(parse_report(slurp(out)).verdict == Verdict::violated);
  }
  SUBCASE("inconclusive without convergence") {
    CHECK(run(parse_config(small_ab({"--max-iter", "1", "-o", out.string()}))) == 3);
  }
  SUBCASE("unwritable output") {
    CHECK(run(parse_config(small_ab({"-o", "/nonexistent-dir/x/report.json"}))) == 4);
  }
}

TEST_CASE("runs are deterministic") {
  SeedGuard guard;
  const auto a = execute(parse_config(small_ab({"--seed", "7"})));
  const auto b = execute(parse_config(small_ab({"--seed", "7"})));
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].lambda_min == b.rows[i].lambda_min);
    CHECK(a.rows[i].margin == b.rows[i].margin);
  }
  CHECK(a.verdict == b.verdict);
}

TEST_CASE("plot data") {
  SeedGuard guard;
  const auto r = execute(parse_config({"verify-ab", "--m-min", "-1", "--m-max", "-1", "--grid-outer", "20,40,80",
                                       "--grid-n", "60,120,240"}));
  std::string csv = render_plot_data(r);
  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].rfind("grid_kind,grid_inner,grid_outer,grid_n,relative_step,lambda_min[", 0) == 0);

  const auto multi = execute(parse_config(small_ab()));
  std::istringstream in2(render_plot_data(multi));
  std::string header;
  std::getline(in2, header);
  CHECK(header.find("lambda_min[m=-1]") != std::string::npos);
  CHECK(header.find("lambda_min[m=0]") != std::string::npos);

  const auto path = scratch("plot.csv");
  emit_plot_data(multi, path.string());
  CHECK(slurp(path) == render_plot_data(multi));
  CHECK_THROWS_AS(render_plot_data(ReportFile{}), std::invalid_argument);
}

TEST_CASE("residual commands") {
  SeedGuard guard;
  const auto w = execute(parse_config({"weyl", "--k", "1", "--n", "4,8", "--nodes", "24"}));
  REQUIRE(w.rows.size() == 2);
  CHECK(w.rows[1].residual < w.rows[0].residual);
  CHECK(w.verdict == Verdict::certified_nonnegative);
  CHECK(render_plot_data(w).find("residual[") != std::string::npos);

  const auto l = execute(parse_config({"spectrum-landau"}));
  REQUIRE(l.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(l.rows[i].reference == doctest::Approx(2.0 * i + 1.0));
  CHECK(l.verdict == Verdict::certified_nonnegative);
}
