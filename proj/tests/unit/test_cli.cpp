#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wot/cli/config.hpp"
#include "wot/cli/runner.hpp"

using wot::cli::ConfigError;
using wot::cli::ExperimentConfig;

namespace {

ExperimentConfig parse(std::string_view text, const std::vector<std::string>& overrides = {}) {
  toml::table t = toml::parse(text);
  for (const auto& o : overrides) wot::cli::apply_override(t, o);
  return wot::cli::parse_config(t);
}

std::string error_key(std::string_view text, const std::vector<std::string>& overrides = {}) {
  try {
    parse(text, overrides);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<accepted>";
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("wot_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, DefaultsAreResolved) {
  const auto c = parse("subcommand = \"norm\"");
  EXPECT_EQ(c.subcommand, "norm");
  EXPECT_EQ(c.sobolev, wot::SobolevParams());
  EXPECT_EQ(c.grid, wot::GridSpec{});
  EXPECT_EQ(c.resolved["sobolev"]["k"], 4);
  EXPECT_EQ(c.resolved["grid"]["cells_per_axis"], 400);
  EXPECT_EQ(c.resolved["tolerance"]["gradient_rel"], 1e-4);
}

TEST(Config, UnknownKeysAreRejectedAtEveryDepth) {
  EXPECT_EQ(error_key("subcommand = \"norm\"\nbogus = 1"), "bogus");
  EXPECT_EQ(error_key("subcommand = \"norm\"\n[grid]\ncells = 3"), "grid.cells");
  EXPECT_EQ(error_key("subcommand = \"norm\"\n[tolerance]\nfoo = 1.0"), "tolerance.foo");
  EXPECT_EQ(error_key("subcommand = \"norm\"\n[extra]\nx = 1"), "extra");
  EXPECT_EQ(error_key("subcommand = \"sing\""), "subcommand");
  EXPECT_EQ(error_key("seed = 1"), "subcommand");
}

TEST(Config, TypesAreStrict) {
  EXPECT_EQ(error_key("subcommand = \"norm\"\n[grid]\ncells_per_axis = 2.5"), "grid.cells_per_axis");
  EXPECT_EQ(error_key("subcommand = \"norm\"\n[sobolev]\ngamma = \"0.3\""), "sobolev.gamma");
  EXPECT_EQ(error_key("subcommand = \"norm\"\n[sweep]\nt_values = [0.5, 2.0]"), "sweep.t_values");
  // integers are accepted where reals are expected
  EXPECT_EQ(parse("subcommand = \"norm\"\n[grid]\nhalf_range = 3").grid.half_range, 3.0);
}

TEST(Config, GammaConstraintIsCited) {
  try {
    parse("subcommand = \"norm\"\n[sobolev]\ngamma = 0.6");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "sobolev.gamma");
    EXPECT_NE(std::string(e.what()).find("0<γ<1/2"), std::string::npos);
  }
}

TEST(Config, OverridesParseAsToml) {
  const auto c = parse("subcommand = \"norm\"\n[grid]\ndim = 2",
                       {"grid.cells_per_axis=50", "cost.p=inf", "sweep.levels=[1, 2]", "cost.kind=linf_squared"});
  EXPECT_EQ(c.grid.dim, 2);
  EXPECT_EQ(c.grid.cells_per_axis, 50);
  EXPECT_TRUE(std::isinf(c.cost.p));
  EXPECT_EQ(c.resolved["cost"]["p"], "inf");
  EXPECT_EQ(c.sweep.levels, (std::vector<std::int64_t>{1, 2}));
  EXPECT_EQ(c.cost.kind, "linf_squared");
  EXPECT_THROW(parse("subcommand = \"norm\"", {"nonsense"}), ConfigError);
  EXPECT_EQ(error_key("subcommand = \"norm\"", {"grid.bogus=1"}), "grid.bogus");
}

TEST(Runner, ExperimentKeysAreStrict) {
  auto c = parse("subcommand = \"plimit\"\n[experiment]\ninstances = 1\nbogus = 2");
  c.out_dir = scratch("strict").string();
  std::ostringstream log;
  try {
    wot::cli::run(c, log);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "experiment.bogus");
  }
  EXPECT_FALSE(std::filesystem::exists(c.out_dir));
}

TEST(Runner, UnusedSweepIsRejected) {
  auto c = parse("subcommand = \"project\"\n[sweep]\np_values = [2.0]");
  std::ostringstream log;
  EXPECT_THROW(wot::cli::run(c, log), ConfigError);
}

TEST(Runner, ArtifactsEmbedConfigAndAreReproducible) {
  const std::string text = "subcommand = \"plimit\"\nseed = 4\n[experiment]\ninstances = 2\npoints = 4\ntarget_points = 5";
  auto a = parse(text);
  a.out_dir = scratch("repro").string();
  std::ostringstream log;
  EXPECT_EQ(wot::cli::run(a, log).code, wot::cli::kOk);
  const auto first_csv = slurp(std::filesystem::path(a.out_dir) / "plimit.csv");
  const auto first_json = slurp(std::filesystem::path(a.out_dir) / "report.json");
  auto b = parse(text);
  b.out_dir = a.out_dir;
  wot::cli::run(b, log);
  EXPECT_EQ(slurp(std::filesystem::path(b.out_dir) / "plimit.csv"), first_csv);
  EXPECT_EQ(slurp(std::filesystem::path(b.out_dir) / "report.json"), first_json);

  EXPECT_EQ(first_csv.rfind("# version: wot ", 0), 0u);
  EXPECT_NE(first_csv.find("# config: {\"subcommand\":\"plimit\",\"seed\":4"), std::string::npos);
  const auto report = wot::cli::json::parse(first_json);
  EXPECT_EQ(report["config"]["experiment"]["points"], 4);
  EXPECT_EQ(report["config"]["experiment"]["weights"], "random");
  EXPECT_EQ(report["config"]["sweep"]["p_values"].size(), 5u);
}

TEST(Runner, FailedCheckGivesExitTwoWithDiagnostics) {
  auto c = parse("subcommand = \"rays\"\n[cost]\nkind = \"lp_metric\"\np = inf\n[experiment]\ninstance = \"linf_branching\"");
  c.out_dir = scratch("branching").string();
  std::ostringstream log;
  const auto out = wot::cli::run(c, log);
  EXPECT_EQ(out.code, wot::cli::kCheckFailed);
  EXPECT_EQ(out.diagnostics["error"], "check_failed");
  EXPECT_EQ(out.diagnostics["failed"][0]["name"], "non_branching");
  const auto report = wot::cli::json::parse(slurp(std::filesystem::path(c.out_dir) / "report.json"));
  EXPECT_EQ(report["results"]["non_branching"]["violations"][0]["point"], 1);
}

TEST(Runner, RaysNeedANormCost) {
  auto c = parse("subcommand = \"rays\"\n[cost]\nkind = \"lp_squared\"");
  std::ostringstream log;
  try {
    wot::cli::run(c, log);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "cost.kind");
  }
}

TEST(Csv, RowsAndPreamble) {
  wot::io::CsvTable t({"a", "b", "c"});
  t.row() << 1 << 0.1 << "x";
  t.row() << std::size_t{2} << std::numeric_limits<double>::infinity() << true;
  std::ostringstream os;
  t.write(os, {"version: v", "config: {}"});
  EXPECT_EQ(os.str(), "# version: v\n# config: {}\na,b,c\n1,0.1,x\n2,inf,true\n");
  EXPECT_EQ(wot::io::format_double(0.1 + 0.2), "0.30000000000000004");
  EXPECT_EQ(wot::io::format_double(1e-300), "1e-300");
}
