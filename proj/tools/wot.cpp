// Configuration-driven experiment runner.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wot/cli/config.hpp"
#include "wot/cli/runner.hpp"
#include "wot/version.hpp"

namespace {

int fail(int code, const wot::cli::json& diag) {
  std::cerr << diag.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace wot::cli;
  CLI::App app{"Optimal-transport experiments on Wiener space at desk scale"};
  app.set_version_flag("--version", "wot " + std::string(wot::kVersion));
  std::string config_path;
  std::optional<std::int64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "TOML experiment file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Run seed (overrides the file)");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--override", overrides, "key=value, value read as TOML; repeatable")->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsageError, json{{"error", "usage"}, {"message", e.what()}});
  }

  try {
    ExperimentConfig cfg = load_config(config_path, overrides, seed, out_dir);
    const RunOutcome out = run(cfg, std::cerr);
    if (out.code != kOk) return fail(out.code, out.diagnostics);
    return kOk;
  } catch (const ConfigError& e) {
    return fail(kUsageError, json{{"error", "config"}, {"key", e.key()}, {"message", e.what()}});
  } catch (const wot::DensityBoundError& e) {
    return fail(kUsageError, json{{"error", "density_bound"},
                                  {"which", e.which()},
                                  {"cell", e.cell()},
                                  {"density", e.density()},
                                  {"message", e.what()}});
  } catch (const std::invalid_argument& e) {
    return fail(kUsageError, json{{"error", "invalid_argument"}, {"message", e.what()}});
  } catch (const std::length_error& e) {
    return fail(kUsageError, json{{"error", "size_limit"}, {"message", e.what()}});
  } catch (const std::out_of_range& e) {
    return fail(kUsageError, json{{"error", "out_of_range"}, {"message", e.what()}});
  } catch (const std::exception& e) {
    return fail(kUsageError, json{{"error", "runtime"}, {"message", e.what()}});
  }
}
