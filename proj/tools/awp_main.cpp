#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "awp/config.hpp"
#include "awp/errors.hpp"
#include "awp/field_io.hpp"
#include "awp/parallel.hpp"
#include "awp/scenarios.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAssertion = 3;

std::string output_root() {
  const char* env = std::getenv("AWP_OUTPUT_ROOT");
  return env && *env ? env : "awp_output";
}

awp::ScenarioConfig resolve(const std::string& what) {
  const auto& names = awp::scenario_names();
  if (std::find(names.begin(), names.end(), what) != names.end()) return awp::default_config(what);
  if (fs::exists(what)) return awp::load_config(what);
  throw awp::ConfigError(fmt::format("'{}' is neither a scenario name nor a config file", what));
}

int cmd_run(const std::string& what, const std::string& out_opt) {
  const awp::ScenarioConfig cfg = resolve(what);
  fs::path out;
  if (!out_opt.empty())
    out = out_opt;
  else if (!cfg.output_dir.empty())
    out = fs::path(cfg.output_dir).is_absolute() ? fs::path(cfg.output_dir) : fs::path(output_root()) / cfg.output_dir;
  else
    out = fs::path(output_root()) / cfg.scenario;
  const auto m = awp::run_scenario(cfg, out.string());
  fmt::print("{}: {} artifacts in {} ({:.1f} s), config {}\n", m.scenario, m.artifacts.size(), out.string(),
             m.wall_clock_s, m.config_hash.substr(0, 12));
  if (!m.assertions_passed) {
    for (const auto& f : m.failures) fmt::print(stderr, "assertion failed: {}\n", f);
    return kExitAssertion;
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto findings = awp::validate_config(path);
  for (const auto& f : findings) fmt::print("{}: {}\n", f.path.empty() ? "<root>" : f.path, f.message);
  if (findings.empty()) {
    fmt::print("{}: ok\n", path);
    return 0;
  }
  return kExitConfig;
}

int cmd_export(const std::string& field_path, const std::string& out_opt) {
  const awp::SampledField f = awp::load_field(field_path);
  const std::string out = out_opt.empty() ? fs::path(field_path).replace_extension(".pgm").string() : out_opt;
  awp::save_field_pgm(out, f);
  fmt::print("{}\n", out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Klyshko advanced-wave wavefront shaping simulator"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("-j,--threads", threads, "Worker threads (0: hardware concurrency)");

  std::string target, out;
  auto* run = app.add_subcommand("run", "Run a named scenario or a config file");
  run->add_option("target", target, "Scenario name or config path")->required();
  run->add_option("-o,--out", out, "Output directory (default: $AWP_OUTPUT_ROOT/<scenario>)");

  std::string config_path;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path)->required();

  auto* list = app.add_subcommand("list-scenarios", "Print the built-in scenario names");

  std::string field_path, pgm_out;
  bool pgm = false;
  auto* exp = app.add_subcommand("export", "Convert a field file");
  exp->add_option("field", field_path)->required();
  exp->add_flag("--pgm", pgm, "Write an |a|^2 PGM preview")->required();
  exp->add_option("-o,--out", pgm_out, "PGM path (default: field path with .pgm)");

  CLI11_PARSE(app, argc, argv);
  awp::set_thread_count(threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));

  try {
    if (*run) return cmd_run(target, out);
    if (*validate) return cmd_validate(config_path);
    if (*list) {
      for (const auto& n : awp::scenario_names()) fmt::print("{}\n", n);
      return 0;
    }
    if (*exp) return cmd_export(field_path, pgm_out);
  } catch (const awp::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
