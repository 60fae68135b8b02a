#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "awp/config.hpp"
#include "awp/errors.hpp"
#include "awp/field_io.hpp"
#include "awp/scenarios.hpp"

using namespace awp;
namespace fs = std::filesystem;

namespace {

bool has_finding(const std::vector<Finding>& fs, const std::string& path, const std::string& text) {
  for (const auto& f : fs)
    if (f.path == path && f.message.find(text) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("awp_test_" + name);
  fs::remove_all(p);
  return p;
}

const std::string kMinimal = R"(scenario: fig3_optimize
grid: {n_x: 1024, pitch_m: 8.0e-6, wavelength_m: 810.0e-9}
)";

}  // namespace

TEST_CASE("shipped configs are clean") {
  int seen = 0;
  for (const auto& e : fs::directory_iterator(AWP_CONFIG_DIR)) {
    if (e.path().extension() != ".yaml") continue;
    ++seen;
    const auto findings = validate_config(e.path().string());
    for (const auto& f : findings) MESSAGE(e.path().string() << ": " << f.path << ": " << f.message);
    CHECK(findings.empty());
  }
  CHECK(seen == static_cast<int>(scenario_names().size()));
  const auto fig3 = load_config(std::string(AWP_CONFIG_DIR) + "/fig3_optimize.yaml");
  CHECK(config_hash(fig3) == config_hash(default_config("fig3_optimize")));
}

TEST_CASE("minimal config inherits scenario defaults") {
  std::vector<Finding> f;
  const auto cfg = parse_config(kMinimal, f);
  check_config(cfg, f);
  CHECK(f.empty());
  CHECK(config_hash(cfg) == config_hash(default_config("fig3_optimize")));
}

TEST_CASE("missing required key names its path") {
  std::vector<Finding> f;
  parse_config("scenario: fig3_optimize\ngrid: {n_x: 1024, pitch_m: 8.0e-6}\n", f);
  CHECK(has_finding(f, "grid.wavelength_m", "missing required key"));
}

TEST_CASE("unit suffix mismatch") {
  std::vector<Finding> f;
  parse_config(kMinimal + "crystal: {length_mm: 2}\n", f);
  CHECK(has_finding(f, "crystal.length_mm", "expected key 'length_m'"));
}

TEST_CASE("wrong value type and unknown key") {
  std::vector<Finding> f;
  parse_config(kMinimal + "slm: {cols: many, colour: red}\n", f);
  CHECK(has_finding(f, "slm.cols", "wrong value type"));
  CHECK(has_finding(f, "slm.colour", "unknown key"));
}

TEST_CASE("unresolved diffuser preset") {
  std::vector<Finding> f;
  auto cfg = parse_config(kMinimal + "arms: {scan: [{diffuser: frosted}, {lens_focal_length_m: 0.1}]}\n", f);
  check_config(cfg, f);
  bool found = false;
  for (const auto& x : f) found = found || x.message.find("unresolved diffuser preset 'frosted'") != std::string::npos;
  CHECK(found);
}

TEST_CASE("under-resolved diffuser") {
  auto cfg = default_config("fig3_optimize");
  cfg.diffusers["thin_05"].divergence_rad = 0.04;  // Nyquist half-angle is about 0.05 rad at 8 um
  std::vector<Finding> f;
  check_config(cfg, f);
  CHECK(has_finding(f, "diffusers.thin_05.divergence_rad", "under-resolved"));
}

TEST_CASE("pose outside its plane") {
  auto cfg = default_config("fig3_optimize");
  cfg.target.center_x_m = 0.05;
  std::vector<Finding> f;
  check_config(cfg, f);
  CHECK(!f.empty());
}

TEST_CASE("syntax error reports line and column") {
  std::vector<Finding> f;
  CHECK_THROWS_WITH_AS(parse_config("scenario: fig3_optimize\ngrid: {n_x: [1, \n", f),
                       doctest::Contains("line"), ConfigError);
}

TEST_CASE("unknown scenario") {
  CHECK_THROWS_AS(default_config("fig9"), ConfigError);
  std::vector<Finding> f;
  CHECK_THROWS_AS(parse_config("scenario: fig9\ngrid: {n_x: 64, pitch_m: 1e-5, wavelength_m: 8e-7}\n", f),
                  ConfigError);
}

TEST_CASE("config hash") {
  auto a = default_config("fig4_memory");
  auto b = default_config("fig4_memory");
  b.output_dir = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 64);
  b.memory.points = 17;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(nlohmann::json::parse(canonical_json(a)).contains("grid"));
}

TEST_CASE("field round trip and pgm") {
  SampledField f(GridSpec{8, 4, 5e-6, 810e-9});
  for (int i = 0; i < 32; ++i) f.data()[static_cast<std::size_t>(i)] = cplx(0.25 * i, -0.5 * i);
  std::stringstream s;
  write_field(s, f);
  const auto g = read_field(s);
  CHECK(g.spec().n_x == 8);
  CHECK(g.spec().n_y == 4);
  CHECK(g.spec().pitch == 5e-6);
  for (int i = 0; i < 32; ++i) CHECK(g.data()[static_cast<std::size_t>(i)] == f.data()[static_cast<std::size_t>(i)]);

  std::stringstream bad("AWP1 8 4 oops\n");
  CHECK_THROWS_AS(read_field(bad), Error);

  std::ostringstream pgm;
  write_pgm(pgm, {0.0, 1.0, 2.0, 4.0}, 2, 2);
  const std::string p = pgm.str();
  CHECK(p.rfind("P5\n2 2\n255\n", 0) == 0);
  CHECK(static_cast<unsigned char>(p.back()) == 255);
}

TEST_CASE("oracle scenario run writes a manifest") {
  auto cfg = default_config("equivalence_oracle");
  cfg.seeds = {0, 1, 2};
  cfg.oracle.map_n_x = 256;
  cfg.oracle.map_points = 21;
  const auto dir = scratch("oracle");
  const auto m = run_scenario(cfg, dir.string());
  CHECK(m.assertions_passed);
  CHECK(m.config_hash == config_hash(cfg));
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(j["scenario"] == "equivalence_oracle");
  CHECK(j["config_hash"] == m.config_hash);
  CHECK(j.contains("wall_clock_s"));
  for (const auto& a : m.artifacts) CHECK(fs::exists(dir / a));
  fs::remove_all(dir);
}

TEST_CASE("memory scenario writes scans and fit records") {
  auto cfg = default_config("fig4_memory");
  cfg.seeds = {0};
  const auto dir = scratch("memory");
  const auto m = run_scenario(cfg, dir.string());
  for (const char* c : {"classical", "quantum", "copropagating"}) {
    CHECK(fs::exists(dir / (std::string("scan_") + c + "_seed0.csv")));
  }
  CHECK(fs::exists(dir / "fits.csv"));
  CHECK(fs::exists(dir / "fit_classical_seed0.json"));
  CHECK(m.artifacts.size() >= 7);
  fs::remove_all(dir);
}

TEST_CASE("runs are reproducible") {
  auto cfg = default_config("fig5_two_spots");
  cfg.seeds = {4};
  const auto a = scratch("rep_a"), b = scratch("rep_b");
  run_scenario(cfg, a.string());
  run_scenario(cfg, b.string());
  for (const char* name : {"summary.csv", "trace_seed4.csv"}) CHECK(slurp(a / name) == slurp(b / name));
  fs::remove_all(a);
  fs::remove_all(b);
}
