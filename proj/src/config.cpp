#include "awp/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "awp/elements.hpp"
#include "awp/errors.hpp"

namespace awp {

namespace {

const std::array<const char*, 9> kUnitSuffixes = {"_m", "_rad", "_s", "_hz", "_deg", "_mm", "_um", "_nm", "_mrad"};

std::string stem(const std::string& key) {
  for (const char* suf : kUnitSuffixes) {
    const std::string s = suf;
    if (key.size() > s.size() && key.compare(key.size() - s.size(), s.size(), s) == 0)
      return key.substr(0, key.size() - s.size());
  }
  return key;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

class Reader {
 public:
  explicit Reader(std::vector<Finding>& findings) : findings_(findings) {}

  void add(const std::string& path, const std::string& msg) { findings_.push_back({path, msg}); }

  bool is_map(const YAML::Node& n, const std::string& path) {
    if (!n || n.IsNull()) return false;
    if (!n.IsMap()) {
      add(path, "expected a mapping");
      return false;
    }
    return true;
  }

  /// Reports unknown keys; a key that differs from an allowed one only in
  /// its unit suffix is reported as a unit error.
  void keys(const YAML::Node& n, const std::string& path, const std::vector<std::string>& allowed) {
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      auto match = std::find_if(allowed.begin(), allowed.end(), [&](const std::string& a) {
        return stem(a) != a && stem(a) == stem(key);
      });
      if (match != allowed.end())
        add(join(path, key), fmt::format("unit error: expected key '{}'", *match));
      else
        add(join(path, key), "unknown key");
    }
  }

  template <class T>
  bool get(const YAML::Node& n, const std::string& path, const char* key, T& out, bool required = false) {
    const auto v = n[key];
    if (!v) {
      if (required) add(join(path, key), "missing required key");
      return false;
    }
    try {
      out = v.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      add(join(path, key), "wrong value type");
      return false;
    }
  }

 private:
  std::vector<Finding>& findings_;
};

ScenarioConfig base_1d() {
  ScenarioConfig c;
  c.grid = GridSpec{1024, 1, 8e-6, 810e-9};
  c.diffusers["thick_025"] = {DiffuserPreset::Kind::Thick, 4.36e-3, kStrongPhaseStdev, 0.045};
  c.diffusers["thin_05"] = {DiffuserPreset::Kind::Thin, 8.73e-3, kStrongPhaseStdev, 0.0};
  c.scan_arm.elements = {{ElementSpec::Kind::Diffuser, "thick_025", 0.0}, {ElementSpec::Kind::Lens, "", 0.1}};
  c.fixed_arm.elements = {{ElementSpec::Kind::Diffuser, "thin_05", 0.0}, {ElementSpec::Kind::Lens, "", 0.1}};
  c.fixed = {FiberKind::SingleMode, 0.0, 0.0, 25e-6};
  // anticorrelated partner of the fixed fiber, shifted by the pinhole tilt
  // (twice: the pattern acts on both photons)
  c.target = {FiberKind::MultiMode, 3e-4, 0.0, 50e-6};  // f * 2 * tilt_inside
  c.target_b = c.target;
  for (std::uint64_t s = 0; s < 10; ++s) c.seeds.push_back(s);
  c.noise_study.quantum.brightness = 1e4;
  c.noise_study.quantum.singles_rate_1 = 1e5;
  c.noise_study.quantum.singles_rate_2 = 1e5;
  c.noise_study.classical.brightness = 1e12;
  return c;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"equivalence_oracle", "fig2_speckle",   "fig3_optimize",
                                                 "fig4_memory",        "fig5_two_spots", "supp_deviations"};
  return names;
}

ScenarioConfig default_config(const std::string& scenario) {
  ScenarioConfig c = base_1d();
  c.scenario = scenario;
  if (scenario == "fig3_optimize") return c;
  if (scenario == "fig4_memory") {
    c.fixed_arm = {{}, true};
    return c;
  }
  if (scenario == "fig5_two_spots") {
    c.target.center_x_m = 2.5e-4;
    c.target_b.center_x_m = 3.5e-4;
    return c;
  }
  if (scenario == "supp_deviations") {
    c.diffusers.clear();
    c.scan_arm.elements = {{ElementSpec::Kind::FreeSpace, "", 0.045}};
    c.fixed_arm.elements = {{ElementSpec::Kind::Lens, "", 0.1}};
    c.fixed.size_m = 50e-6;
    c.target = {FiberKind::MultiMode, 0.0, 0.0, 50e-6};
    c.target_b = c.target;
    c.slm.pinhole = false;
    c.seeds = {0};
    return c;
  }
  if (scenario == "equivalence_oracle") {
    c.grid = GridSpec{128, 1, 20e-6, 810e-9};
    c.diffusers.clear();
    c.scan_arm.elements.clear();
    c.fixed_arm.elements.clear();
    c.magnification = 1.0;
    c.pump.waist = 600e-6;
    c.slm.pinhole = false;
    c.slm.pupil_radius_m = 1.28e-3;
    c.target = {FiberKind::SingleMode, 0.0, 0.0, 80e-6};
    c.target_b = c.target;
    c.seeds.clear();
    for (std::uint64_t s = 0; s < 20; ++s) c.seeds.push_back(s);
    return c;
  }
  if (scenario == "fig2_speckle") {
    c.grid = GridSpec{256, 256, 10e-6, 810e-9};
    c.diffusers.clear();
    c.diffusers["weak_05"] = {DiffuserPreset::Kind::Thin, 8.73e-3, kWeakPhaseStdev, 0.0};
    c.scan_arm.elements = {{ElementSpec::Kind::Diffuser, "weak_05", 0.0}, {ElementSpec::Kind::Lens, "", 0.1}};
    c.fixed_arm.elements = {{ElementSpec::Kind::Lens, "", 0.1}};
    // two and four far-field samples: the smallest fibers this grid resolves
    c.fixed = {FiberKind::SingleMode, 0.0, 0.0, 64e-6};
    c.target = {FiberKind::MultiMode, 0.0, 0.0, 127e-6};
    c.target_b = c.target;
    c.slm = SlmConfig{21, 21, 363, 1.05e-3, false, 0.0, 0.0};
    c.seeds = {0};
    return c;
  }
  throw ConfigError("unknown scenario '" + scenario + "'");
}

namespace {

void read_pose(Reader& r, const YAML::Node& n, const std::string& path, PoseConfig& pose) {
  if (!r.is_map(n, path)) return;
  r.keys(n, path, {"kind", "center_x_m", "center_y_m", "waist_m", "core_diameter_m"});
  std::string kind;
  if (r.get(n, path, "kind", kind)) {
    if (kind == "smf")
      pose.kind = FiberKind::SingleMode;
    else if (kind == "mmf")
      pose.kind = FiberKind::MultiMode;
    else
      r.add(join(path, "kind"), "expected smf or mmf");
  }
  r.get(n, path, "center_x_m", pose.center_x_m);
  r.get(n, path, "center_y_m", pose.center_y_m);
  if (pose.kind == FiberKind::SingleMode) {
    r.get(n, path, "waist_m", pose.size_m);
    if (n["core_diameter_m"]) r.add(join(path, "core_diameter_m"), "single-mode fibers take waist_m");
  } else {
    r.get(n, path, "core_diameter_m", pose.size_m);
    if (n["waist_m"]) r.add(join(path, "waist_m"), "multimode fibers take core_diameter_m");
  }
}

std::vector<ElementSpec> read_elements(Reader& r, const YAML::Node& n, const std::string& path) {
  std::vector<ElementSpec> out;
  if (!n.IsSequence()) {
    r.add(path, "expected a list of elements");
    return out;
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string p = fmt::format("{}[{}]", path, i);
    const auto e = n[i];
    if (!e.IsMap() || e.size() != 1) {
      r.add(p, "an element is a single-key mapping");
      continue;
    }
    r.keys(e, p, {"diffuser", "lens_focal_length_m", "free_space_m", "magnifier_ratio"});
    ElementSpec spec;
    if (r.get(e, p, "diffuser", spec.preset)) {
      spec.kind = ElementSpec::Kind::Diffuser;
    } else if (r.get(e, p, "lens_focal_length_m", spec.value)) {
      spec.kind = ElementSpec::Kind::Lens;
    } else if (r.get(e, p, "free_space_m", spec.value)) {
      spec.kind = ElementSpec::Kind::FreeSpace;
    } else if (r.get(e, p, "magnifier_ratio", spec.value)) {
      spec.kind = ElementSpec::Kind::Magnifier;
    } else {
      continue;
    }
    out.push_back(spec);
  }
  return out;
}

void read_noise(Reader& r, const YAML::Node& n, const std::string& path, NoiseConfig& cfg) {
  if (!r.is_map(n, path)) return;
  r.keys(n, path, {"brightness_hz", "singles_rate_1_hz", "singles_rate_2_hz"});
  r.get(n, path, "brightness_hz", cfg.brightness);
  r.get(n, path, "singles_rate_1_hz", cfg.singles_rate_1);
  r.get(n, path, "singles_rate_2_hz", cfg.singles_rate_2);
}

ScenarioConfig parse_document(const YAML::Node& root, Reader& r) {
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  r.keys(root, "",
         {"scenario", "seeds", "output_dir", "grid", "pump", "crystal", "diffusers", "arms", "slm", "detectors",
          "optimizer", "baseline", "memory", "two_spot", "noise_study", "oracle", "speckle"});
  std::string name;
  if (!r.get(root, "", "scenario", name, true)) throw ConfigError("config: missing required key 'scenario'");
  ScenarioConfig c = default_config(name);

  if (root["seeds"]) {
    std::vector<std::uint64_t> seeds;
    if (r.get(root, "", "seeds", seeds)) {
      if (seeds.empty()) r.add("seeds", "at least one seed required");
      c.seeds = seeds;
    }
  }
  r.get(root, "", "output_dir", c.output_dir);

  const auto g = root["grid"];
  if (!g) {
    r.add("grid", "missing required key");
  } else if (r.is_map(g, "grid")) {
    r.keys(g, "grid", {"n_x", "n_y", "pitch_m", "wavelength_m"});
    r.get(g, "grid", "n_x", c.grid.n_x, true);
    r.get(g, "grid", "n_y", c.grid.n_y);
    r.get(g, "grid", "pitch_m", c.grid.pitch, true);
    r.get(g, "grid", "wavelength_m", c.grid.wavelength, true);
  }

  if (const auto p = root["pump"]; r.is_map(p, "pump")) {
    r.keys(p, "pump", {"waist_m", "wavelength_m", "profile"});
    r.get(p, "pump", "waist_m", c.pump.waist);
    r.get(p, "pump", "wavelength_m", c.pump.wavelength);
    std::string prof;
    if (r.get(p, "pump", "profile", prof)) {
      if (prof == "gaussian")
        c.pump.profile = PumpProfile::Gaussian;
      else if (prof == "plane_wave")
        c.pump.profile = PumpProfile::PlaneWave;
      else
        r.add("pump.profile", "expected gaussian or plane_wave");
    }
  }

  if (const auto x = root["crystal"]; r.is_map(x, "crystal")) {
    r.keys(x, "crystal", {"length_m", "phase_matching", "magnification", "klyshko_reflector"});
    r.get(x, "crystal", "length_m", c.crystal_length_m);
    r.get(x, "crystal", "phase_matching", c.phase_matching);
    r.get(x, "crystal", "magnification", c.magnification);
    std::string refl;
    if (r.get(x, "crystal", "klyshko_reflector", refl)) {
      if (refl == "perfect_mirror")
        c.klyshko_mode = CrystalMode::PerfectMirror;
      else if (refl == "pump_masked_mirror")
        c.klyshko_mode = CrystalMode::PumpMaskedMirror;
      else
        r.add("crystal.klyshko_reflector", "expected perfect_mirror or pump_masked_mirror");
    }
  }

  if (const auto d = root["diffusers"]; r.is_map(d, "diffusers")) {
    c.diffusers.clear();
    for (const auto& kv : d) {
      const auto key = kv.first.as<std::string>();
      const std::string path = join("diffusers", key);
      if (!r.is_map(kv.second, path)) continue;
      r.keys(kv.second, path, {"kind", "divergence_rad", "phase_stdev_rad", "gap_m"});
      DiffuserPreset preset;
      std::string kind;
      if (r.get(kv.second, path, "kind", kind, true)) {
        if (kind == "thin")
          preset.kind = DiffuserPreset::Kind::Thin;
        else if (kind == "thick")
          preset.kind = DiffuserPreset::Kind::Thick;
        else
          r.add(join(path, "kind"), "expected thin or thick");
      }
      r.get(kv.second, path, "divergence_rad", preset.divergence_rad, true);
      r.get(kv.second, path, "phase_stdev_rad", preset.phase_stdev_rad);
      r.get(kv.second, path, "gap_m", preset.gap_m, preset.kind == DiffuserPreset::Kind::Thick);
      c.diffusers[key] = preset;
    }
  }

  if (const auto a = root["arms"]; r.is_map(a, "arms")) {
    r.keys(a, "arms", {"scan", "fixed"});
    if (a["scan"]) c.scan_arm = {read_elements(r, a["scan"], "arms.scan"), false};
    if (const auto f = a["fixed"]) {
      if (f.IsScalar() && f.as<std::string>() == "shared_with_scan")
        c.fixed_arm = {{}, true};
      else if (f.IsScalar())
        r.add("arms.fixed", "expected a list of elements or shared_with_scan");
      else
        c.fixed_arm = {read_elements(r, f, "arms.fixed"), false};
    }
  }

  if (const auto s = root["slm"]; r.is_map(s, "slm")) {
    r.keys(s, "slm", {"rows", "cols", "active", "pupil_radius_m", "pinhole", "tilt_inside_rad", "tilt_outside_rad"});
    r.get(s, "slm", "rows", c.slm.rows);
    r.get(s, "slm", "cols", c.slm.cols);
    r.get(s, "slm", "active", c.slm.active);
    r.get(s, "slm", "pupil_radius_m", c.slm.pupil_radius_m);
    r.get(s, "slm", "pinhole", c.slm.pinhole);
    r.get(s, "slm", "tilt_inside_rad", c.slm.tilt_inside_rad);
    r.get(s, "slm", "tilt_outside_rad", c.slm.tilt_outside_rad);
  }

  if (const auto d = root["detectors"]; r.is_map(d, "detectors")) {
    r.keys(d, "detectors", {"fixed", "target", "target_b"});
    if (d["fixed"]) read_pose(r, d["fixed"], "detectors.fixed", c.fixed);
    if (d["target"]) read_pose(r, d["target"], "detectors.target", c.target);
    if (d["target_b"]) read_pose(r, d["target_b"], "detectors.target_b", c.target_b);
  }

  if (const auto o = root["optimizer"]; r.is_map(o, "optimizer")) {
    r.keys(o, "optimizer", {"phase_steps", "passes", "feedback"});
    r.get(o, "optimizer", "phase_steps", c.optimizer.phase_steps);
    r.get(o, "optimizer", "passes", c.optimizer.passes);
    std::string fb;
    if (r.get(o, "optimizer", "feedback", fb)) {
      if (fb == "klyshko_power")
        c.feedback = Feedback::KlyshkoPower;
      else if (fb == "quantum_coincidence")
        c.feedback = Feedback::QuantumCoincidence;
      else
        r.add("optimizer.feedback", "expected klyshko_power or quantum_coincidence");
    }
  }

  if (const auto b = root["baseline"]; r.is_map(b, "baseline")) {
    r.keys(b, "baseline", {"window_half_count", "window_step_m", "random_patterns"});
    r.get(b, "baseline", "window_half_count", c.baseline.window_half_count);
    r.get(b, "baseline", "window_step_m", c.baseline.window_step_m);
    r.get(b, "baseline", "random_patterns", c.baseline.random_patterns);
  }

  if (const auto m = root["memory"]; r.is_map(m, "memory")) {
    r.keys(m, "memory", {"delta_max_rad", "points", "beacon_waist_m", "offaxis_shift_theta0"});
    r.get(m, "memory", "delta_max_rad", c.memory.delta_max_rad);
    r.get(m, "memory", "points", c.memory.points);
    r.get(m, "memory", "beacon_waist_m", c.memory.beacon_waist_m);
    r.get(m, "memory", "offaxis_shift_theta0", c.memory.offaxis_shift_theta0);
  }

  if (const auto t = root["two_spot"]; r.is_map(t, "two_spot")) {
    r.keys(t, "two_spot", {"alpha"});
    r.get(t, "two_spot", "alpha", c.two_spot_alpha);
  }

  if (const auto n = root["noise_study"]; r.is_map(n, "noise_study")) {
    r.keys(n, "noise_study", {"enabled", "integration_time_s", "coincidence_window_s", "quantum", "classical"});
    r.get(n, "noise_study", "enabled", c.noise_study.enabled);
    double t = c.noise_study.quantum.integration_time;
    double w = c.noise_study.quantum.coincidence_window;
    r.get(n, "noise_study", "integration_time_s", t);
    r.get(n, "noise_study", "coincidence_window_s", w);
    for (NoiseConfig* nc : {&c.noise_study.quantum, &c.noise_study.classical}) {
      nc->integration_time = t;
      nc->coincidence_window = w;
    }
    if (n["quantum"]) read_noise(r, n["quantum"], "noise_study.quantum", c.noise_study.quantum);
    if (n["classical"]) read_noise(r, n["classical"], "noise_study.classical", c.noise_study.classical);
  }

  if (const auto o = root["oracle"]; r.is_map(o, "oracle")) {
    r.keys(o, "oracle", {"correlation_length_m", "detector_waist_m", "map_n_x", "map_points"});
    r.get(o, "oracle", "correlation_length_m", c.oracle.correlation_length_m);
    r.get(o, "oracle", "detector_waist_m", c.oracle.detector_waist_m);
    r.get(o, "oracle", "map_n_x", c.oracle.map_n_x);
    r.get(o, "oracle", "map_points", c.oracle.map_points);
  }

  if (const auto s = root["speckle"]; r.is_map(s, "speckle")) {
    r.keys(s, "speckle", {"map_points", "map_step_m"});
    r.get(s, "speckle", "map_points", c.speckle.map_points);
    r.get(s, "speckle", "map_step_m", c.speckle.map_step_m);
  }
  return c;
}

/// Grid reached after an element list, without building masks.
GridSpec exit_spec_of(const ScenarioConfig& c, const std::vector<ElementSpec>& elements) {
  GridSpec s = c.grid;
  for (const auto& e : elements) {
    switch (e.kind) {
      case ElementSpec::Kind::Lens:
        s = propagate_spec(LensFourier{e.value}, s, Direction::Forward);
        break;
      case ElementSpec::Kind::Magnifier:
        s = propagate_spec(Magnifier{e.value}, s, Direction::Forward);
        break;
      default:
        break;
    }
  }
  return s;
}

void check_pose(const PoseConfig& p, const GridSpec& s, const std::string& path, std::vector<Finding>& out) {
  if (p.size_m < 0) out.push_back({path, "negative size"});
  const double hx = 0.5 * s.extent_x(), hy = 0.5 * s.extent_y();
  if (std::abs(p.center_x_m) > hx || (!s.is_1d() && std::abs(p.center_y_m) > hy))
    out.push_back({path, "pose lies outside its detector plane"});
}

void check_elements(const ScenarioConfig& c, const std::vector<ElementSpec>& elements, const std::string& path,
                    std::vector<Finding>& out) {
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto& e = elements[i];
    const std::string p = fmt::format("{}[{}]", path, i);
    if (e.kind == ElementSpec::Kind::Diffuser && !c.diffusers.count(e.preset))
      out.push_back({p, fmt::format("unresolved diffuser preset '{}'", e.preset)});
    if (e.kind == ElementSpec::Kind::Lens && !(e.value > 0)) out.push_back({p, "focal length must be positive"});
    if (e.kind == ElementSpec::Kind::FreeSpace && e.value < 0) out.push_back({p, "negative distance"});
    if (e.kind == ElementSpec::Kind::Magnifier && !(e.value > 0)) out.push_back({p, "ratio must be positive"});
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& yaml_text, std::vector<Finding>& findings) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("config parse error at line {}, column {}: {}", e.mark.line + 1, e.mark.column + 1, e.msg));
  }
  Reader r(findings);
  return parse_document(root, r);
}

void check_config(const ScenarioConfig& c, std::vector<Finding>& out) {
  const auto& g = c.grid;
  if (g.n_x <= 0 || g.n_x % 2 != 0) out.push_back({"grid.n_x", "must be positive and even"});
  if (g.n_y <= 0 || (g.n_y != 1 && g.n_y % 2 != 0)) out.push_back({"grid.n_y", "must be 1 or positive and even"});
  if (!(g.pitch > 0)) out.push_back({"grid.pitch_m", "must be positive"});
  if (!(g.wavelength > 0)) out.push_back({"grid.wavelength_m", "must be positive"});
  if (c.seeds.empty()) out.push_back({"seeds", "at least one seed required"});
  if (!(c.pump.waist > 0)) out.push_back({"pump.waist_m", "must be positive"});
  if (!(c.pump.wavelength > 0)) out.push_back({"pump.wavelength_m", "must be positive"});
  if (c.crystal_length_m < 0) out.push_back({"crystal.length_m", "must be non-negative"});
  if (!(c.magnification > 0)) out.push_back({"crystal.magnification", "must be positive"});
  const bool grid_ok = g.n_x > 0 && g.n_x % 2 == 0 && g.pitch > 0 && g.wavelength > 0;

  for (const auto& [name, d] : c.diffusers) {
    const std::string p = join("diffusers", name);
    if (!(d.divergence_rad > 0)) out.push_back({join(p, "divergence_rad"), "must be positive"});
    if (d.phase_stdev_rad <= 0) out.push_back({join(p, "phase_stdev_rad"), "must be positive"});
    if (d.kind == DiffuserPreset::Kind::Thick && !(d.gap_m > 0)) out.push_back({join(p, "gap_m"), "must be positive"});
    // the scattered envelope needs headroom below the largest grid angle
    if (grid_ok && d.divergence_rad > 0.5 * g.angular_nyquist())
      out.push_back({join(p, "divergence_rad"),
                     fmt::format("diffuser under-resolved: {:.4g} rad exceeds half the grid angular range {:.4g} rad",
                                 d.divergence_rad, g.angular_nyquist())});
  }
  check_elements(c, c.scan_arm.elements, "arms.scan", out);
  if (!c.fixed_arm.shared_with_scan) check_elements(c, c.fixed_arm.elements, "arms.fixed", out);

  const auto& s = c.slm;
  if (s.rows <= 0 || s.cols <= 0) out.push_back({"slm", "rows and cols must be positive"});
  if (s.active > s.rows * s.cols) out.push_back({"slm.active", "more active segments than cells"});
  if (!(s.pupil_radius_m > 0)) out.push_back({"slm.pupil_radius_m", "must be positive"});
  if (grid_ok && s.pupil_radius_m > 0.5 * g.extent_x()) out.push_back({"slm.pupil_radius_m", "pupil exceeds the grid"});
  if (s.pinhole && s.tilt_inside_rad == s.tilt_outside_rad)
    out.push_back({"slm", "pinhole tilts inside and outside must differ"});

  if (c.optimizer.phase_steps < 3) out.push_back({"optimizer.phase_steps", "at least 3 phases"});
  if (c.optimizer.passes < 1) out.push_back({"optimizer.passes", "at least one pass"});
  if (c.two_spot_alpha < 0) out.push_back({"two_spot.alpha", "must be non-negative"});
  if (c.memory.points < 4) out.push_back({"memory.points", "at least 4 points"});
  if (!(c.memory.delta_max_rad > 0)) out.push_back({"memory.delta_max_rad", "must be positive"});
  if (c.baseline.window_half_count < 0 || c.baseline.random_patterns < 0)
    out.push_back({"baseline", "counts must be non-negative"});

  if (grid_ok && out.empty()) {
    try {
      const auto scan_exit = exit_spec_of(c, c.scan_arm.elements);
      const auto fixed_exit = exit_spec_of(c, c.fixed_arm.shared_with_scan ? c.scan_arm.elements : c.fixed_arm.elements);
      check_pose(c.fixed, fixed_exit, "detectors.fixed", out);
      check_pose(c.target, scan_exit, "detectors.target", out);
      check_pose(c.target_b, scan_exit, "detectors.target_b", out);
    } catch (const Error& e) {
      out.push_back({"arms", e.what()});
    }
  }
}

std::vector<Finding> validate_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  std::vector<Finding> findings;
  const ScenarioConfig c = parse_config(ss.str(), findings);
  check_config(c, findings);
  return findings;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  std::vector<Finding> findings;
  ScenarioConfig c = parse_config(ss.str(), findings);
  check_config(c, findings);
  if (!findings.empty()) {
    std::string msg = "invalid config " + path + ":";
    for (const auto& f : findings) msg += "\n  " + f.path + ": " + f.message;
    throw ConfigError(msg);
  }
  return c;
}

namespace {

nlohmann::json pose_json(const PoseConfig& p) {
  return {{"kind", p.kind == FiberKind::SingleMode ? "smf" : "mmf"},
          {"center_x_m", p.center_x_m},
          {"center_y_m", p.center_y_m},
          {"size_m", p.size_m}};
}

nlohmann::json elements_json(const std::vector<ElementSpec>& els) {
  auto out = nlohmann::json::array();
  for (const auto& e : els) {
    switch (e.kind) {
      case ElementSpec::Kind::Diffuser: out.push_back({{"diffuser", e.preset}}); break;
      case ElementSpec::Kind::Lens: out.push_back({{"lens_focal_length_m", e.value}}); break;
      case ElementSpec::Kind::FreeSpace: out.push_back({{"free_space_m", e.value}}); break;
      case ElementSpec::Kind::Magnifier: out.push_back({{"magnifier_ratio", e.value}}); break;
    }
  }
  return out;
}

nlohmann::json noise_json(const NoiseConfig& n) {
  return {{"integration_time_s", n.integration_time}, {"coincidence_window_s", n.coincidence_window},
          {"brightness_hz", n.brightness},            {"singles_rate_1_hz", n.singles_rate_1},
          {"singles_rate_2_hz", n.singles_rate_2}};
}

}  // namespace

std::string canonical_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["seeds"] = c.seeds;
  j["grid"] = {{"n_x", c.grid.n_x}, {"n_y", c.grid.n_y}, {"pitch_m", c.grid.pitch}, {"wavelength_m", c.grid.wavelength}};
  j["pump"] = {{"waist_m", c.pump.waist},
               {"wavelength_m", c.pump.wavelength},
               {"profile", c.pump.profile == PumpProfile::Gaussian ? "gaussian" : "plane_wave"}};
  j["crystal"] = {{"length_m", c.crystal_length_m},
                  {"phase_matching", c.phase_matching},
                  {"magnification", c.magnification},
                  {"klyshko_reflector", c.klyshko_mode == CrystalMode::PumpMaskedMirror ? "pump_masked_mirror"
                                                                                        : "perfect_mirror"}};
  j["diffusers"] = nlohmann::json::object();
  for (const auto& [name, d] : c.diffusers)
    j["diffusers"][name] = {{"kind", d.kind == DiffuserPreset::Kind::Thick ? "thick" : "thin"},
                            {"divergence_rad", d.divergence_rad},
                            {"phase_stdev_rad", d.phase_stdev_rad},
                            {"gap_m", d.gap_m}};
  j["arms"]["scan"] = elements_json(c.scan_arm.elements);
  j["arms"]["fixed"] = c.fixed_arm.shared_with_scan ? nlohmann::json("shared_with_scan")
                                                    : elements_json(c.fixed_arm.elements);
  j["slm"] = {{"rows", c.slm.rows},
              {"cols", c.slm.cols},
              {"active", c.slm.active},
              {"pupil_radius_m", c.slm.pupil_radius_m},
              {"pinhole", c.slm.pinhole},
              {"tilt_inside_rad", c.slm.tilt_inside_rad},
              {"tilt_outside_rad", c.slm.tilt_outside_rad}};
  j["detectors"] = {{"fixed", pose_json(c.fixed)}, {"target", pose_json(c.target)}, {"target_b", pose_json(c.target_b)}};
  j["optimizer"] = {{"phase_steps", c.optimizer.phase_steps},
                    {"passes", c.optimizer.passes},
                    {"feedback", c.feedback == Feedback::KlyshkoPower ? "klyshko_power" : "quantum_coincidence"}};
  j["baseline"] = {{"window_half_count", c.baseline.window_half_count},
                   {"window_step_m", c.baseline.window_step_m},
                   {"random_patterns", c.baseline.random_patterns}};
  j["memory"] = {{"delta_max_rad", c.memory.delta_max_rad},
                 {"points", c.memory.points},
                 {"beacon_waist_m", c.memory.beacon_waist_m},
                 {"offaxis_shift_theta0", c.memory.offaxis_shift_theta0}};
  j["two_spot"] = {{"alpha", c.two_spot_alpha}};
  j["noise_study"] = {{"enabled", c.noise_study.enabled},
                      {"quantum", noise_json(c.noise_study.quantum)},
                      {"classical", noise_json(c.noise_study.classical)}};
  j["oracle"] = {{"correlation_length_m", c.oracle.correlation_length_m},
                 {"detector_waist_m", c.oracle.detector_waist_m},
                 {"map_n_x", c.oracle.map_n_x},
                 {"map_points", c.oracle.map_points}};
  j["speckle"] = {{"map_points", c.speckle.map_points}, {"map_step_m", c.speckle.map_step_m}};
  return j.dump();
}

std::string config_hash(const ScenarioConfig& c) {
  const std::string text = canonical_json(c);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace awp
