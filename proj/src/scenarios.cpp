#include "awp/scenarios.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "awp/diffusers.hpp"
#include "awp/errors.hpp"
#include "awp/field_io.hpp"
#include "awp/parallel.hpp"
#include "awp/rng.hpp"

namespace awp {

const char* version_string() { return "awp 0.1.0"; }

namespace {

/// Calibration is deterministic, so its result is shared across seeds.
double calibrated_length(const GridSpec& g, double divergence, double stdev) {
  using Key = std::tuple<int, int, double, double, double, double>;
  static std::mutex mu;
  static std::map<Key, double> cache;
  const Key key{g.n_x, g.n_y, g.pitch, g.wavelength, divergence, stdev};
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double l = calibrate_divergence(g, divergence, stdev);
  std::lock_guard<std::mutex> lock(mu);
  cache[key] = l;
  return l;
}

struct BuiltArm {
  OpticalArm arm;
  double focal_length = 0.0;  ///< last lens, 0 without one
};

BuiltArm build_arm(const ScenarioConfig& cfg, const GridSpec& entry, const std::vector<ElementSpec>& specs,
                   std::uint64_t seed, std::uint64_t& screen_index, bool diffusers) {
  std::vector<Element> els;
  GridSpec at = entry;
  double focal = 0.0;
  auto push = [&](Element e) {
    at = propagate_spec(e, at, Direction::Forward);
    els.push_back(std::move(e));
  };
  for (const auto& s : specs) {
    switch (s.kind) {
      case ElementSpec::Kind::Lens:
        push(LensFourier{s.value});
        focal = s.value;
        break;
      case ElementSpec::Kind::FreeSpace: push(FreeSpace{s.value}); break;
      case ElementSpec::Kind::Magnifier: push(Magnifier{s.value}); break;
      case ElementSpec::Kind::Diffuser: {
        const auto it = cfg.diffusers.find(s.preset);
        if (it == cfg.diffusers.end()) throw ConfigError("unresolved diffuser preset '" + s.preset + "'");
        const auto& d = it->second;
        const double l = calibrated_length(at, d.divergence_rad, d.phase_stdev_rad);
        if (d.kind == DiffuserPreset::Kind::Thin) {
          const ScreenParams p{l, d.phase_stdev_rad, screen_seed(seed, screen_index++)};
          if (diffusers) push(make_phase_screen(at, p));
        } else {
          const ThickDiffuser td{ScreenParams{l, d.phase_stdev_rad, screen_seed(seed, screen_index)},
                                 ScreenParams{l, d.phase_stdev_rad, screen_seed(seed, screen_index + 1)}, d.gap_m};
          screen_index += 2;
          if (diffusers) {
            for (auto& e : thick_diffuser_elements(td, at)) push(std::move(e));
          } else {
            push(FreeSpace{d.gap_m});
          }
        }
        break;
      }
    }
  }
  return {OpticalArm(entry, std::move(els)), focal};
}

CrystalKernel source_kernel(const ScenarioConfig& cfg) {
  CrystalKernel k;
  k.pump = cfg.pump;
  k.crystal_length = cfg.crystal_length_m;
  k.phase_matching = cfg.phase_matching;
  k.mode = CrystalMode::TwoPhotonSource;
  k.magnification = cfg.magnification;
  return k;
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

Setup build_setup(const ScenarioConfig& cfg, std::uint64_t seed, bool diffusers) {
  const GridSpec g = make_grid(cfg.grid.n_x, cfg.grid.n_y, cfg.grid.pitch, cfg.grid.wavelength);
  Setup s;
  auto& sys = s.system;
  sys.slm_plane = g;
  std::uint64_t screen_index = 0;
  const BuiltArm scan = build_arm(cfg, g, cfg.scan_arm.elements, seed, screen_index, diffusers);
  sys.scan_tail = scan.arm;
  sys.scan_focal_length = scan.focal_length;
  if (cfg.fixed_arm.shared_with_scan) {
    sys.fixed_tail = scan.arm;
    sys.fixed_focal_length = scan.focal_length;
  } else {
    const BuiltArm fixed = build_arm(cfg, g, cfg.fixed_arm.elements, seed, screen_index, diffusers);
    sys.fixed_tail = fixed.arm;
    sys.fixed_focal_length = fixed.focal_length;
  }
  sys.fixed_pose = cfg.fixed.pose();
  sys.source_crystal = source_kernel(cfg);
  if (cfg.klyshko_mode == CrystalMode::PumpMaskedMirror) {
    sys.klyshko_crystal = sys.source_crystal;
    sys.klyshko_crystal.mode = CrystalMode::PumpMaskedMirror;
  } else {
    sys.klyshko_crystal = perfect_mirror();
  }
  const SlmLayout layout = make_layout(cfg.slm.rows, cfg.slm.cols, cfg.slm.pupil_radius_m, cfg.slm.active);
  const double k = g.wavenumber();
  s.initial = cfg.slm.pinhole ? make_pattern(layout, true, k * cfg.slm.tilt_inside_rad, k * cfg.slm.tilt_outside_rad)
                              : make_pattern(layout);
  s.target = cfg.target.pose();
  s.target_b = cfg.target_b.pose();
  return s;
}

Setup build_beacon_setup(const ScenarioConfig& cfg, const Setup& setup) {
  Setup b = setup;
  auto& sys = b.system;
  sys.fixed_tail = OpticalArm(sys.slm_plane, {});
  sys.slm_in_fixed_arm = false;
  sys.fixed_pose = DetectorPose::smf(0.0, cfg.memory.beacon_waist_m);
  sys.klyshko_crystal = perfect_mirror();
  sys.fixed_focal_length = 0.0;
  b.target.center_x = sys.scan_focal_length * (cfg.slm.pinhole ? cfg.slm.tilt_inside_rad : 0.0);
  return b;
}

double speckle_baseline(const ShapingSystem& sys, Feedback feedback, const SlmPattern& initial,
                        const DetectorPose& target, const BaselineConfig& cfg, std::uint64_t seed) {
  Rng rng = make_stream(seed, 99);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<SlmPattern> patterns{initial};
  for (int r = 0; r < cfg.random_patterns; ++r) {
    SlmPattern p = initial;
    for (auto& ph : p.phases) ph = u(rng);
    patterns.push_back(std::move(p));
  }
  std::vector<double> sums(patterns.size());
  parallel_for(patterns.size(), [&](std::size_t i) {
    const SampledField f = feedback == Feedback::KlyshkoPower ? advanced_field(sys, patterns[i])
                                                              : heralded_field(sys, patterns[i]);
    double acc = 0.0;
    for (int d = -cfg.window_half_count; d <= cfg.window_half_count; ++d)
      acc += detector_power(f, target.moved(d * cfg.window_step_m));
    sums[i] = acc;
  });
  const double n = static_cast<double>(patterns.size()) * (2 * cfg.window_half_count + 1);
  return std::accumulate(sums.begin(), sums.end(), 0.0) / n;
}

OptimizeResult run_optimize(const ScenarioConfig& cfg, std::uint64_t seed) {
  const Setup s = build_setup(cfg, seed);
  const auto& sys = s.system;
  const double bc = speckle_baseline(sys, Feedback::KlyshkoPower, s.initial, s.target, cfg.baseline, seed);
  const double bq = speckle_baseline(sys, Feedback::QuantumCoincidence, s.initial, s.target, cfg.baseline, seed);
  OptimizeResult r;
  r.seed = seed;
  r.trace = sequential_optimize(sys, CostConfig{SingleSpot{s.target}, cfg.feedback, std::nullopt}, s.initial,
                                cfg.optimizer.phase_steps, cfg.optimizer.passes);
  const double ic = spot_signal(sys, Feedback::KlyshkoPower, r.trace.final_pattern, s.target);
  const double iq = spot_signal(sys, Feedback::QuantumCoincidence, r.trace.final_pattern, s.target);
  r.classical_enhancement = enhancement(ic, bc);
  r.quantum_enhancement = enhancement(iq, bq);
  const Setup clear = build_setup(cfg, seed, false);
  r.classical_efficiency = efficiency(ic, spot_signal(clear.system, Feedback::KlyshkoPower, clear.initial, s.target));
  r.quantum_efficiency =
      efficiency(iq, spot_signal(clear.system, Feedback::QuantumCoincidence, clear.initial, s.target));
  return r;
}

NoiseResult run_noise_comparison(const ScenarioConfig& cfg, std::uint64_t seed) {
  const Setup s = build_setup(cfg, seed);
  const auto& sys = s.system;
  NoiseConfig nq = cfg.noise_study.quantum;
  NoiseConfig nc = cfg.noise_study.classical;
  nq.seed = mix64(seed) ^ 0x71;
  nc.seed = mix64(seed) ^ 0xc1;
  const auto trc = sequential_optimize(sys, CostConfig{SingleSpot{s.target}, Feedback::KlyshkoPower, nc}, s.initial,
                                       cfg.optimizer.phase_steps, cfg.optimizer.passes);
  const auto trq = sequential_optimize(sys, CostConfig{SingleSpot{s.target}, Feedback::QuantumCoincidence, nq},
                                       s.initial, cfg.optimizer.phase_steps, cfg.optimizer.passes);
  NoiseResult r;
  r.seed = seed;
  r.classical_feedback_enhancement =
      enhancement(spot_signal(sys, Feedback::KlyshkoPower, trc.final_pattern, s.target),
                  speckle_baseline(sys, Feedback::KlyshkoPower, s.initial, s.target, cfg.baseline, seed));
  r.quantum_feedback_enhancement =
      enhancement(spot_signal(sys, Feedback::QuantumCoincidence, trq.final_pattern, s.target),
                  speckle_baseline(sys, Feedback::QuantumCoincidence, s.initial, s.target, cfg.baseline, seed));
  return r;
}

MemoryResult run_memory(const ScenarioConfig& cfg, std::uint64_t seed) {
  const Setup s = build_setup(cfg, seed);
  const auto& sys = s.system;
  MemoryResult r;
  r.seed = seed;
  std::vector<double> dts;
  for (int i = 1; i <= cfg.memory.points; ++i) dts.push_back(cfg.memory.delta_max_rad * i / cfg.memory.points);

  const auto tr = sequential_optimize(sys, CostConfig{SingleSpot{s.target}, cfg.feedback, std::nullopt}, s.initial,
                                      cfg.optimizer.phase_steps, cfg.optimizer.passes);
  r.classical = memory_scan(sys, tr.final_pattern, s.target, dts, ScanConfiguration::Classical);
  r.quantum = memory_scan(sys, tr.final_pattern, s.target, dts, ScanConfiguration::Quantum);
  r.classical_fit = fit_memory(r.classical);
  r.quantum_fit = fit_memory(r.quantum);

  const Setup b = build_beacon_setup(cfg, s);
  const auto trb = sequential_optimize(b.system, CostConfig{SingleSpot{b.target}, Feedback::KlyshkoPower, std::nullopt}, b.initial,
                                       cfg.optimizer.phase_steps, cfg.optimizer.passes);
  r.copropagating = memory_scan(b.system, trb.final_pattern, b.target, dts, ScanConfiguration::CoPropagating);
  r.copropagating_fit = fit_memory(r.copropagating);

  // off-axis: move the pair past the memory range, then re-optimize there
  r.shift_rad = cfg.memory.offaxis_shift_theta0 * r.quantum_fit.theta0;
  r.peak_coincidence = spot_signal(sys, Feedback::QuantumCoincidence, tr.final_pattern, s.target);
  ShapingSystem moved = sys;
  moved.fixed_pose = sys.fixed_pose.moved(sys.fixed_focal_length * r.shift_rad);
  const DetectorPose t2 = s.target.moved(-sys.scan_focal_length * r.shift_rad);
  r.shifted_coincidence = spot_signal(moved, Feedback::QuantumCoincidence, tr.final_pattern, t2);
  const auto tr2 = sequential_optimize(moved, CostConfig{SingleSpot{t2}, cfg.feedback, std::nullopt}, s.initial,
                                       cfg.optimizer.phase_steps, cfg.optimizer.passes);
  r.reoptimized_coincidence = spot_signal(moved, Feedback::QuantumCoincidence, tr2.final_pattern, t2);
  return r;
}

TwoSpotResult run_two_spot(const ScenarioConfig& cfg, std::uint64_t seed) {
  const Setup s = build_setup(cfg, seed);
  const auto& sys = s.system;
  DetectorPose mid = s.target;
  mid.center_x = 0.5 * (s.target.center_x + s.target_b.center_x);
  mid.center_y = 0.5 * (s.target.center_y + s.target_b.center_y);
  const double base = speckle_baseline(sys, cfg.feedback, s.initial, mid, cfg.baseline, seed);
  TwoSpotResult r;
  r.seed = seed;
  r.trace = sequential_optimize(sys, CostConfig{TwoSpot{s.target, s.target_b, cfg.two_spot_alpha}, cfg.feedback, std::nullopt},
                                s.initial, cfg.optimizer.phase_steps, cfg.optimizer.passes);
  const double a = spot_signal(sys, cfg.feedback, r.trace.final_pattern, s.target);
  const double b = spot_signal(sys, cfg.feedback, r.trace.final_pattern, s.target_b);
  r.enhancement_a = enhancement(a, base);
  r.enhancement_b = enhancement(b, base);
  r.relative_difference = std::abs(a - b) / std::max(a, b);
  return r;
}

DeviationResult run_deviations(const ScenarioConfig& cfg) {
  const Setup s = build_setup(cfg, cfg.seeds.front());
  const auto& sys = s.system;
  KlyshkoScene scene;
  scene.source_mode = detector_mode(sys.fixed_tail.exit_spec(), sys.fixed_pose);
  scene.arm_back = sys.fixed_tail;
  scene.arm_fwd = sys.scan_tail;
  scene.crystal = perfect_mirror();
  DeviationResult r;
  r.mirror_field = klyshko_field(scene);
  scene.crystal = sys.source_crystal;
  scene.crystal.mode = CrystalMode::PumpMaskedMirror;
  r.masked_field = klyshko_field(scene);
  r.mirror_width = rms_width_x(r.mirror_field);
  r.masked_width = rms_width_x(r.masked_field);
  r.source_width_at_crystal = rms_width_x(arm_apply(sys.fixed_tail, scene.source_mode.conj(), Direction::Backward));
  SampledField pump(sys.slm_plane);
  for (int j = 0; j < pump.spec().n_y; ++j)
    for (int i = 0; i < pump.spec().n_x; ++i)
      pump(i, j) = pump_amplitude(sys.source_crystal, pump.spec().x(i), pump.spec().y(j));
  r.pump_width = rms_width_x(pump);
  return r;
}

OracleResult run_oracle(const ScenarioConfig& cfg) {
  const CrystalKernel k = source_kernel(cfg);
  const double l = cfg.oracle.correlation_length_m;
  const double w = cfg.oracle.detector_waist_m;
  auto arms = [&](const GridSpec& g, std::uint64_t seed) {
    auto scr = [&](std::uint64_t i) { return make_phase_screen(g, ScreenParams{l, kStrongPhaseStdev, screen_seed(seed, i)}); };
    OpticalArm a1(g, {scr(0), FreeSpace{0.01}, scr(1), LensFourier{0.1}});
    OpticalArm a2(g, {scr(2), LensFourier{0.1}});
    return std::pair{a1, a2};
  };
  OracleResult r;
  const GridSpec g = make_grid(cfg.grid.n_x, 1, cfg.grid.pitch, cfg.grid.wavelength);
  for (std::size_t n = 0; n < cfg.seeds.size(); ++n) {
    const std::uint64_t seed = cfg.seeds[n];
    const auto [a1, a2] = arms(g, seed);
    // every other scene heralds with a tilted, hence complex, mode
    const auto m1 = gaussian_mode(a1.exit_spec(), w, 40e-6 * static_cast<double>(n % 5), 0.0);
    const auto m2 = gaussian_mode(a2.exit_spec(), w, -30e-6, n % 2 ? 2e-3 : 0.0);
    OracleScene sc;
    sc.seed = seed;
    sc.fast = coincidence_amplitude(k, a1, a2, m1, m2);
    sc.brute = brute_force_coincidence(k, a1, a2, m1, m2);
    sc.relative_error = std::abs(std::norm(sc.fast) - std::norm(sc.brute)) / std::norm(sc.brute);
    r.max_relative_error = std::max(r.max_relative_error, sc.relative_error);
    r.scenes.push_back(sc);
  }

  const GridSpec gm = make_grid(cfg.oracle.map_n_x, 1, cfg.grid.pitch, cfg.grid.wavelength);
  const auto [a1, a2] = arms(gm, cfg.seeds.front());
  const GridSpec out = a1.exit_spec();
  const DetectorPose det2 = DetectorPose::smf(0.0, w);
  std::vector<DetectorPose> poses;
  const int np = cfg.oracle.map_points;
  const double span = 0.4 * out.extent_x();
  for (int i = 0; i < np; ++i) {
    const double x = np > 1 ? -span + 2 * span * i / (np - 1) : 0.0;
    poses.push_back(DetectorPose::smf(x, w));
    r.map_x.push_back(x);
  }
  KlyshkoScene scene;
  scene.source_mode = detector_mode(a2.exit_spec(), det2);
  scene.arm_back = a2;
  scene.arm_fwd = a1;
  scene.crystal = k;
  scene.crystal.mode = CrystalMode::PumpMaskedMirror;
  scene.readout = ScanningFiberReadout{poses};
  r.klyshko_map = klyshko_power(scene);
  r.coincidence_map = coincidence_map(k, a1, a2, poses, det2, 1.0);
  double kq = 0.0, kk = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    kq += r.klyshko_map[i] * r.coincidence_map[i];
    kk += r.klyshko_map[i] * r.klyshko_map[i];
  }
  const double c = kq / kk;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const double q = r.coincidence_map[i];
    r.map_relative_error = std::max(r.map_relative_error, std::abs(q - c * r.klyshko_map[i]) / q);
  }
  return r;
}

SpeckleResult run_speckle(const ScenarioConfig& cfg) {
  const Setup s = build_setup(cfg, cfg.seeds.front());
  const auto& sys = s.system;
  SpeckleResult r;
  r.klyshko = advanced_field(sys, s.initial);
  r.heralded = heralded_field(sys, s.initial);
  const GridSpec out = r.klyshko.spec();
  const int np = cfg.speckle.map_points;
  const double step = cfg.speckle.map_step_m > 0 ? cfg.speckle.map_step_m : 4.0 * out.pitch;
  std::vector<DetectorPose> poses;
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      const double x = (i - np / 2) * step;
      const double y = out.is_1d() ? 0.0 : (j - np / 2) * step;
      poses.push_back(s.target.moved(x - s.target.center_x, y - s.target.center_y));
      r.pose_x.push_back(x);
      r.pose_y.push_back(y);
    }
    if (out.is_1d()) break;
  }
  r.klyshko_map.resize(poses.size());
  r.coincidence_map.resize(poses.size());
  parallel_for(poses.size(), [&](std::size_t i) {
    r.klyshko_map[i] = detector_power(r.klyshko, poses[i]);
    r.coincidence_map[i] = detector_power(r.heralded, poses[i]);
  });
  const double n = static_cast<double>(poses.size());
  const double ma = std::accumulate(r.klyshko_map.begin(), r.klyshko_map.end(), 0.0) / n;
  const double mb = std::accumulate(r.coincidence_map.begin(), r.coincidence_map.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const double a = r.klyshko_map[i] - ma, b = r.coincidence_map[i] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  r.map_correlation = saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
  double v = 0.0;
  for (double x : r.klyshko_map) v += (x - ma) * (x - ma);
  r.contrast = ma > 0 ? std::sqrt(v / n) / ma : 0.0;
  return r;
}

namespace {

class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (dir_ / name).string());
    return os;
  }
  void field(const std::string& stem, const SampledField& f) {
    save_field((dir_ / (stem + ".awp")).string(), f);
    save_field_pgm((dir_ / (stem + ".pgm")).string(), f);
    files_.push_back(stem + ".awp");
    files_.push_back(stem + ".pgm");
  }
  void pgm(const std::string& name, const std::vector<double>& v, int w, int h) {
    save_pgm((dir_ / name).string(), v, w, h);
    files_.push_back(name);
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

void check_finite(RunManifest& m, const std::string& what, double v) {
  if (!std::isfinite(v)) {
    m.assertions_passed = false;
    m.failures.push_back(what + " is not finite");
  }
}

void write_trace_and_pattern(Artifacts& art, const OptimizationTrace& t, std::uint64_t seed) {
  auto os = art.open(fmt::format("trace_seed{}.csv", seed));
  write_trace_csv(os, t);
  auto ps = art.open(fmt::format("pattern_seed{}.txt", seed));
  save_pattern(ps, t.final_pattern);
}

void scenario_optimize(const ScenarioConfig& cfg, Artifacts& art, RunManifest& m) {
  std::vector<OptimizeResult> results;
  for (auto seed : cfg.seeds) {
    results.push_back(run_optimize(cfg, seed));
    write_trace_and_pattern(art, results.back().trace, seed);
  }
  auto os = art.open("summary.csv");
  os << "seed,classical_enhancement,quantum_enhancement,classical_efficiency,quantum_efficiency\n";
  for (const auto& r : results) {
    os << r.seed << "," << g17(r.classical_enhancement) << "," << g17(r.quantum_enhancement) << ","
       << g17(r.classical_efficiency) << "," << g17(r.quantum_efficiency) << "\n";
    check_finite(m, "enhancement", r.classical_enhancement + r.quantum_enhancement);
  }
  const Setup s = build_setup(cfg, cfg.seeds.front());
  const auto before = advanced_field(s.system, s.initial);
  art.field("klyshko_before", before);
  art.field("klyshko_after", advanced_field(s.system, results.front().trace.final_pattern));

  if (cfg.noise_study.enabled) {
    auto ns = art.open("noise.csv");
    ns << "seed,classical_feedback_enhancement,quantum_feedback_enhancement\n";
    for (auto seed : cfg.seeds) {
      const auto r = run_noise_comparison(cfg, seed);
      ns << r.seed << "," << g17(r.classical_feedback_enhancement) << "," << g17(r.quantum_feedback_enhancement)
         << "\n";
    }
  }
}

void scenario_memory(const ScenarioConfig& cfg, Artifacts& art, RunManifest& m) {
  auto fits = art.open("fits.csv");
  fits << "seed,configuration,theta0_rad,theta0_uncertainty_rad,residual_rms\n";
  auto off = art.open("offaxis.csv");
  off << "seed,shift_rad,peak,shifted,reoptimized\n";
  for (auto seed : cfg.seeds) {
    const auto r = run_memory(cfg, seed);
    const std::array<std::pair<const MemoryScan*, const MemoryFit*>, 3> items{
        {{&r.classical, &r.classical_fit}, {&r.quantum, &r.quantum_fit}, {&r.copropagating, &r.copropagating_fit}}};
    for (const auto& [scan, fit] : items) {
      const std::string name = to_string(scan->configuration);
      auto os = art.open(fmt::format("scan_{}_seed{}.csv", name, seed));
      write_scan_csv(os, *scan);
      auto fj = art.open(fmt::format("fit_{}_seed{}.json", name, seed));
      write_fit_record(fj, *fit, scan->configuration);
      fits << seed << "," << name << "," << g17(fit->theta0) << "," << g17(fit->theta0_uncertainty) << ","
           << g17(fit->residual_rms) << "\n";
      check_finite(m, "theta0", fit->theta0);
    }
    off << seed << "," << g17(r.shift_rad) << "," << g17(r.peak_coincidence) << "," << g17(r.shifted_coincidence)
        << "," << g17(r.reoptimized_coincidence) << "\n";
  }
}

void scenario_two_spot(const ScenarioConfig& cfg, Artifacts& art, RunManifest& m) {
  auto os = art.open("summary.csv");
  os << "seed,enhancement_a,enhancement_b,relative_difference\n";
  for (auto seed : cfg.seeds) {
    const auto r = run_two_spot(cfg, seed);
    write_trace_and_pattern(art, r.trace, seed);
    os << seed << "," << g17(r.enhancement_a) << "," << g17(r.enhancement_b) << "," << g17(r.relative_difference)
       << "\n";
    check_finite(m, "two-spot enhancement", r.enhancement_a + r.enhancement_b);
    if (seed == cfg.seeds.front()) {
      const Setup s = build_setup(cfg, seed);
      art.field("klyshko_after", advanced_field(s.system, r.trace.final_pattern));
    }
  }
}

void scenario_deviations(const ScenarioConfig& cfg, Artifacts& art, RunManifest& m) {
  const auto r = run_deviations(cfg);
  auto os = art.open("widths.csv");
  os << "quantity,rms_width_m\n";
  os << "source_at_crystal," << g17(r.source_width_at_crystal) << "\n";
  os << "pump," << g17(r.pump_width) << "\n";
  os << "perfect_mirror," << g17(r.mirror_width) << "\n";
  os << "pump_masked_mirror," << g17(r.masked_width) << "\n";
  art.field("perfect_mirror", r.mirror_field);
  art.field("pump_masked_mirror", r.masked_field);
  check_finite(m, "width", r.mirror_width + r.masked_width);
}

void scenario_oracle(const ScenarioConfig& cfg, Artifacts& art, RunManifest& m) {
  const auto r = run_oracle(cfg);
  auto os = art.open("oracle.csv");
  os << "seed,fast_re,fast_im,brute_re,brute_im,relative_error\n";
  for (const auto& s : r.scenes)
    os << s.seed << "," << g17(s.fast.real()) << "," << g17(s.fast.imag()) << "," << g17(s.brute.real()) << ","
       << g17(s.brute.imag()) << "," << g17(s.relative_error) << "\n";
  auto ms = art.open("map.csv");
  ms << "pose_x,pose_y,rate,klyshko_power\n";
  for (std::size_t i = 0; i < r.map_x.size(); ++i)
    ms << g17(r.map_x[i]) << ",0," << g17(r.coincidence_map[i]) << "," << g17(r.klyshko_map[i]) << "\n";
  art.pgm("map.pgm", r.coincidence_map, static_cast<int>(r.coincidence_map.size()), 1);
  auto rep = art.open("report.json");
  rep << nlohmann::json{{"max_relative_error", r.max_relative_error},
                        {"map_relative_error", r.map_relative_error},
                        {"scenes", r.scenes.size()}}
             .dump(2)
      << "\n";
  if (!(r.max_relative_error < 1e-6)) {
    m.assertions_passed = false;
    m.failures.push_back(fmt::format("oracle relative error {:.3g} >= 1e-6", r.max_relative_error));
  }
  if (!(r.map_relative_error < 1e-6)) {
    m.assertions_passed = false;
    m.failures.push_back(fmt::format("map proportionality error {:.3g} >= 1e-6", r.map_relative_error));
  }
}

void scenario_speckle(const ScenarioConfig& cfg, Artifacts& art, RunManifest& m) {
  const auto r = run_speckle(cfg);
  art.field("klyshko", r.klyshko);
  art.field("heralded", r.heralded);
  for (const auto& [name, values] : {std::pair{"coincidence_map", &r.coincidence_map},
                                     std::pair{"klyshko_map", &r.klyshko_map}}) {
    auto os = art.open(std::string(name) + ".csv");
    os << "pose_x,pose_y,rate\n";
    for (std::size_t i = 0; i < values->size(); ++i)
      os << g17(r.pose_x[i]) << "," << g17(r.pose_y[i]) << "," << g17((*values)[i]) << "\n";
    const int w = cfg.speckle.map_points;
    art.pgm(std::string(name) + ".pgm", *values, w, static_cast<int>(values->size()) / w);
  }
  auto os = art.open("summary.json");
  os << nlohmann::json{{"map_correlation", r.map_correlation}, {"klyshko_map_contrast", r.contrast}}.dump(2) << "\n";
  check_finite(m, "map correlation", r.map_correlation);
}

}  // namespace

RunManifest run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest m;
  m.scenario = cfg.scenario;
  m.config_hash = config_hash(cfg);
  m.seeds = cfg.seeds;
  m.version = version_string();
  Artifacts art(out_dir);
  {
    auto os = art.open("config.json");
    os << nlohmann::json::parse(canonical_json(cfg)).dump(2) << "\n";
  }
  try {
    if (cfg.scenario == "fig3_optimize")
      scenario_optimize(cfg, art, m);
    else if (cfg.scenario == "fig4_memory")
      scenario_memory(cfg, art, m);
    else if (cfg.scenario == "fig5_two_spots")
      scenario_two_spot(cfg, art, m);
    else if (cfg.scenario == "supp_deviations")
      scenario_deviations(cfg, art, m);
    else if (cfg.scenario == "equivalence_oracle")
      scenario_oracle(cfg, art, m);
    else if (cfg.scenario == "fig2_speckle")
      scenario_speckle(cfg, art, m);
    else
      throw ConfigError("unknown scenario '" + cfg.scenario + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    m.assertions_passed = false;
    m.failures.push_back(e.what());
  }
  m.artifacts = art.files();
  m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json j{{"scenario", m.scenario},   {"config_hash", m.config_hash},
                   {"seeds", m.seeds},         {"artifacts", m.artifacts},
                   {"wall_clock_s", m.wall_clock_s}, {"version", m.version},
                   {"threads", thread_count()}, {"assertions_passed", m.assertions_passed},
                   {"failures", m.failures}};
  std::ofstream os(std::filesystem::path(out_dir) / "manifest.json");
  os << j.dump(2) << "\n";
  return m;
}

}  // namespace awp
