// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include "awp/config.hpp"
#include "awp/diffusers.hpp"
#include "awp/klyshko.hpp"
#include "awp/memory.hpp"
#include "awp/parallel.hpp"
#include "awp/rng.hpp"
#include "awp/scenarios.hpp"
#include "awp/spdc.hpp"

using namespace awp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::uint64_t> seeds(int n) {
  std::vector<std::uint64_t> s;
  for (int i = 0; i < n; ++i) s.push_back(static_cast<std::uint64_t>(i));
  return s;
}

Outcome oracle_equivalence() {
  const auto r = run_oracle(default_config("equivalence_oracle"));
  return {r.scenes.size() == 20 && r.max_relative_error < 1e-6,
          fmt::format("{} scenes, max relative error {:.3g} (< 1e-6)", r.scenes.size(), r.max_relative_error)};
}

Outcome map_proportionality() {
  auto cfg = default_config("equivalence_oracle");
  cfg.seeds = {0};
  const auto r = run_oracle(cfg);

  // Same comparison against the brute-force double sum on a grid it accepts.
  const auto g = make_grid(256, 1, 20e-6, 810e-9);
  auto scr = [&](std::uint64_t i) { return make_phase_screen(g, ScreenParams{100e-6, kStrongPhaseStdev, screen_seed(31, i)}); };
  const OpticalArm a1(g, {scr(0), FreeSpace{0.01}, scr(1), LensFourier{0.1}});
  const OpticalArm a2(g, {scr(2), LensFourier{0.1}});
  CrystalKernel k;
  k.pump.waist = 600e-6;
  const auto det2 = DetectorPose::smf(-40e-6, 80e-6);
  std::vector<DetectorPose> poses;
  for (int i = -20; i <= 20; ++i) poses.push_back(DetectorPose::smf(i * 50e-6, 80e-6));
  KlyshkoScene scene{detector_mode(a2.exit_spec(), det2), a2, a1, k, ScanningFiberReadout{poses}};
  scene.crystal.mode = CrystalMode::PumpMaskedMirror;
  const auto kly = klyshko_power(scene);
  std::vector<double> brute;
  for (const auto& p : poses)
    brute.push_back(std::norm(brute_force_coincidence(k, a1, a2, detector_mode(a1.exit_spec(), p), scene.source_mode)));
  double kq = 0.0, kk = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    kq += kly[i] * brute[i];
    kk += kly[i] * kly[i];
  }
  for (std::size_t i = 0; i < poses.size(); ++i) worst = std::max(worst, std::abs(brute[i] - kq / kk * kly[i]) / brute[i]);

  return {r.map_relative_error < 1e-6 && worst < 1e-6,
          fmt::format("max pointwise relative error {:.3g} against the fast map ({} poses), {:.3g} against the "
                      "brute-force sum ({} poses) (< 1e-6)",
                      r.map_relative_error, r.map_x.size(), worst, poses.size())};
}

Outcome anticorrelation() {
  const auto g = make_grid(512, 1, 10e-6, 810e-9);
  const double f = 0.1;
  const OpticalArm arm(g, {LensFourier{f}});
  const auto out = arm.exit_spec();
  CrystalKernel k;
  k.pump.profile = PumpProfile::PlaneWave;
  double worst = 0.0;
  for (double theta : {-3e-3, 1e-3, 2.5e-3}) {
    const auto det2 = DetectorPose::smf(f * theta, 40e-6);
    std::vector<DetectorPose> scan;
    std::vector<double> xs;
    for (int i = 0; i < out.n_x; ++i) {
      if (std::abs(out.x(i)) > 0.4 * out.extent_x()) continue;
      scan.push_back(DetectorPose::smf(out.x(i), 40e-6));
      xs.push_back(out.x(i));
    }
    const auto map = coincidence_map(k, arm, arm, scan, det2, 1.0);
    const auto peak = static_cast<std::size_t>(std::max_element(map.begin(), map.end()) - map.begin());
    worst = std::max(worst, std::abs(xs[peak] / f + theta) / (out.pitch / f));
  }
  return {worst <= 1.0, fmt::format("worst |theta1 + theta2| = {:.3g} pixels (<= 1)", worst)};
}

Outcome speckle_statistics() {
  const auto g = make_grid(1024, 1, 8e-6, 810e-9);
  constexpr int kSeeds = 200;
  constexpr int kHalfWindow = 16;  // far-field pixels each side of the axis
  std::vector<double> samples;
  for (int s = 0; s < kSeeds; ++s) {
    const OpticalArm arm(g, {make_phase_screen(g, ScreenParams{32e-6, kStrongPhaseStdev, screen_seed(7000, s)}),
                             LensFourier{0.1}});
    SampledField plane(g);
    for (auto& v : plane.data()) v = 1.0;
    const auto I = arm_apply(arm, plane, Direction::Forward).intensity();
    for (int d = 1; d <= kHalfWindow; ++d) {
      samples.push_back(I[static_cast<std::size_t>(g.n_x / 2 + d)]);
      samples.push_back(I[static_cast<std::size_t>(g.n_x / 2 - d)]);
    }
  }
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double& v : samples) {
    v /= mean;
    var += (v - 1.0) * (v - 1.0);
  }
  const double contrast = std::sqrt(var / static_cast<double>(samples.size() - 1));

  // equal-probability bins of the unit exponential
  constexpr int kBins = 20;
  std::vector<double> counts(kBins, 0.0);
  for (double v : samples) {
    const int b = static_cast<int>(std::floor((1.0 - std::exp(-v)) * kBins));
    counts[static_cast<std::size_t>(std::clamp(b, 0, kBins - 1))] += 1.0;
  }
  const double expected = static_cast<double>(samples.size()) / kBins;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(kBins - 1);
  const double p = boost::math::cdf(boost::math::complement(dist, chi2));
  return {std::abs(contrast - 1.0) <= 0.1 && p > 0.01,
          fmt::format("contrast {:.4f} (1 +- 0.1), exponential chi2 {:.2f} on {} dof, p = {:.3g} (> 0.01), {} samples",
                      contrast, chi2, kBins - 1, p, samples.size())};
}

Outcome optimization_transfer() {
  const auto cfg = default_config("fig3_optimize");
  std::vector<double> c, q;
  for (auto s : seeds(10)) {
    const auto r = run_optimize(cfg, s);
    c.push_back(r.classical_enhancement);
    q.push_back(r.quantum_enhancement);
  }
  const double ideal = kPi / 4 * 63;
  const double mc = median(c), mq = median(q);
  return {mc >= 0.5 * ideal && mc <= 1.2 * ideal && mq >= 0.5 * mc,
          fmt::format("median classical {:.2f} in [{:.2f}, {:.2f}], median quantum {:.2f} (>= {:.2f})", mc,
                      0.5 * ideal, 1.2 * ideal, mq, 0.5 * mc)};
}

std::vector<MemoryResult>& memory_runs() {
  static std::vector<MemoryResult> runs = [] {
    const auto cfg = default_config("fig4_memory");
    std::vector<MemoryResult> r;
    for (auto s : seeds(10)) r.push_back(run_memory(cfg, s));
    return r;
  }();
  return runs;
}

Outcome memory_effect() {
  std::vector<double> rc, rq, agree, tc, tq, tp;
  int larger = 0;
  for (const auto& r : memory_runs()) {
    rc.push_back(r.classical_fit.residual_rms);
    rq.push_back(r.quantum_fit.residual_rms);
    agree.push_back(std::abs(r.quantum_fit.theta0 - r.classical_fit.theta0) / r.classical_fit.theta0);
    tc.push_back(r.classical_fit.theta0);
    tq.push_back(r.quantum_fit.theta0);
    tp.push_back(r.copropagating_fit.theta0);
    larger += r.copropagating_fit.theta0 > std::max(r.classical_fit.theta0, r.quantum_fit.theta0);
  }
  const bool pass = median(rc) < 0.1 && median(rq) < 0.1 && median(agree) <= 0.1 &&
                    median(tp) > std::max(median(tc), median(tq));
  return {pass, fmt::format("median rms {:.3f}/{:.3f} (< 0.1), median theta0 classical {:.3f} mrad, quantum {:.3f} "
                            "mrad, median disagreement {:.1f}% (<= 10%), co-propagating {:.3f} mrad "
                            "(larger in {}/10 seeds)",
                            median(rc), median(rq), 1e3 * median(tc), 1e3 * median(tq), 100 * median(agree),
                            1e3 * median(tp), larger)};
}

Outcome offaxis_reoptimization() {
  std::vector<double> drop, restore;
  for (const auto& r : memory_runs()) {
    drop.push_back(r.shifted_coincidence / r.peak_coincidence);
    restore.push_back(r.reoptimized_coincidence / r.peak_coincidence);
  }
  const double d = median(drop), s = median(restore);
  return {d < 0.4 && s >= 0.8,
          fmt::format("median shifted/peak {:.3f} (< 0.4), re-optimized/peak {:.3f} (>= 0.8)", d, s)};
}

Outcome two_spot() {
  const auto cfg = default_config("fig5_two_spots");
  std::vector<double> ea, eb, diff;
  for (auto s : seeds(10)) {
    const auto r = run_two_spot(cfg, s);
    ea.push_back(r.enhancement_a);
    eb.push_back(r.enhancement_b);
    diff.push_back(r.relative_difference);
  }
  const double unit = two_spot_cost(1.0, 0.5, 0.2);
  const bool pass = median(ea) >= 5 && median(eb) >= 5 && median(diff) <= 0.25 && std::abs(unit - 1.35) < 1e-12;
  return {pass, fmt::format("median enhancements {:.2f}, {:.2f} (>= 5), median difference {:.1f}% (<= 25%), "
                            "cost(1.0, 0.5, 0.2) = {:.4f}",
                            median(ea), median(eb), 100 * median(diff), unit)};
}

Outcome mirror_deviation() {
  const auto r = run_deviations(default_config("supp_deviations"));
  const bool pass = r.source_width_at_crystal < r.pump_width && r.mirror_width > r.masked_width;
  return {pass, fmt::format("source {:.4g} m < pump {:.4g} m, mirror width {:.4g} m > masked width {:.4g} m",
                            r.source_width_at_crystal, r.pump_width, r.mirror_width, r.masked_width)};
}

Outcome noise_ordering() {
  auto cfg = default_config("fig3_optimize");
  cfg.noise_study.enabled = true;
  std::vector<double> c, q;
  for (auto s : seeds(5)) {
    const auto r = run_noise_comparison(cfg, s);
    c.push_back(r.classical_feedback_enhancement);
    q.push_back(r.quantum_feedback_enhancement);
  }
  return {median(c) >= median(q),
          fmt::format("median enhancement classical feedback {:.2f} >= quantum feedback {:.2f}", median(c), median(q))};
}

Outcome fit_round_trip() {
  MemoryScan scan;
  Rng rng = make_stream(2024, 0);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int i = 1; i <= 20; ++i) {
    const double d = 0.5e-3 * i;
    scan.delta_thetas.push_back(d);
    scan.ratios.push_back(memory_model(d, 2.2e-3) + noise(rng));
  }
  const auto fit = fit_memory(scan);
  const double err = std::abs(fit.theta0 - 2.2e-3) / 2.2e-3;
  const double m = memory_model(2.2e-3, 2.2e-3);
  return {err <= 0.05 && std::abs(m - 0.7241) <= 1e-4,
          fmt::format("theta0 {:.4f} mrad ({:.2f}% off, <= 5%), model(theta0, theta0) = {:.6f}", 1e3 * fit.theta0,
                      100 * err, m)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  auto cfg = default_config("fig3_optimize");
  cfg.seeds = {0, 1};
  cfg.noise_study.enabled = true;
  const fs::path root = fs::temp_directory_path() / "awp_acceptance_determinism";
  fs::remove_all(root);
  const int before = thread_count();
  std::vector<fs::path> dirs;
  for (int threads : {1, 4}) {
    set_thread_count(threads);
    dirs.push_back(root / fmt::format("threads{}", threads));
    run_scenario(cfg, dirs.back().string());
  }
  set_thread_count(before);
  int compared = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    if (e.path().extension() != ".csv") continue;
    ++compared;
    const auto other = dirs[1] / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
  }
  fs::remove_all(root);
  return {compared > 0 && differing == 0,
          fmt::format("{} CSV artifacts compared across 1 and 4 threads, {} differ", compared, differing)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "AWP oracle equivalence", 60, oracle_equivalence},
      {2, "Klyshko/quantum map proportionality", 60, map_proportionality},
      {3, "anti-correlation", 10, anticorrelation},
      {4, "speckle statistics", 120, speckle_statistics},
      {5, "optimization transfer", 600, optimization_transfer},
      {6, "memory effect", 600, memory_effect},
      {7, "off-axis re-optimization", 600, offaxis_reoptimization},
      {8, "two-spot cost", 600, two_spot},
      {9, "mirror vs pump-mask deviation", 60, mirror_deviation},
      {10, "noise ordering", 900, noise_ordering},
      {11, "fit round trip", 60, fit_round_trip},
      {12, "determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("error: {}", e.what())};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    fmt::print("{} {:>2} {}: {}; {:.1f} s (budget {:.0f} s{})\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail, dt,
               c.budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
