#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "awp/config.hpp"
#include "awp/memory.hpp"
#include "awp/optimizer.hpp"

namespace awp {

/// A shaping system realized from a config for one seed.
struct Setup {
  ShapingSystem system;
  SlmPattern initial;
  DetectorPose target;
  DetectorPose target_b;
};

/// Builds arms (screens calibrated to the preset divergences, seeds
/// screen_seed(seed, i) in arm order), crystals, SLM pattern and poses.
/// With `diffusers` false the screens are left out (efficiency reference).
Setup build_setup(const ScenarioConfig& cfg, std::uint64_t seed, bool diffusers = true);

/// Single-pass co-propagating counterpart of a setup: a Gaussian beacon of
/// cfg.memory.beacon_waist_m on the SLM plane, read out after the scanning
/// tail. The returned target sits where the pinhole tilt sends the beacon.
Setup build_beacon_setup(const ScenarioConfig& cfg, const Setup& setup);

/// Speckle mean around `target`: the configured window of poses, averaged
/// over the initial pattern and random_patterns random patterns.
double speckle_baseline(const ShapingSystem& sys, Feedback feedback, const SlmPattern& initial,
                        const DetectorPose& target, const BaselineConfig& cfg, std::uint64_t seed);

struct OptimizeResult {
  std::uint64_t seed = 0;
  OptimizationTrace trace;
  double classical_enhancement = 0.0;
  double quantum_enhancement = 0.0;
  double classical_efficiency = 0.0;
  double quantum_efficiency = 0.0;
};

OptimizeResult run_optimize(const ScenarioConfig& cfg, std::uint64_t seed);

struct NoiseResult {
  std::uint64_t seed = 0;
  double classical_feedback_enhancement = 0.0;
  double quantum_feedback_enhancement = 0.0;
};

/// Same target optimized twice with photon-counting feedback: classical
/// Klyshko rates and heralded coincidence rates, equal integration time.
NoiseResult run_noise_comparison(const ScenarioConfig& cfg, std::uint64_t seed);

struct MemoryResult {
  std::uint64_t seed = 0;
  MemoryScan classical, quantum, copropagating;
  MemoryFit classical_fit, quantum_fit, copropagating_fit;
  double peak_coincidence = 0.0;       ///< optimized, original poses
  double shifted_coincidence = 0.0;    ///< same pattern, shifted poses
  double reoptimized_coincidence = 0.0;
  double shift_rad = 0.0;
};

MemoryResult run_memory(const ScenarioConfig& cfg, std::uint64_t seed);

struct TwoSpotResult {
  std::uint64_t seed = 0;
  OptimizationTrace trace;
  double enhancement_a = 0.0;
  double enhancement_b = 0.0;
  double relative_difference = 0.0;
};

TwoSpotResult run_two_spot(const ScenarioConfig& cfg, std::uint64_t seed);

struct DeviationResult {
  double source_width_at_crystal = 0.0;  ///< rms width of the returning source mode
  double pump_width = 0.0;               ///< rms width of the pump amplitude squared
  double mirror_width = 0.0;             ///< rms width at the diffuser plane
  double masked_width = 0.0;
  SampledField mirror_field, masked_field;
};

DeviationResult run_deviations(const ScenarioConfig& cfg);

struct OracleScene {
  std::uint64_t seed = 0;
  cplx fast, brute;
  double relative_error = 0.0;
};

struct OracleResult {
  std::vector<OracleScene> scenes;
  double max_relative_error = 0.0;
  std::vector<double> map_x;
  std::vector<double> klyshko_map;
  std::vector<double> coincidence_map;
  double map_relative_error = 0.0;  ///< after one-constant normalization
};

OracleResult run_oracle(const ScenarioConfig& cfg);

struct SpeckleResult {
  SampledField klyshko;           ///< camera field
  SampledField heralded;          ///< conditional photon-1 amplitude
  std::vector<double> pose_x, pose_y;
  std::vector<double> klyshko_map, coincidence_map;
  double map_correlation = 0.0;   ///< Pearson correlation of the two maps
  double contrast = 0.0;          ///< std / mean of the scanned Klyshko map
};

SpeckleResult run_speckle(const ScenarioConfig& cfg);

struct RunManifest {
  std::string scenario;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> artifacts;  ///< relative to the output directory
  double wall_clock_s = 0.0;
  std::string version;
  bool assertions_passed = true;
  std::vector<std::string> failures;
};

/// Runs the scenario, writes CSV/PGM/field/fit artifacts plus
/// manifest.json into `out_dir`, and returns the manifest. Internal
/// assertion failures are recorded, not thrown.
RunManifest run_scenario(const ScenarioConfig& cfg, const std::string& out_dir);

const char* version_string();

}  // namespace awp
