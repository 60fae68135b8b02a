#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "awp/detection.hpp"
#include "awp/diffusers.hpp"
#include "awp/optimizer.hpp"
#include "awp/spdc.hpp"

namespace awp {

struct DiffuserPreset {
  enum class Kind { Thin, Thick };
  Kind kind = Kind::Thin;
  double divergence_rad = 0.0;  ///< far-field HWHM half-angle
  double phase_stdev_rad = kStrongPhaseStdev;
  double gap_m = 0.0;           ///< thick only
};

struct ElementSpec {
  enum class Kind { Diffuser, Lens, FreeSpace, Magnifier };
  Kind kind = Kind::Lens;
  std::string preset;  ///< diffuser preset name
  double value = 0.0;  ///< focal length [m], distance [m] or ratio
};

struct ArmConfig {
  std::vector<ElementSpec> elements;
  /// Reuse the scanning arm's elements and screen realizations.
  bool shared_with_scan = false;
};

struct SlmConfig {
  int rows = 1;
  int cols = 64;
  int active = 64;
  double pupil_radius_m = 1.024e-3;
  bool pinhole = true;
  double tilt_inside_rad = 1.5e-3;
  double tilt_outside_rad = -10e-3;
};

struct PoseConfig {
  FiberKind kind = FiberKind::SingleMode;
  double center_x_m = 0.0;
  double center_y_m = 0.0;
  double size_m = 25e-6;  ///< waist (SMF) or core diameter (MMF)

  DetectorPose pose() const { return {center_x_m, center_y_m, kind, size_m, 0.0}; }
};

struct BaselineConfig {
  int window_half_count = 30;     ///< poses on each side of the target
  double window_step_m = 10e-6;
  int random_patterns = 7;        ///< in addition to the initial pattern
};

struct MemoryConfig {
  double delta_max_rad = 1.2e-3;
  int points = 16;
  double beacon_waist_m = 1.03e-3;
  double offaxis_shift_theta0 = 2.5;  ///< off-axis shift in units of the fitted theta0
};

struct NoiseStudyConfig {
  bool enabled = false;
  NoiseConfig quantum;
  NoiseConfig classical;
};

/// One random scene per seed on `grid`; the proportionality map uses a
/// larger grid of the same pitch.
struct OracleConfig {
  double correlation_length_m = 100e-6;
  double detector_waist_m = 80e-6;
  int map_n_x = 512;
  int map_points = 101;
};

struct SpeckleConfig {
  int map_points = 32;      ///< scanning poses per axis
  double map_step_m = 0.0;  ///< 0 picks the far-field pitch times 4
};

struct ScenarioConfig {
  std::string scenario;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;

  GridSpec grid;
  PumpConfig pump;
  double crystal_length_m = 2e-3;
  bool phase_matching = true;
  double magnification = 2.0;
  /// Reflector used for the classical configuration.
  CrystalMode klyshko_mode = CrystalMode::PerfectMirror;

  std::map<std::string, DiffuserPreset> diffusers;
  ArmConfig scan_arm;
  ArmConfig fixed_arm;
  SlmConfig slm;

  PoseConfig fixed;
  PoseConfig target;
  PoseConfig target_b;
  double two_spot_alpha = 0.2;

  OptimizerOptions optimizer;
  Feedback feedback = Feedback::KlyshkoPower;
  BaselineConfig baseline;
  MemoryConfig memory;
  NoiseStudyConfig noise_study;
  OracleConfig oracle;
  SpeckleConfig speckle;
};

struct Finding {
  std::string path;  ///< dotted key path
  std::string message;
};

const std::vector<std::string>& scenario_names();

/// Built-in configuration of a named scenario. Throws ConfigError for an
/// unknown name.
ScenarioConfig default_config(const std::string& scenario);

/// Parses YAML text. Keys absent from the document keep the defaults of
/// the named scenario, except the required ones (scenario, grid.n_x,
/// grid.pitch_m, grid.wavelength_m). Problems are appended to `findings`.
/// Throws ConfigError with line and column on a syntax error.
ScenarioConfig parse_config(const std::string& yaml_text, std::vector<Finding>& findings);

/// Semantic checks: resolvable references, diffuser divergence against the
/// grid's angular range, poses on their grids.
void check_config(const ScenarioConfig& cfg, std::vector<Finding>& findings);

/// Reads, parses and checks a file. Throws ConfigError when unreadable.
std::vector<Finding> validate_config(const std::string& path);

/// Reads and parses a file; throws ConfigError listing the findings if any.
ScenarioConfig load_config(const std::string& path);

/// Canonical JSON text of the effective configuration (sorted keys).
std::string canonical_json(const ScenarioConfig& cfg);

/// Hex SHA-256 of canonical_json.
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace awp
