#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "awp/errors.hpp"
#include "awp/klyshko.hpp"
#include "awp/slm.hpp"

namespace awp {

/// Shaping experiment with the SLM imaged onto the crystal. Both photons
/// (and the Klyshko beam, twice) cross the SLM; the tails are the optics
/// from the SLM plane to each detector plane.
struct ShapingSystem {
  GridSpec slm_plane;
  OpticalArm scan_tail;     ///< SLM plane -> scanning (multimode) detector plane
  OpticalArm fixed_tail;    ///< SLM plane -> fixed single-mode detector plane
  DetectorPose fixed_pose;  ///< launches the Klyshko beam / heralds photon 2
  CrystalKernel klyshko_crystal = perfect_mirror();
  CrystalKernel source_crystal;
  /// false for a single-pass beacon, whose "fixed arm" is an empty arm on
  /// the SLM plane and whose fixed pose is the beacon itself.
  bool slm_in_fixed_arm = true;
  double scan_focal_length = 0.0;   ///< [m], angle = x / f on the scanning plane
  double fixed_focal_length = 0.0;  ///< [m], likewise on the fixed plane
};

OpticalArm scan_arm(const ShapingSystem& sys, const SlmPattern& pattern);
OpticalArm fixed_arm(const ShapingSystem& sys, const SlmPattern& pattern);
KlyshkoScene klyshko_scene(const ShapingSystem& sys, const SlmPattern& pattern, Readout readout = CameraReadout{});

/// Klyshko field on the scanning detector plane.
SampledField advanced_field(const ShapingSystem& sys, const SlmPattern& pattern);

/// Heralded photon-1 amplitude on the scanning detector plane; |.|^2
/// integrated over a detector is the coincidence signal.
SampledField heralded_field(const ShapingSystem& sys, const SlmPattern& pattern);

enum class Feedback { KlyshkoPower, QuantumCoincidence };

struct SingleSpot {
  DetectorPose pose;
};

struct TwoSpot {
  DetectorPose pose_a;
  DetectorPose pose_b;
  double alpha = 0.2;  ///< cost loses alpha * x percent when the spots differ by x percent
};

struct CostConfig {
  std::variant<SingleSpot, TwoSpot> kind;
  Feedback feedback = Feedback::KlyshkoPower;
  /// Photon counting on every spot reading: rate = brightness * signal,
  /// Poisson-sampled and accidental-corrected.
  std::optional<NoiseConfig> noise;
};

/// (a + b) (1 - alpha x / 100) with x = 100 |a - b| / max(a, b); 0 when
/// both readings are zero.
double two_spot_cost(double a, double b, double alpha);

/// Signal of the configured feedback at one pose, without noise.
double spot_signal(const ShapingSystem& sys, Feedback feedback, const SlmPattern& pattern, const DetectorPose& pose);

/// Cost of a pattern. Noisy readings draw from `stream` (two sub-streams
/// for two spots).
double evaluate_cost(const ShapingSystem& sys, const CostConfig& cfg, const SlmPattern& pattern,
                     std::uint64_t stream = 0);

struct StepRecord {
  int step = 0;
  int pass = 0;
  int segment = 0;  ///< position in layout.active
  std::vector<double> tested_phases;
  std::vector<double> costs;
  double fitted_phase = 0.0;
  double predicted = 0.0;
  bool accepted = false;
  double chosen_phase = 0.0;
  double best_so_far = 0.0;
};

struct OptimizationTrace {
  std::vector<StepRecord> steps;
  SlmPattern final_pattern;
  double initial_cost = 0.0;
  double final_cost = 0.0;
};

class OptimizationError : public Error {
 public:
  OptimizationError(const std::string& what, OptimizationTrace partial)
      : Error(what), trace_(std::move(partial)) {}
  const OptimizationTrace& trace() const { return trace_; }

 private:
  OptimizationTrace trace_;
};

struct OptimizerOptions {
  int phase_steps = 8;
  int passes = 1;
  bool noisy = false;  ///< selects the keep-best rule variant
};

/// Cost of a candidate pattern; `stream` identifies the measurement.
using Objective = std::function<double(const SlmPattern&, std::uint64_t stream)>;

/// Continuous sequential optimization. Segments are visited in layout
/// order (row-major over active segments). For each, the cost is sampled
/// at phase_steps equally spaced phases in [0, 2 pi) and fitted by least
/// squares with a constant, the first harmonic and, for phase_steps >= 5,
/// the second harmonic (double passage through the SLM makes the response
/// pi-periodic). The fitted maximum is kept only if its predicted cost
/// beats the best so far; in noiseless mode the kept pattern is also
/// re-measured and reverted if it did not improve. Phase evaluations of
/// one segment run in parallel.
///
/// Throws ConfigError for phase_steps < 3 or passes < 1 and
/// OptimizationError (carrying the partial trace) on a non-finite cost.
OptimizationTrace sequential_optimize(const Objective& objective, SlmPattern initial,
                                      const OptimizerOptions& options);

OptimizationTrace sequential_optimize(const ShapingSystem& sys, const CostConfig& cfg, SlmPattern initial,
                                      int phase_steps = 8, int passes = 1);

/// optimized / speckle mean; throws ConfigError on a non-positive baseline.
double enhancement(double optimized_value, double speckle_mean_before);

/// optimized / no-diffuser value; throws ConfigError on a non-positive reference.
double efficiency(double optimized_value, double no_diffuser_value);

/// CSV: step,pass,segment,chosen_phase,cost (cost = best so far).
void write_trace_csv(std::ostream& os, const OptimizationTrace& trace);

}  // namespace awp
