#pragma once

#include <cstdint>
#include <optional>

#include "awp/grid.hpp"

namespace awp {

enum class FiberKind { SingleMode, MultiMode };

/// Fiber tip in a detector plane. For single-mode fibers `size` is the mode
/// waist (Gaussian of waist equal to the core radius); for multimode fibers
/// it is the core diameter.
struct DetectorPose {
  double center_x = 0.0;  ///< [m]
  double center_y = 0.0;  ///< [m]
  FiberKind kind = FiberKind::SingleMode;
  double size = 0.0;      ///< [m]
  double tilt_x = 0.0;    ///< [rad], mode tilt; only meaningful for SMF sources

  static DetectorPose smf(double center_x, double waist, double center_y = 0.0) {
    return {center_x, center_y, FiberKind::SingleMode, waist, 0.0};
  }
  static DetectorPose mmf(double center_x, double core_diameter, double center_y = 0.0) {
    return {center_x, center_y, FiberKind::MultiMode, core_diameter, 0.0};
  }
  DetectorPose moved(double dx, double dy = 0.0) const {
    DetectorPose p = *this;
    p.center_x += dx;
    p.center_y += dy;
    return p;
  }
};

/// Photon-counting parameters. Rates in counts/s, times in s.
struct NoiseConfig {
  double integration_time = 1.0;
  double singles_rate_1 = 0.0;
  double singles_rate_2 = 0.0;
  double coincidence_window = 2e-9;
  double brightness = 1.0;  ///< counts/s per unit detected signal
  std::uint64_t seed = 0;

  double accidental_rate() const { return singles_rate_1 * singles_rate_2 * coincidence_window; }
};

/// Throws ConfigError when a parameter is negative or the window is not
/// much shorter than the integration time.
void validate(const NoiseConfig& cfg);

/// Unit-energy SMF mode of the pose on `spec`. Throws ShapeError when the
/// pose lies off the grid.
SampledField detector_mode(const GridSpec& spec, const DetectorPose& pose);

/// |<mode, field>|^2
double smf_power(const SampledField& field, const DetectorPose& pose);

/// Sum |field|^2 dA over samples whose centers lie inside the core (a
/// disk in 2-D, an interval in 1-D). Diameter 0 gives 0; otherwise the core
/// must span at least 4 samples (SamplingError).
double mmf_power(const SampledField& field, const DetectorPose& pose);

/// Dispatches on pose.kind.
double detector_power(const SampledField& field, const DetectorPose& pose);

/// Poisson draw with mean mean_rate * integration_time from stream
/// (cfg.seed, stream).
std::int64_t sample_counts(double mean_rate, const NoiseConfig& cfg, std::uint64_t stream);

/// Accidental-subtracted coincidence rate estimate:
///   raw ~ Poisson((true_rate + r1 r2 tau) T);  returns raw / T - r1 r2 tau.
/// Without a config the true rate is returned unchanged. Negative
/// estimates are kept.
double corrected_coincidences(double true_rate, const std::optional<NoiseConfig>& cfg, std::uint64_t stream);

}  // namespace awp
