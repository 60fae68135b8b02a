#pragma once

#include <cstdint>
#include <vector>

#include "awp/elements.hpp"

namespace awp {

/// Gaussian-correlated Gaussian random phase screen.
struct ScreenParams {
  double correlation_length = 0.0;  ///< [m], 1/e width of the phase autocorrelation
  double phase_stdev = 3.0;         ///< [rad], pointwise standard deviation
  std::uint64_t seed = 0;
};

/// Two screens separated by free space.
struct ThickDiffuser {
  ScreenParams screen_a;
  ScreenParams screen_b;
  double gap = 0.0;  ///< [m]
};

inline constexpr double kStrongPhaseStdev = 3.0;
inline constexpr double kWeakPhaseStdev = 1.2;

/// Seed of screen `index` under experiment seed `master_seed`.
std::uint64_t screen_seed(std::uint64_t master_seed, std::uint64_t index);

/// Unit-modulus mask exp(i phi), phi synthesized spectrally from white
/// Gaussian noise (stream derived from params.seed) filtered so that
/// <phi(r) phi(r + d)> = stdev^2 exp(-d^2 / l^2). Periodic over the grid.
/// Throws SamplingError when correlation_length < 2 pitch.
Mask make_phase_screen(const GridSpec& spec, const ScreenParams& params);

/// Ensemble-averaged far-field envelope HWHM [rad] of a uniform plane wave
/// through screens with the given statistics (seeds 0..n_seeds-1 under
/// master_seed). The on-axis ballistic bin is excluded.
double measure_divergence(const GridSpec& spec, double correlation_length, double phase_stdev,
                          int n_seeds = 32, std::uint64_t master_seed = 0x5eed);

/// Correlation length whose measured HWHM matches target_half_angle within
/// 1% (bisection over log l). Throws CalibrationError if the target is at
/// or above the angular Nyquist limit or cannot be bracketed on this grid.
double calibrate_divergence(const GridSpec& spec, double target_half_angle, double phase_stdev,
                            int n_seeds = 32, std::uint64_t master_seed = 0x5eed);

/// [Mask(a), FreeSpace(gap), Mask(b)]
std::vector<Element> thick_diffuser_elements(const ThickDiffuser& td, const GridSpec& spec);

}  // namespace awp
