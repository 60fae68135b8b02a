#pragma once

#include <optional>
#include <vector>

#include "awp/detection.hpp"
#include "awp/elements.hpp"

namespace awp {

enum class PumpProfile { Gaussian, PlaneWave };

struct PumpConfig {
  double waist = 500e-6;        ///< [m] at the crystal
  double wavelength = 405e-9;   ///< [m]
  PumpProfile profile = PumpProfile::Gaussian;
};

enum class CrystalMode { TwoPhotonSource, PerfectMirror, PumpMaskedMirror };

/// Thin-crystal two-photon kernel K(r1, r2) = P((r1 + r2) / 2) G(r1 - r2),
/// expressed in the coordinates of the simulation plane, which images the
/// crystal with the given magnification.
///
/// P is the pump amplitude exp(-r^2 / (M w0)^2) (1 for a plane wave). G has
/// the momentum representation sinc(L M^2 q^2 lambda_p / (2 pi)), i.e.
/// sinc(L |q1 - q2|^2 / (4 k_p)) of the collinear degenerate thin-crystal
/// state written in the conjugate of r1 - r2, and unit integral. With phase
/// matching disabled G is a delta.
///
/// PumpMaskedMirror is the classical realization of the same operator (a
/// mirror with pump-profile and far-field sinc masks); PerfectMirror is the
/// identity.
struct CrystalKernel {
  PumpConfig pump;
  double crystal_length = 2e-3;
  bool phase_matching = true;
  CrystalMode mode = CrystalMode::TwoPhotonSource;
  double magnification = 1.0;
};

inline CrystalKernel perfect_mirror() {
  CrystalKernel k;
  k.mode = CrystalMode::PerfectMirror;
  return k;
}

void validate(const CrystalKernel& k);

/// Pump amplitude at simulation-plane coordinates (x, y).
double pump_amplitude(const CrystalKernel& k, double x, double y = 0.0);

/// Momentum-space phase-matching filter at transverse wavenumber q [rad/m].
double phase_matching_filter(const CrystalKernel& k, double q);

/// G sampled at separations m * pitch for m in [-(n-1), n-1], index m + n - 1.
/// Band-limited to the grid Nyquist; Sum_m G_m pitch = 1.
std::vector<double> phase_matching_kernel_1d(const CrystalKernel& k, const GridSpec& spec);

/// Applies K as an integral operator: (K f)(r1) = Int K(r1, r2) f(r2) dr2.
/// 1-D with phase matching: exact midpoint contraction (N^2). 2-D with phase
/// matching: sqrt(P) (G * (sqrt(P) f)), exact when G is a delta and close
/// to the midpoint form when G is much narrower than the pump.
SampledField crystal_apply(const CrystalKernel& k, const SampledField& f);

/// Heralded field at the detector-1 plane given a click in det2_mode:
/// T1 K T2^T conj(m2). Its projection on det1 modes gives coincidence
/// amplitudes.
SampledField conditional_field(const CrystalKernel& k, const OpticalArm& arm1, const OpticalArm& arm2,
                               const SampledField& det2_mode);

/// A = <m1, T1 K T2^T conj(m2)>; coincidence rate is proportional to |A|^2.
cplx coincidence_amplitude(const CrystalKernel& k, const OpticalArm& arm1, const OpticalArm& arm2,
                           const SampledField& det1_mode, const SampledField& det2_mode);

/// Reference double sum over an explicitly materialized N x N kernel:
///   A = Sum_{j,l} (T1^T conj m1)_j K_jl (T2^T conj m2)_l pitch^2.
/// G is evaluated by direct cosine quadrature, independent of the FFT
/// path. 1-D grids with N <= 256 only (UnsupportedError otherwise).
cplx brute_force_coincidence(const CrystalKernel& k, const OpticalArm& arm1, const OpticalArm& arm2,
                             const SampledField& det1_mode, const SampledField& det2_mode);

/// brightness * |A|^2 per det1 pose (bucket integral of |conditional
/// field|^2 for multimode poses). With noise configured each rate is
/// replaced by an accidental-corrected Poisson estimate, stream = pose index.
std::vector<double> coincidence_map(const CrystalKernel& k, const OpticalArm& arm1, const OpticalArm& arm2,
                                    const std::vector<DetectorPose>& det1_scan, const DetectorPose& det2_pose,
                                    double brightness, const std::optional<NoiseConfig>& noise = std::nullopt);

}  // namespace awp
