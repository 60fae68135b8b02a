#include "awp/spdc.hpp"

#include <cmath>

#include "awp/errors.hpp"
#include "awp/fft.hpp"
#include "awp/parallel.hpp"

namespace awp {
namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

bool uses_pump(const CrystalKernel& k) { return k.pump.profile == PumpProfile::Gaussian; }

SampledField apply_midpoint_1d(const CrystalKernel& k, const SampledField& f) {
  const GridSpec& s = f.spec();
  const int n = s.n_x;
  const auto g = phase_matching_kernel_1d(k, s);
  const auto& in = f.data();
  SampledField out(s, f.plane_label());
  for (int j = 0; j < n; ++j) {
    cplx acc = 0.0;
    const double xj = s.x(j);
    for (int l = 0; l < n; ++l) {
      const double p = uses_pump(k) ? pump_amplitude(k, 0.5 * (xj + s.x(l))) : 1.0;
      acc += p * g[static_cast<std::size_t>(j - l + n - 1)] * in[static_cast<std::size_t>(l)];
    }
    out(j) = acc * s.pitch;
  }
  return out;
}

SampledField apply_split_2d(const CrystalKernel& k, const SampledField& f) {
  const GridSpec& s = f.spec();
  std::vector<double> root_p(s.size(), 1.0);
  if (uses_pump(k))
    for (int j = 0; j < s.n_y; ++j)
      for (int i = 0; i < s.n_x; ++i)
        root_p[static_cast<std::size_t>(j) * s.n_x + i] = std::sqrt(pump_amplitude(k, s.x(i), s.y(j)));

  std::vector<cplx> buf = f.data();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= root_p[i];
  fft::transform(buf, s.n_x, s.n_y, fft::Direction::Forward);
  const double dq_x = kTwoPi / s.extent_x();
  const double dq_y = kTwoPi / s.extent_y();
  const double norm = 1.0 / static_cast<double>(s.size());
  for (int j = 0; j < s.n_y; ++j) {
    const double qy = fft::signed_index(j, s.n_y) * dq_y;
    for (int i = 0; i < s.n_x; ++i) {
      const double qx = fft::signed_index(i, s.n_x) * dq_x;
      buf[static_cast<std::size_t>(j) * s.n_x + i] *= norm * phase_matching_filter(k, std::hypot(qx, qy));
    }
  }
  fft::transform(buf, s.n_x, s.n_y, fft::Direction::Inverse);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= root_p[i];
  return SampledField(s, std::move(buf), f.plane_label());
}

}  // namespace

void validate(const CrystalKernel& k) {
  if (!(k.crystal_length > 0.0)) throw ConfigError("crystal length must be positive");
  if (!(k.pump.waist > 0.0)) throw ConfigError("pump waist must be positive");
  if (!(k.pump.wavelength > 0.0)) throw ConfigError("pump wavelength must be positive");
  if (!(k.magnification > 0.0)) throw ConfigError("crystal imaging magnification must be positive");
}

double pump_amplitude(const CrystalKernel& k, double x, double y) {
  if (k.mode == CrystalMode::PerfectMirror || k.pump.profile == PumpProfile::PlaneWave) return 1.0;
  const double w = k.pump.waist * k.magnification;
  return std::exp(-(x * x + y * y) / (w * w));
}

double phase_matching_filter(const CrystalKernel& k, double q) {
  const double m2 = k.magnification * k.magnification;
  return sinc(k.crystal_length * m2 * q * q * k.pump.wavelength / kTwoPi);
}

std::vector<double> phase_matching_kernel_1d(const CrystalKernel& k, const GridSpec& spec) {
  const int n = spec.n_x;
  const int len = 2 * n;  // doubled length avoids wrap-around of separations
  std::vector<cplx> buf(static_cast<std::size_t>(len));
  const double dq = kTwoPi / (len * spec.pitch);
  for (int i = 0; i < len; ++i) buf[static_cast<std::size_t>(i)] = phase_matching_filter(k, fft::signed_index(i, len) * dq);
  fft::transform(buf, len, 1, fft::Direction::Inverse);
  std::vector<double> g(static_cast<std::size_t>(2 * n - 1));
  const double scale = 1.0 / (len * spec.pitch);
  for (int m = -(n - 1); m <= n - 1; ++m)
    g[static_cast<std::size_t>(m + n - 1)] = buf[static_cast<std::size_t>((m + len) % len)].real() * scale;
  return g;
}

SampledField crystal_apply(const CrystalKernel& k, const SampledField& f) {
  validate(k);
  if (k.mode == CrystalMode::PerfectMirror) return f;
  const GridSpec& s = f.spec();
  if (!k.phase_matching) {
    if (!uses_pump(k)) return f;
    SampledField out(s, f.plane_label());
    for (int j = 0; j < s.n_y; ++j)
      for (int i = 0; i < s.n_x; ++i) out(i, j) = pump_amplitude(k, s.x(i), s.y(j)) * f(i, j);
    return out;
  }
  return s.is_1d() ? apply_midpoint_1d(k, f) : apply_split_2d(k, f);
}

SampledField conditional_field(const CrystalKernel& k, const OpticalArm& arm1, const OpticalArm& arm2,
                               const SampledField& det2_mode) {
  require_same_grid(arm1.entry_spec(), arm2.entry_spec(), "crystal plane");
  const SampledField back = arm_apply(arm2, det2_mode.conj(), Direction::Backward);
  return arm_apply(arm1, crystal_apply(k, back), Direction::Forward);
}

cplx coincidence_amplitude(const CrystalKernel& k, const OpticalArm& arm1, const OpticalArm& arm2,
                           const SampledField& det1_mode, const SampledField& det2_mode) {
  return overlap(det1_mode, conditional_field(k, arm1, arm2, det2_mode));
}

cplx brute_force_coincidence(const CrystalKernel& k, const OpticalArm& arm1, const OpticalArm& arm2,
                             const SampledField& det1_mode, const SampledField& det2_mode) {
  validate(k);
  const GridSpec& s = arm1.entry_spec();
  if (!s.is_1d() || !arm2.entry_spec().is_1d()) throw UnsupportedError("brute-force coincidence is 1-D only");
  if (s.n_x > 256) throw UnsupportedError("brute-force coincidence limited to N <= 256");
  require_same_grid(s, arm2.entry_spec(), "crystal plane");

  const SampledField a1 = arm_apply(arm1, det1_mode.conj(), Direction::Backward);
  const SampledField a2 = arm_apply(arm2, det2_mode.conj(), Direction::Backward);
  const int n = s.n_x;
  const double p = s.pitch;

  // G(m p) = (1 / 2 N p) Sum_k g(q_k) cos(q_k m p), q_k = 2 pi k / (2 N p), k in [-N, N).
  std::vector<double> g_of_sep(static_cast<std::size_t>(n), 0.0);
  const bool mirror = k.mode == CrystalMode::PerfectMirror || !k.phase_matching;
  if (!mirror) {
    std::vector<double> filt(static_cast<std::size_t>(2 * n));
    const double dq = kPi / (n * p);
    for (int kk = -n; kk < n; ++kk) filt[static_cast<std::size_t>(kk + n)] = phase_matching_filter(k, kk * dq);
    for (int m = 0; m < n; ++m) {
      double acc = 0.0;
      for (int kk = -n; kk < n; ++kk) acc += filt[static_cast<std::size_t>(kk + n)] * std::cos(kk * dq * m * p);
      g_of_sep[static_cast<std::size_t>(m)] = acc / (2.0 * n * p);
    }
  }

  std::vector<cplx> kernel(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      const double pump = pump_amplitude(k, 0.5 * (s.x(j) + s.x(l)));
      double g;
      if (mirror) g = j == l ? 1.0 / p : 0.0;
      else g = g_of_sep[static_cast<std::size_t>(std::abs(j - l))];
      kernel[static_cast<std::size_t>(j) * n + l] = pump * g;
    }

  cplx sum = 0.0;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) sum += a1(j) * kernel[static_cast<std::size_t>(j) * n + l] * a2(l);
  return sum * p * p;
}

std::vector<double> coincidence_map(const CrystalKernel& k, const OpticalArm& arm1, const OpticalArm& arm2,
                                    const std::vector<DetectorPose>& det1_scan, const DetectorPose& det2_pose,
                                    double brightness, const std::optional<NoiseConfig>& noise) {
  const SampledField m2 = detector_mode(arm2.exit_spec(), det2_pose);
  const SampledField e = conditional_field(k, arm1, arm2, m2);
  std::vector<double> rates(det1_scan.size());
  parallel_for(det1_scan.size(), [&](std::size_t i) {
    const double rate = brightness * detector_power(e, det1_scan[i]);
    rates[i] = corrected_coincidences(rate, noise, i);
  });
  return rates;
}

}  // namespace awp
