#include "awp/diffusers.hpp"

#include <algorithm>
#include <cmath>

#include "awp/errors.hpp"
#include "awp/fft.hpp"
#include "awp/rng.hpp"

namespace awp {
namespace {

std::vector<double> white_noise(const GridSpec& spec, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(spec.size());
  for (auto& v : w) v = normal(rng);
  return w;
}

// Spectral filter whose autocorrelation is exp(-r^2 / l^2), scaled to unit
// pointwise variance.
std::vector<double> screen_filter(const GridSpec& spec, double corr_len) {
  std::vector<double> h(spec.size());
  const double a = kPi * kPi * corr_len * corr_len / 2.0;
  const double inv_x = 1.0 / spec.extent_x();
  const double inv_y = spec.is_1d() ? 0.0 : 1.0 / spec.extent_y();
  double power = 0.0;
  for (int j = 0; j < spec.n_y; ++j) {
    const double ny = spec.is_1d() ? 0.0 : fft::signed_index(j, spec.n_y) * inv_y;
    for (int i = 0; i < spec.n_x; ++i) {
      const double nx = fft::signed_index(i, spec.n_x) * inv_x;
      const double v = std::exp(-a * (nx * nx + ny * ny));
      h[static_cast<std::size_t>(j) * spec.n_x + i] = v;
      power += v * v;
    }
  }
  const double norm = 1.0 / std::sqrt(power / static_cast<double>(spec.size()));
  for (auto& v : h) v *= norm;
  return h;
}

std::vector<double> filtered_phase(const GridSpec& spec, const std::vector<double>& noise,
                                   const std::vector<double>& filter, double stdev) {
  std::vector<cplx> buf(noise.begin(), noise.end());
  fft::transform(buf, spec.n_x, spec.n_y, fft::Direction::Forward);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= filter[i];
  fft::transform(buf, spec.n_x, spec.n_y, fft::Direction::Inverse);
  const double scale = stdev / static_cast<double>(spec.size());
  std::vector<double> phi(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) phi[i] = buf[i].real() * scale;
  return phi;
}

void check_resolvable(const GridSpec& spec, double corr_len) {
  if (!(corr_len >= 2.0 * spec.pitch))
    throw SamplingError("screen correlation length must span at least two samples");
}

// Mean far-field intensity along the x angle axis for a set of noise draws.
std::vector<double> mean_envelope(const GridSpec& spec, const std::vector<std::vector<double>>& noises,
                                  double corr_len, double stdev) {
  const auto filter = screen_filter(spec, corr_len);
  std::vector<double> env(spec.n_x, 0.0);
  for (const auto& noise : noises) {
    const auto phi = filtered_phase(spec, noise, filter, stdev);
    std::vector<cplx> buf(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) buf[i] = std::polar(1.0, phi[i]);
    fft::transform(buf, spec.n_x, spec.n_y, fft::Direction::Forward);
    for (int i = 0; i < spec.n_x; ++i) {
      env[i] += std::norm(buf[i]);  // row of zero y-frequency
      if (!spec.is_1d() && spec.n_y == spec.n_x) env[i] += std::norm(buf[static_cast<std::size_t>(i) * spec.n_x]);
    }
  }
  return env;
}

double envelope_hwhm(const GridSpec& spec, std::vector<double> env) {
  const int n = spec.n_x;
  env[0] = 0.5 * (env[1] + env[n - 1]);  // drop the ballistic bin
  // Symmetrize over +/- frequency and smooth over 5 bins.
  const int half = n / 2;
  std::vector<double> sym(half);
  for (int k = 0; k < half; ++k) sym[k] = 0.5 * (env[k] + env[(n - k) % n]);
  std::vector<double> smooth(half);
  for (int k = 0; k < half; ++k) {
    double s = 0.0;
    for (int d = -2; d <= 2; ++d) s += sym[std::abs(k + d) < half ? std::abs(k + d) : half - 1];
    smooth[k] = s / 5.0;
  }
  const double peak = smooth[0];
  const double dtheta = spec.wavelength / spec.extent_x();
  for (int k = 1; k < half; ++k) {
    if (smooth[k] < 0.5 * peak) {
      const double t = (smooth[k - 1] - 0.5 * peak) / (smooth[k - 1] - smooth[k]);
      return (k - 1 + t) * dtheta;
    }
  }
  return half * dtheta;
}

std::vector<std::vector<double>> noise_set(const GridSpec& spec, int n_seeds, std::uint64_t master) {
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(n_seeds));
  for (int s = 0; s < n_seeds; ++s) out.push_back(white_noise(spec, screen_seed(master, static_cast<std::uint64_t>(s))));
  return out;
}

}  // namespace

std::uint64_t screen_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(master_seed ^ mix64(index + 1));
}

Mask make_phase_screen(const GridSpec& spec, const ScreenParams& params) {
  check_resolvable(spec, params.correlation_length);
  if (!(params.phase_stdev >= 0.0)) throw ConfigError("phase stdev must be non-negative");
  SampledField t(spec, "diffuser");
  if (params.phase_stdev == 0.0) {
    for (auto& v : t.data()) v = 1.0;
    return Mask{std::move(t)};
  }
  const auto phi = filtered_phase(spec, white_noise(spec, params.seed),
                                  screen_filter(spec, params.correlation_length), params.phase_stdev);
  for (std::size_t i = 0; i < phi.size(); ++i) t.data()[i] = std::polar(1.0, phi[i]);
  return Mask{std::move(t)};
}

double measure_divergence(const GridSpec& spec, double correlation_length, double phase_stdev, int n_seeds,
                          std::uint64_t master_seed) {
  check_resolvable(spec, correlation_length);
  const auto noises = noise_set(spec, n_seeds, master_seed);
  return envelope_hwhm(spec, mean_envelope(spec, noises, correlation_length, phase_stdev));
}

double calibrate_divergence(const GridSpec& spec, double target_half_angle, double phase_stdev, int n_seeds,
                            std::uint64_t master_seed) {
  if (!(target_half_angle > 0.0) || target_half_angle >= spec.angular_nyquist())
    throw CalibrationError("target divergence is not below the grid angular Nyquist limit");
  if (!(phase_stdev > 0.0)) throw CalibrationError("a zero-strength screen has no divergence");
  const auto noises = noise_set(spec, std::max(n_seeds, 32), master_seed);
  auto measure = [&](double l) { return envelope_hwhm(spec, mean_envelope(spec, noises, l, phase_stdev)); };

  // Strong-screen estimate: HWHM ~ sqrt(2 ln 2) * sqrt(2) sigma lambda / (2 pi l).
  const double guess = std::sqrt(4.0 * std::log(2.0)) * phase_stdev * spec.wavelength / (kTwoPi * target_half_angle);
  const double l_min = 2.0 * spec.pitch;
  const double l_max = 0.25 * spec.extent_x();
  double lo = std::clamp(guess / 4.0, l_min, l_max);
  double hi = std::clamp(guess * 4.0, l_min, l_max);
  while (measure(lo) < target_half_angle && lo > l_min) lo = std::max(l_min, lo / 2.0);
  while (measure(hi) > target_half_angle && hi < l_max) hi = std::min(l_max, hi * 2.0);
  if (measure(lo) < target_half_angle || measure(hi) > target_half_angle)
    throw CalibrationError("target divergence cannot be bracketed on this grid");

  double best = std::sqrt(lo * hi);
  for (int it = 0; it < 60; ++it) {
    best = std::sqrt(lo * hi);
    const double m = measure(best);
    if (std::abs(m - target_half_angle) <= 0.005 * target_half_angle) break;
    (m > target_half_angle ? lo : hi) = best;
  }
  return best;
}

std::vector<Element> thick_diffuser_elements(const ThickDiffuser& td, const GridSpec& spec) {
  if (!(td.gap >= 0.0)) throw ConfigError("diffuser gap must be non-negative");
  return {make_phase_screen(spec, td.screen_a), FreeSpace{td.gap}, make_phase_screen(spec, td.screen_b)};
}

}  // namespace awp
