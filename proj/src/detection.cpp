#include "awp/detection.hpp"

#include <cmath>
#include <random>

#include "awp/errors.hpp"
#include "awp/rng.hpp"

namespace awp {
namespace {

void require_on_grid(const GridSpec& spec, const DetectorPose& pose) {
  const double lo_x = spec.x(0), hi_x = spec.x(spec.n_x - 1);
  bool ok = pose.center_x >= lo_x && pose.center_x <= hi_x;
  if (!spec.is_1d()) ok = ok && pose.center_y >= spec.y(0) && pose.center_y <= spec.y(spec.n_y - 1);
  if (!ok) throw ShapeError("detector pose lies outside the detector-plane grid");
}

}  // namespace

void validate(const NoiseConfig& cfg) {
  if (!(cfg.integration_time > 0.0) || cfg.singles_rate_1 < 0.0 || cfg.singles_rate_2 < 0.0 ||
      cfg.coincidence_window < 0.0 || cfg.brightness < 0.0)
    throw ConfigError("noise parameters must be non-negative with positive integration time");
  if (!(cfg.coincidence_window < 1e-3 * cfg.integration_time))
    throw ConfigError("coincidence window must be much shorter than the integration time");
}

SampledField detector_mode(const GridSpec& spec, const DetectorPose& pose) {
  require_on_grid(spec, pose);
  return gaussian_mode(spec, pose.size, pose.center_x, pose.tilt_x, pose.center_y, 0.0);
}

double smf_power(const SampledField& field, const DetectorPose& pose) {
  if (pose.kind != FiberKind::SingleMode) throw ConfigError("smf_power needs a single-mode pose");
  return std::norm(overlap(detector_mode(field.spec(), pose), field));
}

double mmf_power(const SampledField& field, const DetectorPose& pose) {
  if (pose.kind != FiberKind::MultiMode) throw ConfigError("mmf_power needs a multimode pose");
  const GridSpec& s = field.spec();
  if (pose.size == 0.0) return 0.0;
  if (!(pose.size >= 4.0 * s.pitch)) throw SamplingError("multimode core spans fewer than 4 samples");
  require_on_grid(s, pose);
  const double r2 = 0.25 * pose.size * pose.size;
  double sum = 0.0;
  for (int j = 0; j < s.n_y; ++j) {
    const double dy = s.is_1d() ? 0.0 : s.y(j) - pose.center_y;
    for (int i = 0; i < s.n_x; ++i) {
      const double dx = s.x(i) - pose.center_x;
      if (dx * dx + dy * dy <= r2) sum += std::norm(field(i, j));
    }
  }
  return sum * s.cell_area();
}

double detector_power(const SampledField& field, const DetectorPose& pose) {
  return pose.kind == FiberKind::SingleMode ? smf_power(field, pose) : mmf_power(field, pose);
}

std::int64_t sample_counts(double mean_rate, const NoiseConfig& cfg, std::uint64_t stream) {
  if (!(mean_rate >= 0.0)) throw ConfigError("mean count rate must be non-negative");
  const double mean = mean_rate * cfg.integration_time;
  if (mean == 0.0) return 0;
  Rng rng = make_stream(cfg.seed, stream);
  std::poisson_distribution<std::int64_t> poisson(mean);
  return poisson(rng);
}

double corrected_coincidences(double true_rate, const std::optional<NoiseConfig>& cfg, std::uint64_t stream) {
  if (!cfg) return true_rate;
  const double acc = cfg->accidental_rate();
  const auto raw = sample_counts(std::max(0.0, true_rate) + acc, *cfg, stream);
  return static_cast<double>(raw) / cfg->integration_time - acc;
}

}  // namespace awp
