#include <doctest.h>

#include <cmath>

#include "awp/detection.hpp"
#include "awp/errors.hpp"

using namespace awp;

TEST_CASE("single-mode coupling") {
  const auto g = make_grid(512, 1, 5e-6, 810e-9);
  const double w = 40e-6;
  const auto pose = DetectorPose::smf(50e-6, w);
  const auto mode = detector_mode(g, pose);
  CHECK(smf_power(mode, pose) == doctest::Approx(1.0).epsilon(1e-12));
  SampledField odd(g);
  for (int i = 0; i < g.n_x; ++i) odd(i) = (g.x(i) - 50e-6) * mode(i);
  CHECK(smf_power(odd, pose) < 1e-24);
  CHECK(smf_power(detector_mode(g, pose.moved(4 * w)), pose) < 1e-6);
  CHECK_THROWS_AS(detector_mode(g, DetectorPose::smf(2e-3, w)), ShapeError);
}

TEST_CASE("multimode bucket") {
  const auto g = make_grid(256, 256, 5e-6, 810e-9);
  SampledField ones(g, std::vector<cplx>(g.size(), 1.0));
  const double d = 100e-6;
  double area = 0;  // samples whose centers fall in the disk
  for (int j = 0; j < g.n_y; ++j)
    for (int i = 0; i < g.n_x; ++i)
      if (g.x(i) * g.x(i) + g.y(j) * g.y(j) <= 0.25 * d * d) area += g.cell_area();
  CHECK(mmf_power(ones, DetectorPose::mmf(0, d)) == doctest::Approx(area));
  CHECK(area == doctest::Approx(kPi * d * d / 4).epsilon(0.05));

  const auto spot = gaussian_mode(g, 15e-6);
  CHECK(mmf_power(spot, DetectorPose::mmf(0, 400e-6)) == doctest::Approx(spot.energy()).epsilon(1e-9));
  CHECK(mmf_power(spot, DetectorPose::mmf(0, 0.0)) == 0.0);
  const double on = mmf_power(spot, DetectorPose::mmf(0, 50e-6));
  const double off = mmf_power(spot, DetectorPose::mmf(100e-6, 50e-6));
  CHECK(on / off > 100.0);
  CHECK_THROWS_AS(mmf_power(spot, DetectorPose::mmf(0, 10e-6)), SamplingError);
}

TEST_CASE("photon counting") {
  NoiseConfig cfg;
  cfg.seed = 17;
  CHECK(sample_counts(0.0, cfg, 0) == 0);
  double sum = 0;
  for (int s = 0; s < 1000; ++s) sum += sample_counts(1e6, cfg, s);
  CHECK(std::abs(sum / 1000 - 1e6) < 3e3);
  CHECK(sample_counts(1e3, cfg, 5) == sample_counts(1e3, cfg, 5));

  cfg.singles_rate_1 = cfg.singles_rate_2 = 1e5;
  CHECK(cfg.accidental_rate() == doctest::Approx(20.0));
  cfg.singles_rate_1 = cfg.singles_rate_2 = 1e6;  // 2000 accidentals/s
  double mean = 0;
  const int n = 4000;
  for (int s = 0; s < n; ++s) mean += corrected_coincidences(0.0, cfg, s);
  mean /= n;
  CHECK(std::abs(mean) < 4 * std::sqrt(2000.0 / n));
  CHECK(corrected_coincidences(123.5, std::nullopt, 0) == 123.5);

  NoiseConfig bad;
  bad.integration_time = -1;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}
