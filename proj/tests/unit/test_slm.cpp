#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "awp/errors.hpp"
#include "awp/slm.hpp"

using namespace awp;

TEST_CASE("flat pattern without tilts is the identity") {
  const auto g = make_grid(256, 1, 8e-6, 810e-9);
  const auto m = slm_to_mask(make_pattern(make_layout(1, 64, 1.024e-3)), g);
  for (const auto& v : m.transmission.data()) CHECK(std::abs(v - cplx(1.0)) < 1e-15);
}

TEST_CASE("default 2-D layout has 363 distinct segments") {
  const auto g = make_grid(256, 256, 10e-6, 810e-9);
  const auto layout = default_layout_2d(1.05e-3);
  REQUIRE(layout.active_count() == 363);
  auto p = make_pattern(layout);
  for (int s = 0; s < 363; ++s) p = set_segment(p, s, 0.01 * (s + 1));
  const auto mask = slm_to_mask(p, g);
  std::set<long> phases;
  for (const auto& v : mask.transmission.data()) {
    const double ph = std::arg(v);
    if (std::abs(ph) > 1e-9) phases.insert(std::lround(ph * 1e6));
  }
  CHECK(phases.size() == 363);
  // central cells are active, corners are not
  const auto& a = layout.active;
  CHECK(std::find(a.begin(), a.end(), 10 * 21 + 10) != a.end());
  CHECK(std::find(a.begin(), a.end(), 0) == a.end());
}

TEST_CASE("pinhole separates pupil and outside light by 2 f tilt") {
  const auto g = make_grid(2048, 1, 4e-6, 810e-9);
  const double k = g.wavenumber(), f = 0.1, theta = 3e-3;
  const auto p = make_pattern(make_layout(1, 16, 0.5e-3), true, k * theta, -k * theta);
  const auto mask = slm_to_mask(p, g);
  SampledField beam = gaussian_mode(g, 1.5e-3);
  const auto out = farfield(beam.times(mask.transmission), f);
  // peaks on each side of the axis
  int left = 0, right = g.n_x - 1;
  double lmax = 0, rmax = 0;
  for (int i = 0; i < out.spec().n_x; ++i) {
    const double v = std::norm(out(i));
    if (out.spec().x(i) < 0 && v > lmax) lmax = v, left = i;
    if (out.spec().x(i) > 0 && v > rmax) rmax = v, right = i;
  }
  const double sep = out.spec().x(right) - out.spec().x(left);
  CHECK(sep == doctest::Approx(2 * f * theta).epsilon(0.03));
}

TEST_CASE("segment phases wrap, read back and commute") {
  const auto layout = make_layout(1, 8, 1e-3);
  auto p = make_pattern(layout);
  p = set_segment(p, 3, 1.25);
  CHECK(p.phases[3] == doctest::Approx(1.25));
  CHECK(set_segment(p, 2, 0.7 + kTwoPi).phases[2] == doctest::Approx(set_segment(p, 2, 0.7).phases[2]));
  CHECK(wrap_phase(-0.5) == doctest::Approx(kTwoPi - 0.5));
  CHECK(wrap_phase(kTwoPi) == 0.0);
  const auto ab = set_segment(set_segment(p, 1, 0.3), 5, 2.0);
  const auto ba = set_segment(set_segment(p, 5, 2.0), 1, 0.3);
  CHECK(ab.phases == ba.phases);
  CHECK_THROWS_AS(set_segment(p, 8, 0.0), ConfigError);
}

TEST_CASE("pattern file round trip") {
  auto p = make_pattern(make_layout(3, 3, 1e-3, 5), true, 10.0, -20.0);
  for (int s = 0; s < 5; ++s) p = set_segment(p, s, 0.5 * s + 0.123456789);
  std::stringstream ss;
  save_pattern(ss, p);
  const auto q = load_pattern(ss);
  CHECK(q.layout.active == p.layout.active);
  CHECK(q.pinhole);
  CHECK(q.tilt_inside == p.tilt_inside);
  for (int s = 0; s < 5; ++s) CHECK(q.phases[s] == p.phases[s]);
}

TEST_CASE("pupil must fit the grid") {
  const auto g = make_grid(64, 1, 8e-6, 810e-9);
  CHECK_THROWS_AS(slm_to_mask(make_pattern(make_layout(1, 8, 1e-3)), g), ConfigError);
  CHECK_THROWS(make_pattern(make_layout(1, 8, 1e-4), true, 1.0, 1.0));
}
