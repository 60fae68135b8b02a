#include <doctest.h>

#include <cmath>

#include "awp/diffusers.hpp"
#include "awp/elements.hpp"
#include "awp/errors.hpp"
#include "awp/rng.hpp"

using namespace awp;

namespace {

SampledField random_field(const GridSpec& g, std::uint64_t seed) {
  Rng rng = make_stream(seed, 7);
  std::normal_distribution<double> n;
  SampledField f(g);
  for (auto& v : f.data()) v = {n(rng), n(rng)};
  return f;
}

double max_diff(const SampledField& a, const SampledField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("identity elements") {
  const auto g = make_grid(128, 1, 10e-6, 810e-9);
  const auto f = random_field(g, 1);
  CHECK(max_diff(apply_element(FreeSpace{0.0}, f, Direction::Forward), f) < 1e-12);
  CHECK(max_diff(apply_element(Mask{SampledField(g, std::vector<cplx>(g.size(), 1.0))}, f, Direction::Forward), f) <
        1e-15);
  const OpticalArm empty(g, {});
  CHECK(max_diff(arm_apply(empty, f, Direction::Forward), f) == 0.0);
  CHECK(max_diff(arm_apply(empty, f, Direction::Backward), f) == 0.0);
}

TEST_CASE("free space Gaussian spreading") {
  const auto g = make_grid(2048, 1, 5e-6, 810e-9);
  const double w0 = 50e-6, z = 0.02;
  const double zr = kPi * w0 * w0 / g.wavelength;
  const double wz = w0 * std::sqrt(1 + (z / zr) * (z / zr));
  const auto out = apply_element(FreeSpace{z}, gaussian_mode(g, w0), Direction::Forward);
  CHECK(rms_width_x(out) == doctest::Approx(wz / 2).epsilon(0.01));

  const auto g2 = make_grid(256, 256, 5e-6, 810e-9);
  const auto out2 = apply_element(FreeSpace{z}, gaussian_mode(g2, w0), Direction::Forward);
  CHECK(rms_width_x(out2) == doctest::Approx(wz / 2).epsilon(0.01));
}

TEST_CASE("mask round trip is the unconjugated transpose") {
  const auto g = make_grid(64, 1, 10e-6, 810e-9);
  Rng rng = make_stream(5, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampledField t(g);
  for (auto& v : t.data()) v = std::polar(u(rng), kTwoPi * u(rng));
  const OpticalArm arm(g, {Mask{t}});
  const auto f = random_field(g, 2);
  const auto rt = arm_apply(arm, arm_apply(arm, f, Direction::Forward), Direction::Backward);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(std::abs(rt.data()[i] - t.data()[i] * t.data()[i] * f.data()[i]) < 1e-12);
}

TEST_CASE("reciprocity of composite arms") {
  for (int dims : {1, 2}) {
    const auto g = dims == 1 ? make_grid(128, 1, 10e-6, 810e-9) : make_grid(32, 32, 20e-6, 810e-9);
    const auto s1 = make_phase_screen(g, ScreenParams{40e-6, 3.0, 11});
    auto mid = g;
    mid.pitch *= 0.5;
    const auto s2 = make_phase_screen(propagate_spec(Magnifier{0.5}, g, Direction::Forward), ScreenParams{20e-6, 3.0, 12});
    const OpticalArm arm(g, {s1, FreeSpace{0.01}, Magnifier{0.5}, s2, LensFourier{0.1}});
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const auto f = random_field(g, 100 + t);
      const auto h = random_field(arm.exit_spec(), 500 + t);
      const cplx lhs = bilinear(h, arm_apply(arm, f, Direction::Forward));
      const cplx rhs = bilinear(arm_apply(arm, h, Direction::Backward), f);
      worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("element validation") {
  const auto g = make_grid(64, 1, 10e-6, 810e-9);
  CHECK_THROWS_AS(validate(Element{FreeSpace{-1.0}}), ConfigError);
  CHECK_THROWS_AS(validate(Element{LensFourier{0.0}}), ConfigError);
  CHECK_THROWS_AS(validate(Element{Magnifier{0.0}}), ConfigError);
  const auto other = make_grid(32, 1, 10e-6, 810e-9);
  CHECK_THROWS(OpticalArm(g, {Mask{SampledField(other, std::vector<cplx>(32, 1.0))}}));
}

TEST_CASE("magnifier conserves energy") {
  const auto g = make_grid(128, 1, 10e-6, 810e-9);
  const auto f = random_field(g, 4);
  const auto out = apply_element(Magnifier{0.1}, f, Direction::Forward);
  CHECK(out.spec().pitch == doctest::Approx(1e-6));
  CHECK(out.energy() == doctest::Approx(f.energy()).epsilon(1e-12));
}
