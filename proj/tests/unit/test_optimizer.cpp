#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "awp/errors.hpp"
#include "awp/optimizer.hpp"
#include "awp/rng.hpp"
#include "awp/scenarios.hpp"

using namespace awp;

TEST_CASE("two-spot cost arithmetic") {
  CHECK(two_spot_cost(1.0, 0.5, 0.2) == doctest::Approx(1.35));
  CHECK(two_spot_cost(0.7, 0.7, 0.2) == doctest::Approx(1.4));
  CHECK(two_spot_cost(1.0, 0.5, 0.0) == doctest::Approx(1.5));
  CHECK(two_spot_cost(0.0, 0.0, 0.2) == 0.0);
  CHECK_THROWS_AS(two_spot_cost(1.0, 0.5, -0.1), ConfigError);
}

TEST_CASE("enhancement and efficiency") {
  CHECK(enhancement(5.0, 0.25) == doctest::Approx(20.0));
  CHECK(enhancement(3.0, 3.0) == 1.0);
  CHECK(efficiency(0.07, 1.0) == doctest::Approx(0.07));
  CHECK_THROWS_AS(enhancement(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(efficiency(1.0, -1.0), ConfigError);
}

TEST_CASE("sequential optimization of a synthetic coherent sum") {
  // cost = |sum_s exp(i (phi_s + a_s))|^2, maximal when all terms align
  const int n = 32;
  Rng rng = make_stream(42, 0);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<double> offsets(n);
  for (auto& a : offsets) a = u(rng);
  const Objective obj = [&](const SlmPattern& p, std::uint64_t) {
    cplx s = 0.0;
    for (int i = 0; i < n; ++i) s += std::polar(1.0, p.phases[i] + offsets[i]);
    return std::norm(s);
  };
  const auto start = make_pattern(make_layout(1, n, 1e-3));
  const auto trace = sequential_optimize(obj, start, OptimizerOptions{8, 2, false});
  CHECK(trace.final_cost == doctest::Approx(n * n).epsilon(1e-3));
  CHECK(trace.steps.size() == static_cast<std::size_t>(2 * n));
  for (std::size_t i = 1; i < trace.steps.size(); ++i)
    CHECK(trace.steps[i].best_so_far >= trace.steps[i - 1].best_so_far);

  const auto tr3 = sequential_optimize(obj, start, OptimizerOptions{3, 2, false});
  CHECK(tr3.final_cost > 0.95 * n * n);
}

TEST_CASE("optimizer argument and failure handling") {
  const auto start = make_pattern(make_layout(1, 4, 1e-3));
  const Objective flat = [](const SlmPattern&, std::uint64_t) { return 1.0; };
  CHECK_THROWS_AS(sequential_optimize(flat, start, OptimizerOptions{2, 1, false}), ConfigError);
  CHECK_THROWS_AS(sequential_optimize(flat, start, OptimizerOptions{8, 0, false}), ConfigError);

  int calls = 0;
  const Objective breaks = [&](const SlmPattern&, std::uint64_t) {
    return ++calls > 6 ? std::nan("") : 1.0;
  };
  try {
    sequential_optimize(breaks, start, OptimizerOptions{4, 1, false});
    FAIL("expected OptimizationError");
  } catch (const OptimizationError& e) {
    CHECK(!e.trace().steps.empty());
  }
}

TEST_CASE("nothing to gain without a diffuser") {
  auto cfg = default_config("fig3_optimize");
  cfg.scan_arm.elements = {{ElementSpec::Kind::Lens, "", 0.1}};
  cfg.fixed_arm.elements = {{ElementSpec::Kind::Lens, "", 0.1}};
  cfg.target.size_m = 50e-6;
  const Setup s = build_setup(cfg, 0);
  const auto trace = sequential_optimize(s.system, CostConfig{SingleSpot{s.target}, Feedback::KlyshkoPower, std::nullopt},
                                         s.initial);
  CHECK(trace.final_cost / trace.initial_cost == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("speckle, focus and refocus in the Klyshko camera image") {
  const auto cfg = default_config("fig3_optimize");
  const Setup clear = build_setup(cfg, 3, false);
  const Setup s = build_setup(cfg, 3);
  auto peak_fraction = [&](const SampledField& f) {
    const auto I = f.intensity();
    return *std::max_element(I.begin(), I.end()) / (f.energy() / f.spec().cell_area());
  };
  const double focused = peak_fraction(advanced_field(clear.system, clear.initial));
  const double speckle = peak_fraction(advanced_field(s.system, s.initial));
  CHECK(focused > 10 * speckle);
  const auto trace = sequential_optimize(s.system, CostConfig{SingleSpot{s.target}, Feedback::KlyshkoPower, std::nullopt},
                                         s.initial);
  const auto after = advanced_field(s.system, trace.final_pattern);
  const auto I = after.intensity();
  const auto it = std::max_element(I.begin(), I.end());
  const double x = after.spec().x(static_cast<int>(it - I.begin()));
  CHECK(std::abs(x - s.target.center_x) <= 0.5 * s.target.size);
  CHECK(peak_fraction(after) > 5 * speckle);
}

TEST_CASE("64-segment enhancement follows the pi/4 (N - 1) scaling") {
  auto cfg = default_config("fig3_optimize");
  std::vector<double> e;
  for (std::uint64_t seed = 100; seed < 120; ++seed) e.push_back(run_optimize(cfg, seed).classical_enhancement);
  std::sort(e.begin(), e.end());
  const double median = 0.5 * (e[9] + e[10]);
  const double ideal = kPi / 4 * 63;
  CHECK(median >= 0.5 * ideal);
  CHECK(median <= 1.2 * ideal);
}

TEST_CASE("trace csv") {
  const auto start = make_pattern(make_layout(1, 2, 1e-3));
  const Objective obj = [](const SlmPattern& p, std::uint64_t) { return 2.0 + std::cos(p.phases[0] - 1.0); };
  const auto trace = sequential_optimize(obj, start, OptimizerOptions{4, 1, false});
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "step,pass,segment,chosen_phase,cost");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 2);
  CHECK(trace.steps[0].chosen_phase == doctest::Approx(1.0).epsilon(1e-3));
}
