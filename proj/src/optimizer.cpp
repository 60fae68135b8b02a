#include "awp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "awp/parallel.hpp"

namespace awp {
namespace {

struct Arms {
  OpticalArm scan;
  OpticalArm fixed;
};

Arms build_arms(const ShapingSystem& sys, const SlmPattern& pattern) {
  const std::vector<Element> slm{slm_to_mask(pattern, sys.slm_plane)};
  return {sys.scan_tail.with_prefix(slm), sys.slm_in_fixed_arm ? sys.fixed_tail.with_prefix(slm) : sys.fixed_tail};
}

SampledField feedback_field(const ShapingSystem& sys, Feedback feedback, const SlmPattern& pattern) {
  return feedback == Feedback::KlyshkoPower ? advanced_field(sys, pattern) : heralded_field(sys, pattern);
}

double reading(double signal, const CostConfig& cfg, std::uint64_t stream) {
  if (!cfg.noise) return signal;
  return corrected_coincidences(cfg.noise->brightness * signal, cfg.noise, stream);
}

/// Least-squares harmonic model on equally spaced samples.
struct HarmonicFit {
  double a = 0.0, b1 = 0.0, c1 = 0.0, b2 = 0.0, c2 = 0.0;

  double operator()(double phi) const {
    return a + b1 * std::cos(phi) + c1 * std::sin(phi) + b2 * std::cos(2.0 * phi) + c2 * std::sin(2.0 * phi);
  }
};

HarmonicFit fit_harmonics(const std::vector<double>& phases, const std::vector<double>& y) {
  const double k = static_cast<double>(y.size());
  HarmonicFit f;
  for (std::size_t i = 0; i < y.size(); ++i) {
    f.a += y[i] / k;
    f.b1 += 2.0 * y[i] * std::cos(phases[i]) / k;
    f.c1 += 2.0 * y[i] * std::sin(phases[i]) / k;
    if (y.size() >= 5) {
      f.b2 += 2.0 * y[i] * std::cos(2.0 * phases[i]) / k;
      f.c2 += 2.0 * y[i] * std::sin(2.0 * phases[i]) / k;
    }
  }
  return f;
}

double fitted_maximum(const HarmonicFit& f) {
  constexpr int kGrid = 720;
  const double h = kTwoPi / kGrid;
  int best = 0;
  double best_val = f(0.0);
  for (int i = 1; i < kGrid; ++i) {
    const double v = f(i * h);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  // Parabolic refinement through the neighbours.
  const double ym = f((best - 1) * h), y0 = best_val, yp = f((best + 1) * h);
  const double denom = ym - 2.0 * y0 + yp;
  double shift = 0.0;
  if (denom < 0.0) shift = std::clamp(0.5 * (ym - yp) / denom, -1.0, 1.0);
  return wrap_phase((best + shift) * h);
}

}  // namespace

OpticalArm scan_arm(const ShapingSystem& sys, const SlmPattern& pattern) { return build_arms(sys, pattern).scan; }

OpticalArm fixed_arm(const ShapingSystem& sys, const SlmPattern& pattern) { return build_arms(sys, pattern).fixed; }

KlyshkoScene klyshko_scene(const ShapingSystem& sys, const SlmPattern& pattern, Readout readout) {
  Arms arms = build_arms(sys, pattern);
  return KlyshkoScene{detector_mode(arms.fixed.exit_spec(), sys.fixed_pose), std::move(arms.fixed),
                      std::move(arms.scan), sys.klyshko_crystal, std::move(readout)};
}

SampledField advanced_field(const ShapingSystem& sys, const SlmPattern& pattern) {
  return klyshko_field(klyshko_scene(sys, pattern));
}

SampledField heralded_field(const ShapingSystem& sys, const SlmPattern& pattern) {
  const Arms arms = build_arms(sys, pattern);
  return conditional_field(sys.source_crystal, arms.scan, arms.fixed,
                           detector_mode(arms.fixed.exit_spec(), sys.fixed_pose));
}

double two_spot_cost(double a, double b, double alpha) {
  if (alpha < 0.0) throw ConfigError("two-spot penalty slope must be non-negative");
  const double top = std::max(a, b);
  if (top <= 0.0) return a + b;
  const double x = 100.0 * std::abs(a - b) / top;
  return (a + b) * (1.0 - alpha * x / 100.0);
}

double spot_signal(const ShapingSystem& sys, Feedback feedback, const SlmPattern& pattern, const DetectorPose& pose) {
  return detector_power(feedback_field(sys, feedback, pattern), pose);
}

double evaluate_cost(const ShapingSystem& sys, const CostConfig& cfg, const SlmPattern& pattern,
                     std::uint64_t stream) {
  const SampledField field = feedback_field(sys, cfg.feedback, pattern);
  if (const auto* one = std::get_if<SingleSpot>(&cfg.kind))
    return reading(detector_power(field, one->pose), cfg, stream);
  const auto& two = std::get<TwoSpot>(cfg.kind);
  const double a = reading(detector_power(field, two.pose_a), cfg, 2 * stream);
  const double b = reading(detector_power(field, two.pose_b), cfg, 2 * stream + 1);
  return two_spot_cost(a, b, two.alpha);
}

OptimizationTrace sequential_optimize(const Objective& objective, SlmPattern initial,
                                      const OptimizerOptions& options) {
  if (options.phase_steps < 3) throw ConfigError("sequential optimization needs at least 3 phase steps");
  if (options.passes < 1) throw ConfigError("sequential optimization needs at least one pass");
  const int k = options.phase_steps;
  std::vector<double> phases(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) phases[static_cast<std::size_t>(i)] = kTwoPi * i / k;

  OptimizationTrace trace;
  trace.final_pattern = std::move(initial);
  const auto check = [&](double v, const char* what) {
    if (!std::isfinite(v)) throw OptimizationError(fmt::format("non-finite cost while {}", what), trace);
  };

  double best = objective(trace.final_pattern, 0);
  check(best, "evaluating the initial pattern");
  trace.initial_cost = best;

  const int segments = trace.final_pattern.layout.active_count();
  std::uint64_t stream = 1;
  int step = 0;
  for (int pass = 0; pass < options.passes; ++pass) {
    for (int seg = 0; seg < segments; ++seg, ++step) {
      StepRecord rec;
      rec.step = step;
      rec.pass = pass;
      rec.segment = seg;
      rec.tested_phases = phases;
      rec.costs.assign(phases.size(), 0.0);
      const SlmPattern& current = trace.final_pattern;
      const std::uint64_t base = stream;
      parallel_for(phases.size(), [&](std::size_t i) {
        rec.costs[i] = objective(set_segment(current, seg, phases[i]), base + i);
      });
      stream += phases.size() + 1;
      for (double c : rec.costs) check(c, "sampling segment phases");

      const HarmonicFit fit = fit_harmonics(phases, rec.costs);
      rec.fitted_phase = fitted_maximum(fit);
      rec.predicted = fit(rec.fitted_phase);
      const double previous = current.phases[static_cast<std::size_t>(seg)];
      if (rec.predicted > best) {
        SlmPattern candidate = set_segment(current, seg, rec.fitted_phase);
        if (options.noisy) {
          rec.accepted = true;
          best = rec.predicted;
        } else {
          const double actual = objective(candidate, stream - 1);
          check(actual, "re-measuring the fitted optimum");
          if (actual > best) {
            rec.accepted = true;
            best = actual;
          }
        }
        if (rec.accepted) trace.final_pattern = std::move(candidate);
      }
      rec.chosen_phase = rec.accepted ? rec.fitted_phase : previous;
      rec.best_so_far = best;
      trace.steps.push_back(std::move(rec));
    }
  }
  trace.final_cost = best;
  return trace;
}

OptimizationTrace sequential_optimize(const ShapingSystem& sys, const CostConfig& cfg, SlmPattern initial,
                                      int phase_steps, int passes) {
  const Objective objective = [&](const SlmPattern& p, std::uint64_t stream) {
    return evaluate_cost(sys, cfg, p, stream);
  };
  return sequential_optimize(objective, std::move(initial),
                             OptimizerOptions{phase_steps, passes, cfg.noise.has_value()});
}

double enhancement(double optimized_value, double speckle_mean_before) {
  if (!(speckle_mean_before > 0.0)) throw ConfigError("enhancement needs a positive speckle baseline");
  return optimized_value / speckle_mean_before;
}

double efficiency(double optimized_value, double no_diffuser_value) {
  if (!(no_diffuser_value > 0.0)) throw ConfigError("efficiency needs a positive no-diffuser reference");
  return optimized_value / no_diffuser_value;
}

void write_trace_csv(std::ostream& os, const OptimizationTrace& trace) {
  os << "step,pass,segment,chosen_phase,cost\n";
  for (const auto& r : trace.steps)
    fmt::print(os, "{},{},{},{:.17g},{:.17g}\n", r.step, r.pass, r.segment, r.chosen_phase, r.best_so_far);
}

}  // namespace awp
