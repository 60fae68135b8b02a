#include "awp/memory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "awp/parallel.hpp"

namespace awp {
namespace {

double residual(const MemoryScan& scan, double theta0) {
  double s = 0.0;
  for (std::size_t i = 0; i < scan.ratios.size(); ++i) {
    const double d = scan.ratios[i] - memory_model(scan.delta_thetas[i], theta0);
    s += d * d;
  }
  return s;
}

double probe(const ShapingSystem& sys, const SlmPattern& pattern, const DetectorPose& target, double delta,
             ScanConfiguration configuration) {
  ShapingSystem moved = sys;
  DetectorPose t = target;
  switch (configuration) {
    case ScanConfiguration::Classical:
    case ScanConfiguration::Quantum:
      moved.fixed_pose.center_x += sys.fixed_focal_length * delta;
      t.center_x -= sys.scan_focal_length * delta;
      break;
    case ScanConfiguration::CoPropagating:
      // The launched beam is the conjugate of the fixed mode, so its tilt
      // enters with the opposite sign.
      moved.fixed_pose.tilt_x -= delta;
      t.center_x += sys.scan_focal_length * delta;
      break;
  }
  const Feedback fb = configuration == ScanConfiguration::Quantum ? Feedback::QuantumCoincidence : Feedback::KlyshkoPower;
  return spot_signal(moved, fb, pattern, t);
}

}  // namespace

double memory_model(double delta_theta, double theta0) {
  if (!(theta0 > 0.0)) throw ConfigError("memory range must be positive");
  const double x = std::abs(delta_theta / theta0);
  if (x < 1e-4) return 1.0 - x * x / 3.0;
  if (x > 700.0) return 0.0;
  const double r = x / std::sinh(x);
  return r * r;
}

std::string to_string(ScanConfiguration c) {
  switch (c) {
    case ScanConfiguration::Classical: return "classical";
    case ScanConfiguration::Quantum: return "quantum";
    case ScanConfiguration::CoPropagating: return "copropagating";
  }
  return "unknown";
}

MemoryScan memory_scan(const ShapingSystem& sys, const SlmPattern& pattern, const DetectorPose& target,
                       std::span<const double> delta_thetas, ScanConfiguration configuration) {
  MemoryScan scan;
  scan.configuration = configuration;
  scan.delta_thetas.assign(delta_thetas.begin(), delta_thetas.end());
  std::vector<double> values(delta_thetas.size() + 1);
  parallel_for(values.size(), [&](std::size_t i) {
    const double d = i == 0 ? 0.0 : delta_thetas[i - 1];
    values[i] = probe(sys, pattern, target, d, configuration);
  });
  if (!(values[0] > 0.0)) throw FitError("memory scan reference signal is zero");
  scan.ratios.resize(delta_thetas.size());
  for (std::size_t i = 0; i < delta_thetas.size(); ++i) scan.ratios[i] = values[i + 1] / values[0];
  return scan;
}

MemoryFit fit_memory(const MemoryScan& scan) {
  const std::size_t n = scan.ratios.size();
  if (n < 4 || scan.delta_thetas.size() != n) throw FitError("memory fit needs at least 4 scan points");
  if (std::none_of(scan.ratios.begin(), scan.ratios.end(), [](double r) { return r < 0.8; }))
    throw FitError("memory range exceeds scan");
  double d_min = 0.0, d_max = 0.0;
  for (double d : scan.delta_thetas) {
    const double a = std::abs(d);
    if (a > 0.0 && (d_min == 0.0 || a < d_min)) d_min = a;
    d_max = std::max(d_max, a);
  }

  auto cost = [&](double log_t) { return residual(scan, std::exp(log_t)); };
  // Coarse log-spaced sweep picks the basin, golden section refines it.
  double lo = std::log(d_min / 50.0), hi = std::log(d_max * 50.0);
  constexpr int kSweep = 200;
  int best = 0;
  double best_val = cost(lo);
  for (int i = 1; i <= kSweep; ++i) {
    const double v = cost(lo + (hi - lo) * i / kSweep);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double step = (hi - lo) / kSweep;
  double a = lo + step * std::max(0, best - 1), b = lo + step * std::min(kSweep, best + 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = cost(c), fd = cost(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = cost(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = cost(d);
    }
  }
  double log_t = 0.5 * (a + b);
  // Parabolic polish on the final bracket.
  {
    const double h = 1e-6;
    const double f0 = cost(log_t), fm = cost(log_t - h), fp = cost(log_t + h);
    const double curv = fm - 2.0 * f0 + fp;
    if (curv > 0.0) {
      const double cand = log_t + 0.5 * h * (fm - fp) / curv;
      if (cost(cand) < f0) log_t = cand;
    }
  }

  MemoryFit fit;
  fit.theta0 = std::exp(log_t);
  const double s_min = residual(scan, fit.theta0);
  fit.residual_rms = std::sqrt(s_min / static_cast<double>(n));
  const double h = 1e-3 * fit.theta0;
  const double s2 = (residual(scan, fit.theta0 + h) - 2.0 * s_min + residual(scan, fit.theta0 - h)) / (h * h);
  const double variance = s_min / static_cast<double>(n - 1);
  fit.theta0_uncertainty = s2 > 0.0 ? std::sqrt(2.0 * variance / s2) : 0.0;
  return fit;
}

void write_scan_csv(std::ostream& os, const MemoryScan& scan) {
  os << "delta_theta_rad,ratio,configuration\n";
  const std::string tag = to_string(scan.configuration);
  for (std::size_t i = 0; i < scan.ratios.size(); ++i)
    fmt::print(os, "{:.17g},{:.17g},{}\n", scan.delta_thetas[i], scan.ratios[i], tag);
}

void write_fit_record(std::ostream& os, const MemoryFit& fit, ScanConfiguration configuration) {
  fmt::print(os,
             "{{\"configuration\": \"{}\", \"theta0_rad\": {:.17g}, \"theta0_uncertainty_rad\": {:.17g}, "
             "\"residual_rms\": {:.17g}}}\n",
             to_string(configuration), fit.theta0, fit.theta0_uncertainty, fit.residual_rms);
}

}  // namespace awp
