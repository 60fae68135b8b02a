#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "awp/optimizer.hpp"

namespace awp {

/// [(d / theta0) / sinh(d / theta0)]^2, with value 1 at d = 0.
double memory_model(double delta_theta, double theta0);

enum class ScanConfiguration { Classical, Quantum, CoPropagating };

std::string to_string(ScanConfiguration c);

struct MemoryScan {
  std::vector<double> delta_thetas;  ///< [rad]
  std::vector<double> ratios;        ///< I(delta) / I(0)
  ScanConfiguration configuration = ScanConfiguration::Classical;
};

struct MemoryFit {
  double theta0 = 0.0;              ///< [rad]
  double theta0_uncertainty = 0.0;  ///< [rad]
  double residual_rms = 0.0;
};

/// Shifted-focus ratios for a fixed SLM pattern.
///
/// Classical and Quantum move the fixed fiber by +delta (f_fixed delta on
/// its plane) and the target by -delta, reading Klyshko power or the
/// heralded coincidence signal. CoPropagating expects a single-pass
/// beacon system: the beacon is tilted by +delta and the target follows
/// by +delta. Throws ShapeError when a shifted pose leaves its grid.
MemoryScan memory_scan(const ShapingSystem& sys, const SlmPattern& pattern, const DetectorPose& target,
                       std::span<const double> delta_thetas, ScanConfiguration configuration);

/// One-parameter least-squares fit of memory_model. Golden-section search
/// in log theta0, parabolic polish; the uncertainty comes from the
/// residual curvature scaled by the residual variance. Throws FitError
/// with fewer than 4 points or when no ratio drops below 0.8 ("memory
/// range exceeds scan").
MemoryFit fit_memory(const MemoryScan& scan);

/// CSV: delta_theta_rad,ratio,configuration
void write_scan_csv(std::ostream& os, const MemoryScan& scan);

/// {"configuration": ..., "theta0_rad": ..., "theta0_uncertainty_rad": ..., "residual_rms": ...}
void write_fit_record(std::ostream& os, const MemoryFit& fit, ScanConfiguration configuration);

}  // namespace awp
