#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "awp/elements.hpp"

namespace awp {

/// Square tiling of the pupil bounding box [-R, R]^2 (an interval in 1-D,
/// rows == 1). Only `active` cells carry a controllable phase; together
/// they form the virtual-pinhole aperture.
struct SlmLayout {
  int rows = 1;
  int cols = 1;
  double pupil_radius = 0.0;  ///< [m], half-size of the tiled box
  std::vector<int> active;    ///< cell indices (row * cols + col), row-major order

  int active_count() const { return static_cast<int>(active.size()); }
};

/// Activates the `active_count` cells nearest the pupil center (ties broken
/// row-major). active_count <= 0 activates every cell.
SlmLayout make_layout(int rows, int cols, double pupil_radius, int active_count = 0);

/// Layout used for the 2-D scenarios: 21 x 21 cells, 363 active.
SlmLayout default_layout_2d(double pupil_radius);

struct SlmPattern {
  SlmLayout layout;
  std::vector<double> phases;  ///< per active segment, wrapped to [0, 2 pi)
  bool pinhole = false;
  double tilt_inside = 0.0;   ///< [rad/m] linear phase gradient along x on the aperture
  double tilt_outside = 0.0;  ///< [rad/m] gradient outside it
};

/// Flat pattern. With pinhole enabled the tilts must differ.
SlmPattern make_pattern(SlmLayout layout, bool pinhole = false, double tilt_inside = 0.0,
                        double tilt_outside = 0.0);

double wrap_phase(double phi);

/// Returns a copy with segment `index` (position in layout.active) set to
/// wrap(phase). Throws ConfigError when index is out of range.
SlmPattern set_segment(const SlmPattern& pattern, int index, double phase);

/// Phase-only mask: segment phase + tilt_inside * x on active cells,
/// tilt_outside * x elsewhere (no tilts without pinhole). Throws
/// ConfigError when the pupil box exceeds the grid or an active cell
/// covers no sample.
Mask slm_to_mask(const SlmPattern& pattern, const GridSpec& spec);

/// Cell index of each sample, or -1 outside the tiled box.
std::vector<int> cell_map(const SlmLayout& layout, const GridSpec& spec);

/// Text format: '#'-prefixed `key value` header lines, then one
/// `segment_index phase_radians` line per active segment.
void save_pattern(std::ostream& os, const SlmPattern& pattern);
SlmPattern load_pattern(std::istream& is);

}  // namespace awp
