#include "awp/slm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "awp/errors.hpp"

namespace awp {

SlmLayout make_layout(int rows, int cols, double pupil_radius, int active_count) {
  if (rows <= 0 || cols <= 0) throw ConfigError("slm layout needs positive rows and cols");
  if (!(pupil_radius > 0.0)) throw ConfigError("slm pupil radius must be positive");
  const int cells = rows * cols;
  if (active_count > cells) throw ConfigError("more active segments than layout cells");
  if (active_count <= 0) active_count = cells;

  // Distance of each cell center from the pupil center, in cell units.
  std::vector<double> dist(static_cast<std::size_t>(cells));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double dy = r - 0.5 * (rows - 1);
      const double dx = c - 0.5 * (cols - 1);
      dist[static_cast<std::size_t>(r * cols + c)] = dx * dx + dy * dy;
    }
  std::vector<int> order(static_cast<std::size_t>(cells));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });
  order.resize(static_cast<std::size_t>(active_count));
  std::sort(order.begin(), order.end());
  return SlmLayout{rows, cols, pupil_radius, std::move(order)};
}

SlmLayout default_layout_2d(double pupil_radius) { return make_layout(21, 21, pupil_radius, 363); }

SlmPattern make_pattern(SlmLayout layout, bool pinhole, double tilt_inside, double tilt_outside) {
  if (pinhole && tilt_inside == tilt_outside)
    throw ConfigError("virtual pinhole needs different inside and outside tilts");
  SlmPattern p;
  p.phases.assign(layout.active.size(), 0.0);
  p.layout = std::move(layout);
  p.pinhole = pinhole;
  p.tilt_inside = pinhole ? tilt_inside : 0.0;
  p.tilt_outside = pinhole ? tilt_outside : 0.0;
  return p;
}

double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

SlmPattern set_segment(const SlmPattern& pattern, int index, double phase) {
  if (index < 0 || index >= static_cast<int>(pattern.phases.size()))
    throw ConfigError("slm segment index out of range");
  SlmPattern out = pattern;
  out.phases[static_cast<std::size_t>(index)] = wrap_phase(phase);
  return out;
}

std::vector<int> cell_map(const SlmLayout& layout, const GridSpec& spec) {
  const double r = layout.pupil_radius;
  const double half_x = 0.5 * spec.extent_x();
  const double half_y = spec.is_1d() ? 0.0 : 0.5 * spec.extent_y();
  if (r > half_x || (!spec.is_1d() && r > half_y)) throw ConfigError("slm pupil exceeds the grid extent");
  if (spec.is_1d() && layout.rows != 1) throw ConfigError("1-D grids need a single-row slm layout");

  const double cell_w = 2.0 * r / layout.cols;
  const double cell_h = 2.0 * r / layout.rows;
  std::vector<int> map(spec.size(), -1);
  for (int j = 0; j < spec.n_y; ++j) {
    int row = 0;
    if (!spec.is_1d()) {
      const double y = spec.y(j);
      if (y < -r || y >= r) continue;
      row = std::min(layout.rows - 1, static_cast<int>(std::floor((y + r) / cell_h)));
    }
    for (int i = 0; i < spec.n_x; ++i) {
      const double x = spec.x(i);
      if (x < -r || x >= r) continue;
      const int col = std::min(layout.cols - 1, static_cast<int>(std::floor((x + r) / cell_w)));
      map[static_cast<std::size_t>(j) * spec.n_x + i] = row * layout.cols + col;
    }
  }
  return map;
}

Mask slm_to_mask(const SlmPattern& pattern, const GridSpec& spec) {
  const SlmLayout& layout = pattern.layout;
  if (pattern.phases.size() != layout.active.size()) throw ConfigError("slm phase count does not match layout");
  const auto map = cell_map(layout, spec);

  // cell index -> segment index
  std::vector<int> segment_of(static_cast<std::size_t>(layout.rows * layout.cols), -1);
  for (std::size_t s = 0; s < layout.active.size(); ++s) segment_of[layout.active[s]] = static_cast<int>(s);
  std::vector<char> covered(layout.active.size(), 0);

  SampledField t(spec, "slm");
  for (int j = 0; j < spec.n_y; ++j)
    for (int i = 0; i < spec.n_x; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * spec.n_x + i;
      const int cell = map[idx];
      const int seg = cell >= 0 ? segment_of[cell] : -1;
      const double x = spec.x(i);
      double phase;
      if (seg >= 0) {
        covered[seg] = 1;
        phase = pattern.phases[seg] + pattern.tilt_inside * x;
      } else {
        phase = pattern.tilt_outside * x;
      }
      t.data()[idx] = std::polar(1.0, phase);
    }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end())
    throw ConfigError("slm segment smaller than one grid sample");
  return Mask{std::move(t)};
}

void save_pattern(std::ostream& os, const SlmPattern& p) {
  os << "# awp-slm-pattern 1\n";
  os << "# rows " << p.layout.rows << "\n";
  os << "# cols " << p.layout.cols << "\n";
  os << std::setprecision(17);
  os << "# pupil_radius_m " << p.layout.pupil_radius << "\n";
  os << "# pinhole " << (p.pinhole ? 1 : 0) << "\n";
  os << "# tilt_inside_rad_per_m " << p.tilt_inside << "\n";
  os << "# tilt_outside_rad_per_m " << p.tilt_outside << "\n";
  os << "# active";
  for (int c : p.layout.active) os << ' ' << c;
  os << "\n";
  for (std::size_t s = 0; s < p.phases.size(); ++s) os << s << ' ' << p.phases[s] << "\n";
}

SlmPattern load_pattern(std::istream& is) {
  SlmPattern p;
  std::string line;
  bool have_active = false;
  std::vector<std::pair<int, double>> entries;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "rows") ls >> p.layout.rows;
      else if (key == "cols") ls >> p.layout.cols;
      else if (key == "pupil_radius_m") ls >> p.layout.pupil_radius;
      else if (key == "pinhole") { int v = 0; ls >> v; p.pinhole = v != 0; }
      else if (key == "tilt_inside_rad_per_m") ls >> p.tilt_inside;
      else if (key == "tilt_outside_rad_per_m") ls >> p.tilt_outside;
      else if (key == "active") {
        have_active = true;
        for (int c; ls >> c;) p.layout.active.push_back(c);
      }
      continue;
    }
    int idx = 0;
    double phase = 0.0;
    if (!(ls >> idx >> phase)) throw ConfigError("malformed slm pattern line: " + line);
    entries.emplace_back(idx, phase);
  }
  if (!have_active) throw ConfigError("slm pattern file lacks the active segment list");
  p.phases.assign(p.layout.active.size(), 0.0);
  for (const auto& [idx, phase] : entries) {
    if (idx < 0 || idx >= static_cast<int>(p.phases.size())) throw ConfigError("slm pattern index out of range");
    p.phases[static_cast<std::size_t>(idx)] = wrap_phase(phase);
  }
  return p;
}

}  // namespace awp
