#include "awp/grid.hpp"

#include <cmath>
#include <sstream>

#include "awp/errors.hpp"
#include "awp/fft.hpp"

namespace awp {

GridSpec make_grid(int n_x, int n_y, double pitch, double wavelength) {
  if (n_x <= 0 || n_y <= 0) throw ConfigError("grid sample counts must be positive");
  if (n_x % 2 != 0 || (n_y != 1 && n_y % 2 != 0))
    throw ConfigError("grid sample counts must be even (n_y = 1 allowed for 1-D)");
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw ConfigError("grid pitch must be positive");
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw ConfigError("wavelength must be positive");
  return GridSpec{n_x, n_y, pitch, wavelength};
}

bool same_grid(const GridSpec& a, const GridSpec& b) {
  auto close = [](double u, double v) { return std::abs(u - v) <= 1e-9 * std::max(std::abs(u), std::abs(v)); };
  return a.n_x == b.n_x && a.n_y == b.n_y && close(a.pitch, b.pitch) && close(a.wavelength, b.wavelength);
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (same_grid(a, b)) return;
  std::ostringstream os;
  os << what << ": grid mismatch (" << a.n_x << "x" << a.n_y << " @ " << a.pitch << " m vs " << b.n_x
     << "x" << b.n_y << " @ " << b.pitch << " m)";
  throw ShapeError(os.str());
}

SampledField::SampledField(GridSpec spec, std::string plane_label)
    : spec_(spec), data_(spec.size()), label_(std::move(plane_label)) {}

SampledField::SampledField(GridSpec spec, std::vector<cplx> amplitudes, std::string plane_label)
    : spec_(spec), data_(std::move(amplitudes)), label_(std::move(plane_label)) {
  if (data_.size() != spec_.size()) throw ShapeError("amplitude count does not match grid");
}

double SampledField::energy() const {
  double sum = 0.0;
  for (const auto& a : data_) sum += std::norm(a);
  return sum * spec_.cell_area();
}

std::vector<double> SampledField::intensity() const {
  std::vector<double> out(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) out[i] = std::norm(data_[i]);
  return out;
}

SampledField SampledField::conj() const {
  SampledField out(spec_, label_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = std::conj(data_[i]);
  return out;
}

SampledField SampledField::scaled(cplx factor) const {
  SampledField out(spec_, label_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = factor * data_[i];
  return out;
}

SampledField SampledField::times(const SampledField& other) const {
  require_same_grid(spec_, other.spec_, "pointwise product");
  SampledField out(spec_, label_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] * other.data_[i];
  return out;
}

SampledField gaussian_mode(const GridSpec& spec, double waist, double center_x, double tilt_x,
                           double center_y, double tilt_y) {
  if (!(waist >= 2.0 * spec.pitch))
    throw SamplingError("gaussian mode waist must be at least two samples");
  SampledField out(spec, "mode");
  const double k = spec.wavenumber();
  for (int j = 0; j < spec.n_y; ++j) {
    const double dy = spec.is_1d() ? 0.0 : spec.y(j) - center_y;
    const double phase_y = spec.is_1d() ? 0.0 : k * tilt_y * spec.y(j);
    for (int i = 0; i < spec.n_x; ++i) {
      const double dx = spec.x(i) - center_x;
      const double amp = std::exp(-(dx * dx + dy * dy) / (waist * waist));
      out(i, j) = std::polar(amp, k * tilt_x * spec.x(i) + phase_y);
    }
  }
  const double e = out.energy();
  if (!(e > 0.0)) throw SamplingError("gaussian mode has no support on the grid");
  return out.scaled(1.0 / std::sqrt(e));
}

cplx overlap(const SampledField& f, const SampledField& g) {
  require_same_grid(f.spec(), g.spec(), "overlap");
  cplx sum = 0.0;
  const auto& a = f.data();
  const auto& b = g.data();
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum * f.spec().cell_area();
}

cplx bilinear(const SampledField& f, const SampledField& g) {
  require_same_grid(f.spec(), g.spec(), "bilinear pairing");
  cplx sum = 0.0;
  const auto& a = f.data();
  const auto& b = g.data();
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum * f.spec().cell_area();
}

double farfield_pitch(const GridSpec& in, double focal_length) {
  return in.wavelength * focal_length / (in.n_x * in.pitch);
}

SampledField farfield(const SampledField& f, double focal_length) {
  const GridSpec& in = f.spec();
  if (!(focal_length > 0.0)) throw ConfigError("focal length must be positive");
  if (!in.is_1d() && in.n_x != in.n_y) throw ShapeError("2-D far-field map needs a square grid");
  GridSpec out_spec = in;
  out_spec.pitch = farfield_pitch(in, focal_length);

  std::vector<cplx> buf = f.data();
  fft::shift(buf, in.n_x, in.n_y);
  fft::transform(buf, in.n_x, in.n_y, fft::Direction::Forward);
  fft::shift(buf, in.n_x, in.n_y);

  // Unitary DFT scaling times the change of cell measure.
  const double unitary = 1.0 / std::sqrt(static_cast<double>(in.size()));
  const double measure = std::pow(in.pitch / out_spec.pitch, 0.5 * in.dims());
  const double scale = unitary * measure;
  for (auto& a : buf) a *= scale;
  return SampledField(out_spec, std::move(buf), "far-field");
}

double rms_width_x(const SampledField& f) {
  const GridSpec& s = f.spec();
  double w = 0.0, m1 = 0.0, m2 = 0.0;
  for (int j = 0; j < s.n_y; ++j)
    for (int i = 0; i < s.n_x; ++i) {
      const double p = std::norm(f(i, j));
      const double x = s.x(i);
      w += p;
      m1 += p * x;
      m2 += p * x * x;
    }
  if (!(w > 0.0)) return 0.0;
  m1 /= w;
  return std::sqrt(std::max(0.0, m2 / w - m1 * m1));
}

}  // namespace awp
