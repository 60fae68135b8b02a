#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace awp {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Uniform transverse sampling. n_y == 1 denotes a 1-D field along x.
struct GridSpec {
  int n_x = 0;
  int n_y = 1;
  double pitch = 0.0;       ///< [m] per sample
  double wavelength = 0.0;  ///< [m]

  bool is_1d() const { return n_y == 1; }
  int dims() const { return is_1d() ? 1 : 2; }
  std::size_t size() const { return static_cast<std::size_t>(n_x) * n_y; }
  double extent_x() const { return n_x * pitch; }
  double extent_y() const { return n_y * pitch; }
  /// Measure of one sample: pitch in 1-D, pitch^2 in 2-D.
  double cell_area() const { return is_1d() ? pitch : pitch * pitch; }
  double wavenumber() const { return kTwoPi / wavelength; }
  /// Sample coordinates; index n/2 sits on the optical axis.
  double x(int i) const { return (i - n_x / 2) * pitch; }
  double y(int j) const { return is_1d() ? 0.0 : (j - n_y / 2) * pitch; }
  /// Largest representable propagation angle, lambda / (2 pitch).
  double angular_nyquist() const { return wavelength / (2.0 * pitch); }
};

/// Validates and returns a grid. Throws ConfigError on odd sizes or
/// non-positive pitch/wavelength.
GridSpec make_grid(int n_x, int n_y, double pitch, double wavelength);

/// Same sample counts and wavelength; pitch equal to relative 1e-9.
bool same_grid(const GridSpec& a, const GridSpec& b);
void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

/// Complex scalar amplitude sampled on a GridSpec, row-major n_y x n_x.
class SampledField {
 public:
  SampledField() = default;
  SampledField(GridSpec spec, std::string plane_label = {});
  SampledField(GridSpec spec, std::vector<cplx> amplitudes, std::string plane_label = {});

  const GridSpec& spec() const { return spec_; }
  const std::string& plane_label() const { return label_; }
  void set_plane_label(std::string label) { label_ = std::move(label); }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }
  std::size_t size() const { return data_.size(); }

  cplx& operator()(int i, int j = 0) { return data_[static_cast<std::size_t>(j) * spec_.n_x + i]; }
  const cplx& operator()(int i, int j = 0) const {
    return data_[static_cast<std::size_t>(j) * spec_.n_x + i];
  }

  /// Sum |a|^2 times the cell area.
  double energy() const;
  std::vector<double> intensity() const;

  SampledField conj() const;
  SampledField scaled(cplx factor) const;
  /// Pointwise product; both operands must share a grid.
  SampledField times(const SampledField& other) const;

 private:
  GridSpec spec_;
  std::vector<cplx> data_;
  std::string label_;
};

/// Unit-energy Gaussian exp(-|r - c|^2 / waist^2) carrying a linear phase
/// exp(i k tilt x) (tilt_y for the y axis in 2-D). Throws SamplingError
/// when waist < 2 pitch.
SampledField gaussian_mode(const GridSpec& spec, double waist, double center_x = 0.0,
                           double tilt_x = 0.0, double center_y = 0.0, double tilt_y = 0.0);

/// Sum conj(f) g dA; conjugate-linear in f.
cplx overlap(const SampledField& f, const SampledField& g);

/// Sum f g dA with no conjugation (reciprocity pairing).
cplx bilinear(const SampledField& f, const SampledField& g);

/// Output pitch of an ideal 2f Fourier stage.
double farfield_pitch(const GridSpec& in, double focal_length);

/// Ideal 2f lens map from front to back focal plane. The transform kernel
/// exp(-2 pi i x x' / (lambda f)) is symmetric, unitary with respect to
/// the cell-area inner product, and maps a tilt theta to x' = f theta.
SampledField farfield(const SampledField& f, double focal_length);

/// Second-moment (rms) width along x of |a|^2, centered on its centroid.
double rms_width_x(const SampledField& f);

}  // namespace awp
