#include "awp/elements.hpp"

#include <cmath>
#include <sstream>

#include "awp/errors.hpp"
#include "awp/fft.hpp"

namespace awp {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

SampledField propagate_free_space(const SampledField& f, double distance) {
  if (distance == 0.0) return f;
  const GridSpec& s = f.spec();
  std::vector<cplx> buf = f.data();
  fft::transform(buf, s.n_x, s.n_y, fft::Direction::Forward);

  const double inv_lambda = 1.0 / s.wavelength;
  const double inv_extent_x = 1.0 / (s.n_x * s.pitch);
  const double inv_extent_y = s.is_1d() ? 0.0 : 1.0 / (s.n_y * s.pitch);
  const double norm = 1.0 / static_cast<double>(s.size());
  for (int j = 0; j < s.n_y; ++j) {
    const double nu_y = s.is_1d() ? 0.0 : fft::signed_index(j, s.n_y) * inv_extent_y;
    for (int i = 0; i < s.n_x; ++i) {
      const double nu_x = fft::signed_index(i, s.n_x) * inv_extent_x;
      const double nu2 = nu_x * nu_x + nu_y * nu_y;
      cplx& a = buf[static_cast<std::size_t>(j) * s.n_x + i];
      if (nu2 >= inv_lambda * inv_lambda) {
        a = 0.0;  // evanescent
        continue;
      }
      // sqrt(1/l^2 - nu^2) - 1/l, written without cancellation; the
      // dropped exp(i k d) is a global phase.
      const double dkz = -nu2 / (inv_lambda + std::sqrt(inv_lambda * inv_lambda - nu2));
      a *= std::polar(norm, kTwoPi * distance * dkz);
    }
  }
  fft::transform(buf, s.n_x, s.n_y, fft::Direction::Inverse);
  return SampledField(s, std::move(buf), f.plane_label());
}

SampledField rescale(const SampledField& f, double ratio) {
  GridSpec s = f.spec();
  s.pitch *= ratio;
  const double amp = std::pow(ratio, -0.5 * s.dims());
  SampledField out = f.scaled(amp);
  return SampledField(s, std::move(out.data()), f.plane_label());
}

}  // namespace

void validate(const Element& e) {
  std::visit(overloaded{
                 [](const FreeSpace& fs) {
                   if (!(fs.distance >= 0.0) || !std::isfinite(fs.distance))
                     throw ConfigError("free-space distance must be non-negative");
                 },
                 [](const LensFourier& l) {
                   if (!(l.focal_length > 0.0) || !std::isfinite(l.focal_length))
                     throw ConfigError("focal length must be positive");
                 },
                 [](const Mask& m) {
                   for (const auto& t : m.transmission.data())
                     if (!(std::abs(t) <= 1.0 + 1e-9))
                       throw ConfigError("mask transmission exceeds unit modulus");
                 },
                 [](const Magnifier& m) {
                   if (!(m.ratio > 0.0) || !std::isfinite(m.ratio))
                     throw ConfigError("magnifier ratio must be positive");
                 },
             },
             e);
}

GridSpec propagate_spec(const Element& e, const GridSpec& in, Direction dir) {
  return std::visit(overloaded{
                        [&](const FreeSpace&) { return in; },
                        [&](const Mask&) { return in; },
                        [&](const LensFourier& l) {
                          GridSpec out = in;
                          out.pitch = farfield_pitch(in, l.focal_length);
                          return out;
                        },
                        [&](const Magnifier& m) {
                          GridSpec out = in;
                          out.pitch = dir == Direction::Forward ? in.pitch * m.ratio : in.pitch / m.ratio;
                          return out;
                        },
                    },
                    e);
}

SampledField apply_element(const Element& e, const SampledField& f, Direction dir) {
  return std::visit(overloaded{
                        [&](const FreeSpace& fs) { return propagate_free_space(f, fs.distance); },
                        [&](const Mask& m) {
                          require_same_grid(m.transmission.spec(), f.spec(), "mask");
                          SampledField out = f.times(m.transmission);
                          out.set_plane_label(f.plane_label());
                          return out;
                        },
                        [&](const LensFourier& l) { return farfield(f, l.focal_length); },
                        [&](const Magnifier& m) {
                          return rescale(f, dir == Direction::Forward ? m.ratio : 1.0 / m.ratio);
                        },
                    },
                    e);
}

OpticalArm::OpticalArm(GridSpec entry, std::vector<Element> elements)
    : entry_(entry), exit_(entry), elements_(std::move(elements)) {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    validate(elements_[i]);
    if (const auto* m = std::get_if<Mask>(&elements_[i])) {
      if (!same_grid(m->transmission.spec(), exit_)) {
        std::ostringstream os;
        os << "mask at arm position " << i << " does not match the grid reaching it";
        throw ShapeError(os.str());
      }
    }
    exit_ = propagate_spec(elements_[i], exit_, Direction::Forward);
  }
}

GridSpec OpticalArm::spec_before(std::size_t index) const {
  GridSpec s = entry_;
  for (std::size_t i = 0; i < index && i < elements_.size(); ++i)
    s = propagate_spec(elements_[i], s, Direction::Forward);
  return s;
}

OpticalArm OpticalArm::with_prefix(const std::vector<Element>& prefix) const {
  std::vector<Element> all = prefix;
  all.insert(all.end(), elements_.begin(), elements_.end());
  return OpticalArm(entry_, std::move(all));
}

OpticalArm OpticalArm::truncated(std::size_t count) const {
  std::vector<Element> head(elements_.begin(),
                            elements_.begin() + static_cast<std::ptrdiff_t>(std::min(count, elements_.size())));
  return OpticalArm(entry_, std::move(head));
}

SampledField arm_apply(const OpticalArm& arm, const SampledField& f, Direction dir) {
  const GridSpec& expected = dir == Direction::Forward ? arm.entry_spec() : arm.exit_spec();
  require_same_grid(expected, f.spec(), dir == Direction::Forward ? "arm entry" : "arm exit");
  SampledField cur = f;
  const auto& els = arm.elements();
  if (dir == Direction::Forward) {
    for (const auto& e : els) cur = apply_element(e, cur, dir);
  } else {
    for (auto it = els.rbegin(); it != els.rend(); ++it) cur = apply_element(*it, cur, dir);
  }
  return cur;
}

}  // namespace awp
