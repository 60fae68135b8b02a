#pragma once

#include <variant>
#include <vector>

#include "awp/grid.hpp"

namespace awp {

/// Angular-spectrum propagation over a non-negative distance [m].
struct FreeSpace {
  double distance = 0.0;
};

/// Ideal 2f Fourier stage (front focal plane -> back focal plane).
struct LensFourier {
  double focal_length = 0.0;
};

/// Thin complex transmission, |t| <= 1.
struct Mask {
  SampledField transmission;
};

/// Ideal imaging rescale: pitch * ratio, energy conserved.
struct Magnifier {
  double ratio = 1.0;
};

using Element = std::variant<FreeSpace, LensFourier, Mask, Magnifier>;

enum class Direction { Forward, Backward };

/// Throws ConfigError if the element violates its parameter invariants.
void validate(const Element& e);

/// Grid after the element for a field arriving on `in`, in the given direction.
GridSpec propagate_spec(const Element& e, const GridSpec& in, Direction dir);

/// Forward application, or its reciprocal transpose for Direction::Backward.
///
/// The backward map is the unconjugated transpose with respect to the
/// cell-area pairing:  bilinear(g, T f) == bilinear(T^T g, f). Masks and
/// free space have symmetric kernels, so backward equals forward. The lens
/// kernel exp(-2 pi i x x' / lambda f) is symmetric too, so backward is the
/// same far-field map applied from the back focal plane. A Magnifier's
/// transpose is the inverse rescale.
SampledField apply_element(const Element& e, const SampledField& f, Direction dir);

/// Ordered optical path between an entry plane and an exit plane.
class OpticalArm {
 public:
  OpticalArm() = default;
  /// Validates every element and that masks sit on the grid reached at
  /// their position. Throws ConfigError / ShapeError.
  OpticalArm(GridSpec entry, std::vector<Element> elements);

  const GridSpec& entry_spec() const { return entry_; }
  const GridSpec& exit_spec() const { return exit_; }
  const std::vector<Element>& elements() const { return elements_; }
  bool empty() const { return elements_.empty(); }

  /// Spec at the plane just before element `index` (index == size gives exit).
  GridSpec spec_before(std::size_t index) const;

  /// New arm with `prefix` inserted ahead of the existing elements.
  OpticalArm with_prefix(const std::vector<Element>& prefix) const;
  /// New arm with the element list truncated to its first `count` entries.
  OpticalArm truncated(std::size_t count) const;

 private:
  GridSpec entry_{};
  GridSpec exit_{};
  std::vector<Element> elements_;
};

/// Forward: elements in order. Backward: reverse order, each transposed.
SampledField arm_apply(const OpticalArm& arm, const SampledField& f, Direction dir);

}  // namespace awp
