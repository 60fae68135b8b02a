#pragma once

#include <span>

#include "awp/grid.hpp"

namespace awp::fft {

enum class Direction { Forward, Inverse };

/// Unnormalized in-place DFT over an n_y x n_x row-major buffer (1-D when
/// n_y == 1). Forward uses exp(-2 pi i ...). Thread-safe; plans are cached.
void transform(std::span<cplx> data, int n_x, int n_y, Direction dir);

/// Swap half-spaces so index n/2 moves to 0 (even sizes only, so this is
/// its own inverse).
void shift(std::span<cplx> data, int n_x, int n_y);

/// Signed frequency index of DFT bin k for length n: k for k < n/2, k - n otherwise.
inline int signed_index(int k, int n) { return k < n / 2 ? k : k - n; }

}  // namespace awp::fft
