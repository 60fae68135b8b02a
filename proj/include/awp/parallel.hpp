#pragma once

#include <cstddef>
#include <functional>

namespace awp {

/// Worker count used by parallel_for. Defaults to 1; results never depend on it.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [0, n). Each index is evaluated exactly once and
/// independently; callers write results into per-index slots. The first
/// exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace awp
