#include "awp/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

namespace awp::fft {
namespace {

// FFTW planning is not thread-safe, execution on a shared plan is. Plans
// are made with FFTW_UNALIGNED so codelet choice never depends on the
// buffer address, which keeps results bit-identical across threads.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n_x, int n_y, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(n_x, n_y, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> scratch(static_cast<std::size_t>(n_x) * n_y);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = n_y == 1 ? fftw_plan_dft_1d(n_x, buf, buf, sign, flags)
                              : fftw_plan_dft_2d(n_y, n_x, buf, buf, sign, flags);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void roll_half(std::span<cplx> row) {
  const std::size_t half = row.size() / 2;
  for (std::size_t i = 0; i < half; ++i) std::swap(row[i], row[i + half]);
}

}  // namespace

void transform(std::span<cplx> data, int n_x, int n_y, Direction dir) {
  const int sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = cache().get(n_x, n_y, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

void shift(std::span<cplx> data, int n_x, int n_y) {
  for (int j = 0; j < n_y; ++j) roll_half(data.subspan(static_cast<std::size_t>(j) * n_x, n_x));
  if (n_y > 1) {
    const std::size_t half = static_cast<std::size_t>(n_y / 2) * n_x;
    for (std::size_t i = 0; i < half; ++i) std::swap(data[i], data[i + half]);
  }
}

}  // namespace awp::fft
