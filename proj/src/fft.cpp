#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace maglab::detail {
namespace {

using PlanKey = std::tuple<int, int, int, int>; // dim, points, axis (-1 = all), sign

class PlanCache {
public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const GridSpec& spec, int axis, int sign) {
    std::lock_guard lock(mutex_);
    PlanKey key{spec.dim, spec.points, axis, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const std::size_t total = spec.size();
    auto* scratch = fftw_alloc_complex(total);
    fftw_plan plan = nullptr;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (axis < 0) {
      std::vector<int> n(spec.dim, spec.points);
      plan = fftw_plan_dft(spec.dim, n.data(), scratch, scratch, sign, flags);
    } else {
      const int N = spec.points;
      const auto inner = static_cast<int>(spec.stride(axis));
      int outer = 1;
      for (int a = 0; a < axis; ++a) outer *= N;
      fftw_iodim dims{N, inner, inner};
      fftw_iodim loops[2] = {{outer, N * inner, N * inner}, {inner, 1, 1}};
      plan = fftw_plan_guru_dft(1, &dims, 2, loops, scratch, scratch, sign, flags);
    }
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

fftw_complex* as_fftw(std::span<cplx> data) {
  return reinterpret_cast<fftw_complex*>(data.data());
}

} // namespace

void fft_axis(std::span<cplx> data, const GridSpec& spec, int axis, int sign) {
  auto plan = PlanCache::instance().get(spec, axis, sign);
  fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

void fft_all(std::span<cplx> data, const GridSpec& spec, int sign) {
  auto plan = PlanCache::instance().get(spec, -1, sign);
  fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

std::vector<double> wavenumbers(const GridSpec& spec) {
  const int N = spec.points;
  std::vector<double> k(N);
  const double unit = std::numbers::pi / spec.half_width;
  for (int i = 0; i < N; ++i) k[i] = unit * (i < N / 2 ? i : i - N);
  return k;
}

void fourier_multiply_axis(std::span<cplx> data, const GridSpec& spec, int axis,
                           std::span<const cplx> multiplier) {
  fft_axis(data, spec, axis, FFTW_FORWARD);
  const std::size_t stride = spec.stride(axis);
  const std::size_t N = spec.points;
  const double scale = 1.0 / static_cast<double>(N);
  const std::size_t n = data.size();
  // Blocks of `stride` contiguous elements share the same axis index.
  for (std::size_t base = 0; base < n; base += stride * N) {
    for (std::size_t m = 0; m < N; ++m) {
      const cplx f = multiplier[m] * scale;
      cplx* row = data.data() + base + m * stride;
      for (std::size_t r = 0; r < stride; ++r) row[r] *= f;
    }
  }
  fft_axis(data, spec, axis, FFTW_BACKWARD);
}

} // namespace maglab::detail
