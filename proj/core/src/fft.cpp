// SPDX-License-Identifier: Apache-2.0
#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <mutex>

namespace blalab::detail {
namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

struct PlanDeleter {
  void operator()(fftw_plan p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

using Buffer = std::unique_ptr<fftw_complex[], FftwFree>;
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

Buffer allocate(std::size_t n) { return Buffer(fftw_alloc_complex(std::max<std::size_t>(n, 1))); }

}  // namespace

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> in, int sign) {
  const std::size_t n = in.size();
  if (n == 0) return {};
  Buffer buf = allocate(n);
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_1d(static_cast<int>(n), buf.get(), buf.get(), sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                FFTW_ESTIMATE));
  }
  // std::complex<double> and fftw_complex share layout.
  std::memcpy(buf.get(), in.data(), n * sizeof(fftw_complex));
  fftw_execute(plan.get());
  std::vector<std::complex<double>> out(n);
  std::memcpy(static_cast<void*>(out.data()), buf.get(), n * sizeof(fftw_complex));
  return out;
}

std::vector<std::complex<double>> fft_real(std::span<const double> in) {
  std::vector<std::complex<double>> data(in.begin(), in.end());
  return fft(data, -1);
}

}  // namespace blalab::detail
