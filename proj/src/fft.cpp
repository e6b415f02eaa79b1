#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <vector>

#include "orthospec/error.hpp"

namespace orthospec {

namespace {

// The FFTW planner is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

UnitaryDft::UnitaryDft(std::size_t size)
    : size_(size), scale_(1.0 / std::sqrt(static_cast<double>(size))) {
  require(size > 0, ErrorCode::kInvalidParameter, "DFT size must be positive");
  std::vector<Complex> a(size), b(size);
  std::lock_guard lock(planner_mutex());
  const int n = static_cast<int>(size);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_ = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
  inverse_ = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
  if (forward_ == nullptr || inverse_ == nullptr) {
    fail(ErrorCode::kInvalidParameter, "FFTW could not plan a DFT of size " + std::to_string(size));
  }
}

UnitaryDft::~UnitaryDft() {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(forward_);
  if (inverse_) fftw_destroy_plan(inverse_);
}

void UnitaryDft::forward(const Complex* in, Complex* out) const {
  fftw_execute_dft(forward_, as_fftw(const_cast<Complex*>(in)), as_fftw(out));
  for (std::size_t i = 0; i < size_; ++i) out[i] *= scale_;
}

void UnitaryDft::inverse(const Complex* in, Complex* out) const {
  fftw_execute_dft(inverse_, as_fftw(const_cast<Complex*>(in)), as_fftw(out));
  for (std::size_t i = 0; i < size_; ++i) out[i] *= scale_;
}

}  // namespace orthospec
