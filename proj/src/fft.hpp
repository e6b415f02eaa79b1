#pragma once

#include <cstddef>

#include "orthospec/core.hpp"

typedef struct fftw_plan_s* fftw_plan;

namespace orthospec {

/// Unitary 1-D DFT of a fixed length (FFTW, mixed radix). Plans are made
/// once with FFTW_UNALIGNED and run through the new-array interface, which
/// is reentrant, so one instance can be shared across threads.
class UnitaryDft {
 public:
  explicit UnitaryDft(std::size_t size);
  ~UnitaryDft();
  UnitaryDft(const UnitaryDft&) = delete;
  UnitaryDft& operator=(const UnitaryDft&) = delete;

  std::size_t size() const { return size_; }

  /// out = F in, F_{jk} = exp(-2 pi i jk / N) / sqrt(N). in and out must not alias.
  void forward(const Complex* in, Complex* out) const;
  /// out = F^H in.
  void inverse(const Complex* in, Complex* out) const;

 private:
  std::size_t size_;
  double scale_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace orthospec
