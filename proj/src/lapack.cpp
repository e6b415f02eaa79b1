#include "lapack.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <string>

#include "orthospec/error.hpp"

namespace orthospec::lapack {

namespace {

void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    fail(ErrorCode::kNumeric, std::string(routine) + " failed with info=" + std::to_string(info));
  }
}

}  // namespace

ComplexMatrix orthonormal_factor(ComplexMatrix a) {
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  require(m >= n, ErrorCode::kInvalidParameter, "QR needs a tall matrix");
  ComplexVector tau(n);
  check_info(LAPACKE_zgeqrf(LAPACK_COL_MAJOR, m, n, a.data(), m, tau.data()), "zgeqrf");
  ComplexVector phase(n);
  for (lapack_int j = 0; j < n; ++j) {
    const Complex r = a(j, j);
    const double mag = std::abs(r);
    phase[j] = mag > 0.0 ? r / mag : Complex(1.0, 0.0);
  }
  check_info(LAPACKE_zungqr(LAPACK_COL_MAJOR, m, n, n, a.data(), m, tau.data()), "zungqr");
  for (lapack_int j = 0; j < n; ++j) a.col(j) *= phase[j];
  return a;
}

RealVector hermitian_eigenvalues(ComplexMatrix a) {
  const auto n = static_cast<lapack_int>(a.rows());
  RealVector w(n);
  if (n == 0) return w;
  check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data()), "zheevd");
  return w;
}

void hermitian_eigensystem(ComplexMatrix a, RealVector& values, ComplexMatrix& vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  values.resize(n);
  check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, values.data()), "zheevd");
  vectors = std::move(a);
}

ComplexVector general_eigenvalues(ComplexMatrix a) {
  const auto n = static_cast<lapack_int>(a.rows());
  ComplexVector w(n);
  if (n == 0) return w;
  check_info(LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), nullptr, 1,
                           nullptr, 1),
             "zgeev");
  return w;
}

void general_eigensystem(ComplexMatrix a, ComplexVector& values, ComplexMatrix& vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  values.resize(n);
  vectors.resize(n, n);
  check_info(LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, values.data(), nullptr, 1,
                           vectors.data(), n),
             "zgeev");
}

}  // namespace orthospec::lapack
