#pragma once

#include "orthospec/core.hpp"

namespace orthospec::lapack {

/// Thin Q factor of a tall matrix, columns rescaled by sign(R_jj) so that
/// R has a positive diagonal (the Haar-correct QR convention).
ComplexMatrix orthonormal_factor(ComplexMatrix a);

/// All eigenvalues of a Hermitian matrix (lower triangle read), ascending.
RealVector hermitian_eigenvalues(ComplexMatrix a);

/// Eigen-decomposition of a Hermitian matrix: ascending values, vectors in columns.
void hermitian_eigensystem(ComplexMatrix a, RealVector& values, ComplexMatrix& vectors);

/// All eigenvalues of a general complex matrix.
ComplexVector general_eigenvalues(ComplexMatrix a);

/// Eigenvalues and right eigenvectors of a general complex matrix.
void general_eigensystem(ComplexMatrix a, ComplexVector& values, ComplexMatrix& vectors);

}  // namespace orthospec::lapack
