#pragma once

#include "bosonq/types.hpp"

namespace bosonq {

/// exp(−i H t) for Hermitian H, by dense eigendecomposition.
Matrix expm_hermitian(const Matrix& h, double t);

/// Principal square root of a Hermitian positive semidefinite matrix.
/// Eigenvalues down to −tol are clipped to zero; anything more negative
/// throws NumericalError.
Matrix sqrtm_psd(const Matrix& a, double tol = 1e-8);

/// Eigenvalues of a Hermitian matrix in ascending order.
RealVector hermitian_eigenvalues(const Matrix& a);

/// −Σ λ log2 λ over the spectrum of a density matrix.
double von_neumann_entropy_bits(const Matrix& rho);

}  // namespace bosonq
