#include "bosonq/linalg.hpp"

#include <cmath>
#include <string>

namespace bosonq {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> hermitian_solve(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("matrix function of a non-square matrix");
  // Symmetrize so round-off in the input does not bias the spectrum.
  const Matrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition did not converge");
  return solver;
}

}  // namespace

Matrix expm_hermitian(const Matrix& h, double t) {
  const auto solver = hermitian_solve(h);
  const Vector phases = (-kI * t * solver.eigenvalues().cast<Complex>()).array().exp();
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

Matrix sqrtm_psd(const Matrix& a, double tol) {
  const auto solver = hermitian_solve(a);
  RealVector ev = solver.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() < -tol) {
    throw NumericalError("matrix square root: eigenvalue " + std::to_string(ev.minCoeff()) +
                         " is below the positivity tolerance");
  }
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * ev.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
}

RealVector hermitian_eigenvalues(const Matrix& a) { return hermitian_solve(a).eigenvalues(); }

double von_neumann_entropy_bits(const Matrix& rho) {
  const RealVector ev = hermitian_eigenvalues(rho);
  double s = 0.0;
  for (double p : ev) {
    if (p > 1e-15) s -= p * std::log2(p);
  }
  return std::max(s, 0.0);
}

}  // namespace bosonq
