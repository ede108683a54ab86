#include "bosonq/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "bosonq/linalg.hpp"

namespace bosonq {

void validate_density_matrix(const DensityMatrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw ValidationError("density matrix must be square");
  if (max_abs_deviation_from_hermitian(rho) > 1e-10) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-8) throw ValidationError("density matrix trace differs from 1");
  if (hermitian_eigenvalues(rho).minCoeff() < -1e-8) throw ValidationError("density matrix is not positive");
}

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw ValidationError("state_fidelity: dimension mismatch");
  }
  const Matrix sqrt_rho = sqrtm_psd(rho);
  const Matrix inner = sqrt_rho * sigma * sqrt_rho;
  const double root_trace = sqrtm_psd(inner).trace().real();
  return std::clamp(root_trace * root_trace, 0.0, 1.0);
}

double state_fidelity(const StateVector& psi, const StateVector& phi) {
  if (psi.size() != phi.size()) throw ValidationError("state_fidelity: dimension mismatch");
  return std::clamp(std::norm(psi.dot(phi)), 0.0, 1.0);
}

double state_fidelity(const StateVector& psi, const DensityMatrix& rho) {
  if (psi.size() != rho.rows()) throw ValidationError("state_fidelity: dimension mismatch");
  return std::clamp(psi.dot(rho * psi).real(), 0.0, 1.0);
}

namespace {

// ⟨m|D(β)|n⟩ on the untruncated oscillator.
Complex displacement_element(int m, int n, Complex beta, double abs2) {
  const double envelope = std::exp(-0.5 * abs2);
  if (m >= n) {
    const unsigned k = static_cast<unsigned>(m - n);
    const double norm = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
    return norm * std::pow(beta, static_cast<int>(k)) * envelope *
           std::assoc_laguerre(static_cast<unsigned>(n), k, abs2);
  }
  const unsigned k = static_cast<unsigned>(n - m);
  const double norm = std::exp(0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)));
  return norm * std::pow(-std::conj(beta), static_cast<int>(k)) * envelope *
         std::assoc_laguerre(static_cast<unsigned>(m), k, abs2);
}

}  // namespace

WignerGrid wigner_grid(const DensityMatrix& cavity_rho, std::span<const double> xs, std::span<const double> ps) {
  if (cavity_rho.rows() != cavity_rho.cols()) throw ValidationError("wigner_grid: density matrix must be square");
  const int dim = static_cast<int>(cavity_rho.rows());
  WignerGrid grid;
  grid.xs.assign(xs.begin(), xs.end());
  grid.ps.assign(ps.begin(), ps.end());
  grid.values = RealMatrix::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ps.size()));
  for (int n = std::max(0, dim - 3); n < dim; ++n) grid.top_level_population += cavity_rho(n, n).real();
  grid.truncation_warning = grid.top_level_population >= 0.01;

  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ps.size(); ++j) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ps[j])) throw ValidationError("wigner_grid: non-finite grid");
      const Complex beta = 2.0 * Complex(xs[i], ps[j]);
      const double abs2 = std::norm(beta);
      // tr[ρ D(2α) Π] = Σ_{m,n} ρ_nm ⟨m|D(2α)|n⟩ (−1)^n
      Complex acc = 0.0;
      for (int m = 0; m < dim; ++m) {
        for (int n = 0; n < dim; ++n) {
          const Complex rho_nm = cavity_rho(n, m);
          if (rho_nm == Complex(0.0)) continue;
          const double parity = (n % 2 == 0) ? 1.0 : -1.0;
          acc += rho_nm * displacement_element(m, n, beta, abs2) * parity;
        }
      }
      grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (2.0 / std::numbers::pi) * acc.real();
    }
  }
  return grid;
}

double entanglement_entropy(const StateVector& psi, const SpaceDescriptor& space) {
  if (psi.size() != space.total_dim()) throw ValidationError("entanglement_entropy: dimension mismatch");
  // Row t of the reshaped amplitude matrix holds the cavity amplitudes for transmon level t.
  Matrix amplitudes(space.transmon_dim(), space.cavity_dim());
  for (int t = 0; t < space.transmon_dim(); ++t) {
    amplitudes.row(t) = psi.segment(space.index(t, 0), space.cavity_dim()).transpose();
  }
  const Matrix rho_t = amplitudes * amplitudes.adjoint();
  return von_neumann_entropy_bits(rho_t / rho_t.trace().real());
}

}  // namespace bosonq
