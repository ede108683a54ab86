#pragma once

#include <span>
#include <string>
#include <vector>

#include "bosonq/space.hpp"
#include "bosonq/types.hpp"

namespace bosonq {

/// Throws ValidationError unless rho is Hermitian (1e−10), unit trace (1e−8)
/// and has no eigenvalue below −1e−8.
void validate_density_matrix(const DensityMatrix& rho);

/// Uhlmann fidelity (tr √(√ρ σ √ρ))².
double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// |⟨ψ|φ⟩|².
double state_fidelity(const StateVector& psi, const StateVector& phi);

/// ⟨ψ|ρ|ψ⟩, the fidelity of a mixed state against a pure reference.
double state_fidelity(const StateVector& psi, const DensityMatrix& rho);

struct WignerGrid {
  std::vector<double> xs;
  std::vector<double> ps;
  RealMatrix values;  // values(i, j) = W(xs[i] + i·ps[j])
  double top_level_population = 0.0;
  bool truncation_warning = false;
};

/// W(α) = (2/π) tr[ρ D(α) Π D†(α)] with α = x + i p, for a cavity-only
/// density matrix. Uses the closed-form displacement matrix elements, so the
/// result is exact for the truncated state. Normalized so ∫W dx dp = 1.
WignerGrid wigner_grid(const DensityMatrix& cavity_rho, std::span<const double> xs, std::span<const double> ps);

/// von Neumann entropy (bits) of the reduced transmon state of a pure state.
double entanglement_entropy(const StateVector& psi, const SpaceDescriptor& space);

}  // namespace bosonq
