#pragma once

#include <array>

#include "bosonq/pulse.hpp"
#include "bosonq/space.hpp"
#include "bosonq/types.hpp"

namespace bosonq {

// Piecewise-constant propagation through the sparse Hamiltonian of a
// ControlSystem. Each step exponential exp(−i H_j Δt) is split into s equal
// substeps with τ‖H_j‖ ≤ 1 and each substep is a Taylor series truncated
// below double precision. Applying it to a block of columns costs only sparse
// matrix-vector products.

/// Number of equal substeps used for one control step.
int substep_count(const ControlSystem& sys, const std::array<double, kNumControls>& u, double dt);

/// v ← exp(−i H(u) dt) v. Negative dt applies the adjoint step.
void apply_step(const ControlSystem& sys, const std::array<double, kNumControls>& u, double dt, Matrix& v);

struct StepGradient {
  /// Σ_c ⟨λ_c| ∂U/∂u_k |φ_c⟩ for each control (u in MHz).
  std::array<Complex, kNumControls> d_overlap{};
  /// U† λ, the costate one step earlier.
  Matrix lambda_prev;
};

/// Exact derivative of ⟨λ|U|φ⟩ with respect to the step amplitudes, via the
/// power series of the Fréchet derivative of the exponential.
StepGradient step_gradient(const ControlSystem& sys, const std::array<double, kNumControls>& u, double dt,
                           const Matrix& phi, const Matrix& lambda);

/// U_tot = U_{N−1} ⋯ U_0 as a dense matrix.
Operator total_propagator(const ControlSystem& sys, const Waveform& wf);
Operator total_propagator(const Waveform& wf, const SpaceDescriptor& space, double chi);

/// max |U†U − 1|
double unitarity_defect(const Operator& u);

}  // namespace bosonq
