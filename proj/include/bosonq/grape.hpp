#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bosonq/codes.hpp"
#include "bosonq/lbfgs.hpp"
#include "bosonq/pulse.hpp"
#include "bosonq/space.hpp"

namespace bosonq {

/// Bandwidth, time step and amplitude scale of the synthesized waveforms.
struct ConstraintPreset {
  std::string name;
  double f_max = 30.0 * kMHz;  // Hz
  double dt = 2.0 * kNano;     // s
  std::array<double, kNumControls> u_max_mhz{20.0, 20.0, 3.0, 3.0};
};

/// f_max 30 MHz, Δt 2 ns, u_max 20 MHz (transmon) / 3 MHz (cavity).
ConstraintPreset standard_preset();
/// f_max 45 MHz, Δt 1 ns, u_max 20 MHz (transmon) / 15 MHz (cavity).
ConstraintPreset weak_preset();
ConstraintPreset preset_by_name(const std::string& name);

struct PenaltyWeights {
  double gate_error = 1.0;  // c1
  double amplitude = 1e-4;  // c2
  double boundary = 1e-3;   // c3
};

struct StopCriteria {
  int max_iterations = 2000;
  double gradient_tolerance = 1e-9;
  double target_gate_error = 1e-4;  // stop once Ψ1 drops below
};

struct OptimizationProblem {
  SpaceDescriptor space;
  double chi;  // rad/s
  BosonicCode code;
  LogicalGate target;
  PulseParams params_template;
  std::string preset_name;
  std::array<double, kNumControls> u_max_mhz;
  PenaltyWeights weights;
  StopCriteria stop;
  ControlSystem system;
};

/// Validates and assembles a problem. Throws ValidationError on non-positive
/// u_max, negative weights or mismatched dimensions.
OptimizationProblem make_problem(const SpaceDescriptor& space, double chi, const BosonicCode& code,
                                 const GateSpec& gate, double gate_time, const ConstraintPreset& preset,
                                 const PenaltyWeights& weights = {}, const StopCriteria& stop = {},
                                 int fourier_terms = 0);

/// Ψ1 = 1 − |tr[P Û_targ† P Û_tot]|² / d², d = tr P.
double gate_error_cost(const Operator& u_tot, const Operator& target, const Operator& projector);
/// Same cost through the 2-dimensional input/output bases of the gate:
/// 1 − |tr(G† Q_out† U Q_in)|² / 4. Agrees with the projector form for
/// logical gates; for Recovery the input space is the error space.
double gate_error_cost(const Operator& u_tot, const LogicalGate& target);

/// Σ_k (1/N) Σ_j exp[(u_kj/u_max_k)⁴]; saturates at the largest double.
double amplitude_penalty(const Waveform& wf, const std::array<double, kNumControls>& u_max_mhz,
                         RealMatrix* grad_u = nullptr);
/// Σ_k |u_k0|² + |u_k,N−1|²
double boundary_penalty(const Waveform& wf, RealMatrix* grad_u = nullptr);

struct CostTerms {
  double gate_error = 0.0;  // Ψ1
  double amplitude = 0.0;   // Ψ2
  double boundary = 0.0;    // Ψ3
  double total = 0.0;
};

struct CostEvaluation {
  CostTerms terms;
  RealVector gradient;  // flat parameter layout
};

/// Ψ1 of a waveform, via forward propagation of the two input columns.
double gate_error_of(const Waveform& wf, const OptimizationProblem& problem);

CostEvaluation cost_and_gradient(const PulseParams& params, const OptimizationProblem& problem);

struct OptimizedGate {
  PulseParams params;
  Waveform waveform;
  CostTerms terms;
  std::optional<double> intrinsic_error;  // r0, filled in by the dynamics evaluation
  int iterations = 0;
  int evaluations = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  std::string status;
  std::vector<double> trace;
};

/// L-BFGS descent from the given initial parameters.
OptimizedGate optimize(const OptimizationProblem& problem, const PulseParams& initial);
/// Random initial parameters drawn with `seed`, then optimize.
OptimizedGate optimize(const OptimizationProblem& problem, std::uint64_t seed);

/// Per-run seed of restart `index`.
std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t index);

struct RestartOutcome {
  std::uint64_t seed = 0;
  std::optional<OptimizedGate> gate;
  std::string error;  // set when the run failed
};

/// `count` independent runs with derived seeds. Results are ordered by restart
/// index and do not depend on `jobs`.
std::vector<RestartOutcome> random_restarts(const OptimizationProblem& problem, std::size_t count,
                                            std::uint64_t base_seed, int jobs = 1);

}  // namespace bosonq
