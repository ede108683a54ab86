#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "bosonq/codes.hpp"
#include "bosonq/pulse.hpp"
#include "bosonq/space.hpp"

namespace bosonq {

enum class ChannelKind { CavityLoss, TransmonRelaxation, TransmonDephasing, TransmonThermal };
inline constexpr std::array<ChannelKind, 4> kAllChannels{ChannelKind::CavityLoss, ChannelKind::TransmonRelaxation,
                                                         ChannelKind::TransmonDephasing,
                                                         ChannelKind::TransmonThermal};

std::string channel_name(ChannelKind kind);

/// Jump operator a, σ−, σz/√2 or σ+ embedded in the full space.
Operator jump_operator(const SpaceDescriptor& space, ChannelKind kind);

struct DecoherenceChannel {
  ChannelKind kind;
  double rate;  // 1/s
  Operator jump;
};

DecoherenceChannel make_channel(const SpaceDescriptor& space, ChannelKind kind, double rate);

/// Lifetimes in seconds; an infinite lifetime switches the channel off.
struct DecoherenceRates {
  double cavity_lifetime = 1e-3;  // 1/κ
  double t1 = 100e-6;
  double t_phi = 25e-6;
  double n_th = 0.01;  // thermal excitation rate is n_th/T1

  double rate(ChannelKind kind) const;
};

/// One channel per kind with a non-zero rate.
std::vector<DecoherenceChannel> make_channels(const SpaceDescriptor& space, const DecoherenceRates& rates,
                                              bool include_thermal = true);

struct Trajectory {
  std::vector<double> times;  // s
  std::vector<StateVector> states;     // closed propagation
  std::vector<DensityMatrix> densities;  // open propagation
  std::vector<double> mean_photon;
  std::vector<double> transmon_excitation;
  std::vector<double> entropy;  // bits, pure states only

  bool pure() const { return !states.empty(); }
};

/// Schrödinger evolution with the same step propagators as the optimizer.
/// Samples every `stride` steps plus the final state. Throws TruncationError
/// when the top three Fock levels hold more than 1% at any step.
Trajectory propagate_closed(const Waveform& wf, const ControlSystem& sys, const StateVector& psi0, int stride = 1);
Trajectory propagate_closed(const Waveform& wf, const SpaceDescriptor& space, double chi, const StateVector& psi0,
                            int stride = 1);

struct OpenOptions {
  int substeps = 4;                 // splitting substeps per control step
  double trace_tolerance = 1e-7;    // allowed |tr ρ − 1| over the whole gate
  double positivity_floor = -1e-7;  // smallest allowed eigenvalue of the final state
  int max_refinements = 4;          // substep doublings on trace drift
};

/// Lindblad evolution. Each control step is split into `substeps` pieces
/// with the symmetric (Strang) composition of the exact unitary step and the
/// dissipator flow, the latter integrated by RK4. With every rate zero this
/// reduces to the closed propagation.
Trajectory propagate_open(const Waveform& wf, const ControlSystem& sys, const DensityMatrix& rho0,
                          const std::vector<DecoherenceChannel>& channels, int stride = 1,
                          const OpenOptions& options = {});

/// Final states of several initial density matrices propagated together.
std::vector<DensityMatrix> propagate_open_final(const Waveform& wf, const ControlSystem& sys,
                                                std::vector<DensityMatrix> rhos,
                                                const std::vector<DecoherenceChannel>& channels,
                                                const OpenOptions& options = {});

/// The six cardinal input states of a gate and their ideal images.
struct CardinalPairs {
  std::array<StateVector, 6> inputs;
  std::array<StateVector, 6> targets;
};
CardinalPairs cardinal_pairs(const LogicalGate& gate);

struct GateFidelity {
  double fidelity = 0.0;
  double error = 0.0;  // 1 − F
  std::array<double, 6> per_state{};
};

/// F0: six-state average of |⟨U_targ ψ_i|U ψ_i⟩|².
GateFidelity gate_fidelity_closed(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate);
/// F: six-state average of ⟨U_targ ψ_i|ρ_i|U_targ ψ_i⟩ with ρ_i Lindblad-evolved.
GateFidelity gate_fidelity_open(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate,
                                const std::vector<DecoherenceChannel>& channels, const OpenOptions& options = {});

/// Columns t_ns, mean_photon, transmon_excitation, entropy.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

nlohmann::json fidelity_report_json(const GateFidelity& closed, const GateFidelity* open,
                                    const std::vector<DecoherenceChannel>& channels);

}  // namespace bosonq
