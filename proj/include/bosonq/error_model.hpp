#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bosonq/codes.hpp"
#include "bosonq/dynamics.hpp"
#include "bosonq/pulse.hpp"
#include "bosonq/space.hpp"

namespace bosonq {

/// Closed trajectories of the six cardinal inputs of a gate, sampled at every
/// control step (N+1 samples).
struct CardinalTrajectories {
  std::vector<double> times;  // s
  std::array<std::vector<StateVector>, 6> states;
};

CardinalTrajectories cardinal_trajectories(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate);

struct JumpStatistics {
  double p = 0.0;        // ⟨ψ|L†L|ψ⟩
  double l_prime = 0.0;  // |⟨ψ|L|ψ⟩|²
  double s = 0.0;        // p − l′
};

JumpStatistics jump_statistics(const StateVector& psi, const Operator& jump);

struct SusceptibilityTimecourse {
  ChannelKind kind;
  std::vector<double> times;
  // indexed [state][sample]
  std::array<std::vector<double>, 6> p;
  std::array<std::vector<double>, 6> l_prime;
  std::array<std::vector<double>, 6> s;
};

/// p = ⟨ψ|L†L|ψ⟩, l′ = |⟨ψ|L|ψ⟩|², s = p − l′ along each trajectory.
SusceptibilityTimecourse susceptibility_timecourse(const CardinalTrajectories& traj, ChannelKind kind,
                                                   const Operator& jump);

struct ChannelSusceptibility {
  ChannelKind kind;
  double rate = 0.0;  // 1/s
  double p = 0.0;
  double l_prime = 0.0;
  double s = 0.0;
};

/// Trapezoidal time average over the gate and arithmetic mean over the six states.
ChannelSusceptibility gate_susceptibility(const SusceptibilityTimecourse& tc, double rate = 0.0);

/// r′ = T Σ_k γ_k s_k
double decoherence_error(double gate_time, const std::vector<ChannelSusceptibility>& channels);

/// r_L − (r0 + r′)
double model_residual(double r_l, double r0, double r_prime);

struct SusceptibilityReport {
  double gate_time = 0.0;
  std::vector<ChannelSusceptibility> channels;
  double r_prime = 0.0;
  double r0 = 0.0;
  std::optional<double> r_l;
  std::optional<double> residual;
};

/// Susceptibilities of every channel (the rates only weight r′), plus r0.
SusceptibilityReport susceptibility_report(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate,
                                           const std::vector<DecoherenceChannel>& channels,
                                           std::vector<SusceptibilityTimecourse>* timecourses = nullptr);

nlohmann::json to_json(const SusceptibilityReport& report);

/// Long format: channel, state, t_ns, p, l_prime, s.
void write_timecourse_csv(std::ostream& os, const std::vector<SusceptibilityTimecourse>& timecourses);

/// Six-state average of s for a bare two-level system at rest. Transmon
/// channels only.
double idle_susceptibility(ChannelKind kind);

struct SigmaZMoments {
  double mean = 0.0;     // Ave ⟨σz⟩
  double std = 0.0;      // Std ⟨σz⟩
  double mean_sq = 0.0;  // Ave ⟨σz⟩²
  double std_sq = 0.0;   // Std ⟨σz⟩²
};

/// Moments of ⟨σz⟩ for pure states uniformly distributed on the Bloch sphere,
/// by Gauss-Legendre quadrature over cos θ.
SigmaZMoments sigma_z_moment_stats();

struct EnsembleStats {
  double average = 0.0;
  double std = 0.0;  // sample standard deviation
  double rsd = 0.0;  // std / average
};

EnsembleStats ensemble_stats(const std::vector<double>& values);

/// Least-squares slope of ln r0 against T (µs); returns the decay constant a
/// of r0 ∼ exp(−a T). Throws on fewer than three points or r0 ≤ 0.
double fit_intrinsic_decay(const std::vector<std::pair<double, double>>& gate_time_us_and_r0);

/// Constants of the achievable-error bound
/// r ≥ exp(−a T) + T (s_relax/T1 + s_dep/Tφ + κ s_loss_per_photon n̄).
struct ErrorBoundParams {
  double decay_per_us = 11.05;
  double s_relax = 0.25;
  double s_dep = 0.31;
  double s_loss_per_photon = 0.94;
  double mean_photon = 2.0;
  double t1_us = 100.0;
  double t_phi_us = 25.0;
  double cavity_lifetime_us = 1000.0;

  void validate() const;
};

/// Intrinsic decay constants for the codes (1/µs).
double default_decay_constant(CodeKind kind);

double error_bound(double gate_time_us, const ErrorBoundParams& params);
/// Decoherence part T (s_relax/T1 + s_dep/Tφ + κ s n̄) alone.
double error_bound_decoherence(double gate_time_us, const ErrorBoundParams& params);

struct BoundMinimum {
  double gate_time_us = 0.0;
  double value = 0.0;
};

/// Minimum of error_bound over T in [lo, hi] µs (Brent).
BoundMinimum minimize_bound(const ErrorBoundParams& params, double lo_us = 0.05, double hi_us = 5.0);

struct BoundHeatmap {
  std::vector<double> gate_times_us;
  std::vector<double> t_phis_us;
  RealMatrix values;  // values(i, j) at (gate_times_us[i], t_phis_us[j])
};

BoundHeatmap bound_heatmap(const std::vector<double>& gate_times_us, const std::vector<double>& t_phis_us,
                           const ErrorBoundParams& params);

/// Matrix layout: first row holds the T_phi axis, first column the T_gate axis.
void write_heatmap_csv(std::ostream& os, const BoundHeatmap& map);

/// Replaces the susceptibility constants by ensemble minima (s_loss / n̄ for the cavity).
ErrorBoundParams bound_params_from_ensemble(const std::vector<SusceptibilityReport>& reports, double mean_photon,
                                            ErrorBoundParams base = {});

/// Per-channel ensemble statistics of s.
struct SusceptibilityRow {
  ChannelKind kind;
  EnsembleStats stats;
};
std::vector<SusceptibilityRow> susceptibility_table(const std::vector<SusceptibilityReport>& reports);
void write_table_text(std::ostream& os, const std::vector<SusceptibilityRow>& rows);
void write_table_csv(std::ostream& os, const std::vector<SusceptibilityRow>& rows);

/// Histograms of several series over the same bin edges.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::pair<std::string, std::vector<int>>> counts;
};

/// `bins` equal bins spanning the pooled range of all series.
Histogram make_histogram(const std::vector<std::pair<std::string, std::vector<double>>>& series, int bins);
void write_histogram_csv(std::ostream& os, const Histogram& hist);

}  // namespace bosonq
