#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "bosonq/space.hpp"
#include "bosonq/types.hpp"

namespace bosonq {

/// Fourier coefficients of one control: u(t) = dc + Σ_l a_l cos(2π f_l t) + b_l sin(2π f_l t).
/// Amplitudes in MHz.
struct ControlCoefficients {
  double dc = 0.0;
  std::vector<double> cos;
  std::vector<double> sin;
};

struct PulseParams {
  int fourier_terms = 0;   // M
  double f_max = 0.0;      // Hz
  double gate_time = 0.0;  // s
  int steps = 0;           // N
  std::uint64_t seed = 0;
  std::array<ControlCoefficients, kNumControls> controls;

  double dt() const { return gate_time / steps; }
  double time(int j) const { return gate_time * j / steps; }
  /// f_l = l · f_max / M (Hz)
  double frequency(int l) const { return l * f_max / fourier_terms; }
  int params_per_control() const { return 2 * fourier_terms + 1; }
  int parameter_count() const { return static_cast<int>(kNumControls) * params_per_control(); }

  /// Flat layout: per control [dc, a_1..a_M, b_1..b_M].
  RealVector to_vector() const;
  void assign(const RealVector& flat);
};

/// ceil(f_max · T) with a small tolerance against round-off.
int min_fourier_terms(double f_max, double gate_time);

/// Zero-coefficient parameters. M defaults to min_fourier_terms; N = round(T/dt).
/// Throws ValidationError on inconsistent sizes.
PulseParams make_pulse_params(double f_max, double gate_time, double dt, int fourier_terms = 0,
                              std::uint64_t seed = 0);

void validate(const PulseParams& params);

/// Coefficients i.i.d. uniform in [−u_max_k/(4M), u_max_k/(4M)], seeded.
PulseParams random_pulse_params(PulseParams templ, const std::array<double, kNumControls>& u_max_mhz,
                                std::uint64_t seed);

struct Waveform {
  RealMatrix u;  // kNumControls × N, MHz
  double dt = 0.0;
  double gate_time = 0.0;

  int steps() const { return static_cast<int>(u.cols()); }
  std::array<double, kNumControls> at(int j) const {
    return {u(0, j), u(1, j), u(2, j), u(3, j)};
  }
};

Waveform zero_waveform(int steps, double gate_time);

/// u_kj evaluated at t_j = j·dt, j = 0..N−1.
Waveform synthesize(const PulseParams& params);

/// ∂u_kj/∂θ for one control: an N × (2M+1) matrix with columns
/// [1, cos(2π f_l t_j)..., sin(2π f_l t_j)...]. The full Jacobian is block
/// diagonal with this block repeated for every control.
RealMatrix jacobian(const PulseParams& params);

/// Chain rule: maps ∂Ψ/∂u (kNumControls × N) to ∂Ψ/∂θ in the flat layout.
RealVector pull_back(const RealMatrix& basis, const RealMatrix& grad_u);

nlohmann::json to_json(const PulseParams& params);
PulseParams pulse_params_from_json(const nlohmann::json& j);

/// Columns t_ns, transmon_I_MHz, transmon_Q_MHz, cavity_I_MHz, cavity_Q_MHz.
void write_waveform_csv(std::ostream& os, const Waveform& wf);

}  // namespace bosonq
