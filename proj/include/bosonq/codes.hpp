#pragma once

#include <array>
#include <optional>
#include <string>

#include "bosonq/space.hpp"
#include "bosonq/types.hpp"

namespace bosonq {

enum class CodeKind { Bin11, Bin22, Cat4 };

struct CodeSpec {
  CodeKind kind = CodeKind::Bin11;
  Complex alpha = 0.0;  // Cat4 only
};

std::string code_name(CodeKind kind);
/// Accepts "bin11", "bin22", "cat4" (case-insensitive).
CodeKind parse_code_kind(const std::string& name);

struct BosonicCode {
  CodeSpec spec;
  int cavity_dim = 0;
  Vector zero_logical;
  Vector one_logical;
  Vector zero_error;
  Vector one_error;
  /// Average of the two codeword photon numbers. The binomial codes have
  /// equal codeword photon numbers; the 4-leg cat only approximately.
  double mean_photon = 0.0;
  double zero_mean_photon = 0.0;
  double one_mean_photon = 0.0;
};

/// Builds the codewords on a cavity truncated at cavity_dim.
/// Throws ValidationError when the truncation leaves less than 10 Fock levels
/// above the highest codeword level (binomial) or when |α|² > cavity_dim/3 (cat).
BosonicCode build_code(const CodeSpec& spec, int cavity_dim);

/// Normalized a|k_L⟩ for k = 0, 1.
std::pair<Vector, Vector> error_words(const BosonicCode& code);

enum class GateKind { Identity, X, Z, Hadamard, Recovery, Phase };

struct GateSpec {
  GateKind kind = GateKind::Hadamard;
  double phase_angle = 0.0;  // Phase only: diag(1, e^{iθ}) on the codespace
};

std::string gate_name(GateKind kind);
GateKind parse_gate_kind(const std::string& name);

/// Target unitary 1_t ⊗ (Σ |out_i⟩ G_ij ⟨in_j|). For logical gates the in/out
/// pair is the codespace; Recovery maps the error words onto the codewords.
/// The action outside the input space is left at zero.
struct LogicalGate {
  GateSpec spec;
  Operator target;
  Matrix input_basis;   // total_dim × 2, |g⟩ ⊗ input words
  Matrix output_basis;  // total_dim × 2, |g⟩ ⊗ codewords
  Eigen::Matrix2cd logical;  // G in the basis above
};

LogicalGate logical_unitary(const BosonicCode& code, const SpaceDescriptor& space, const GateSpec& gate);

/// |g⟩⟨g| ⊗ (|0_L⟩⟨0_L| + |1_L⟩⟨1_L|)
Operator codespace_projector(const BosonicCode& code, const SpaceDescriptor& space);

/// Coefficients (c0, c1) of the six cardinal points of the logical Bloch sphere:
/// |0⟩, |1⟩, (|0⟩ ± |1⟩)/√2, (|0⟩ ± i|1⟩)/√2.
std::array<Eigen::Vector2cd, 6> cardinal_coefficients();

/// |g⟩ ⊗ cardinal codespace states.
std::array<StateVector, 6> cardinal_states(const BosonicCode& code, const SpaceDescriptor& space);

/// Mean photon number ⟨ψ|a†a|ψ⟩ of a cavity vector.
double mean_photon_number(const Vector& cavity_state);

}  // namespace bosonq
