#include "bosonq/codes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace bosonq {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Vector coherent_state(int dim, Complex alpha) {
  Vector v(dim);
  Complex amp = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < dim; ++n) {
    if (n > 0) amp *= alpha / std::sqrt(static_cast<double>(n));
    v(n) = amp;
  }
  return v;
}

void require_headroom(int highest_fock, int cavity_dim) {
  if (cavity_dim - 1 < highest_fock + 10) {
    throw ValidationError("cavity_dim " + std::to_string(cavity_dim) + " leaves less than 10 levels above Fock " +
                          std::to_string(highest_fock));
  }
}

}  // namespace

std::string code_name(CodeKind kind) {
  switch (kind) {
    case CodeKind::Bin11: return "bin11";
    case CodeKind::Bin22: return "bin22";
    case CodeKind::Cat4: return "cat4";
  }
  return "unknown";
}

CodeKind parse_code_kind(const std::string& name) {
  const std::string n = lower(name);
  if (n == "bin11" || n == "bin(1,1)") return CodeKind::Bin11;
  if (n == "bin22" || n == "bin(2,2)") return CodeKind::Bin22;
  if (n == "cat4" || n == "cat") return CodeKind::Cat4;
  throw ValidationError("unknown code '" + name + "'");
}

double mean_photon_number(const Vector& cavity_state) {
  double n = 0.0;
  for (Eigen::Index k = 0; k < cavity_state.size(); ++k) n += static_cast<double>(k) * std::norm(cavity_state(k));
  return n / cavity_state.squaredNorm();
}

BosonicCode build_code(const CodeSpec& spec, int cavity_dim) {
  BosonicCode code;
  code.spec = spec;
  code.cavity_dim = cavity_dim;
  const double r3 = std::sqrt(3.0);
  switch (spec.kind) {
    case CodeKind::Bin11:
      require_headroom(4, cavity_dim);
      code.zero_logical = (fock_state(cavity_dim, 0) + fock_state(cavity_dim, 4)) / std::sqrt(2.0);
      code.one_logical = fock_state(cavity_dim, 2);
      break;
    case CodeKind::Bin22:
      require_headroom(9, cavity_dim);
      code.zero_logical = (fock_state(cavity_dim, 0) + r3 * fock_state(cavity_dim, 6)) / 2.0;
      code.one_logical = (r3 * fock_state(cavity_dim, 3) + fock_state(cavity_dim, 9)) / 2.0;
      break;
    case CodeKind::Cat4: {
      if (std::norm(spec.alpha) > cavity_dim / 3.0) {
        throw ValidationError("cat amplitude |alpha|^2 = " + std::to_string(std::norm(spec.alpha)) +
                              " exceeds cavity_dim/3");
      }
      if (std::abs(spec.alpha) < 1e-3) throw ValidationError("cat amplitude must be non-zero");
      const Complex a = spec.alpha;
      const Vector plus = coherent_state(cavity_dim, a) + coherent_state(cavity_dim, -a);
      const Vector imag = coherent_state(cavity_dim, kI * a) + coherent_state(cavity_dim, -kI * a);
      code.zero_logical = (plus + imag).normalized();
      code.one_logical = (plus - imag).normalized();
      break;
    }
  }
  code.zero_mean_photon = mean_photon_number(code.zero_logical);
  code.one_mean_photon = mean_photon_number(code.one_logical);
  code.mean_photon = 0.5 * (code.zero_mean_photon + code.one_mean_photon);
  std::tie(code.zero_error, code.one_error) = error_words(code);
  return code;
}

std::pair<Vector, Vector> error_words(const BosonicCode& code) {
  const Matrix a = cavity_annihilation(code.cavity_dim);
  return {(a * code.zero_logical).normalized(), (a * code.one_logical).normalized()};
}

std::string gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::Identity: return "identity";
    case GateKind::X: return "x";
    case GateKind::Z: return "z";
    case GateKind::Hadamard: return "hadamard";
    case GateKind::Recovery: return "recovery";
    case GateKind::Phase: return "phase";
  }
  return "unknown";
}

GateKind parse_gate_kind(const std::string& name) {
  const std::string n = lower(name);
  if (n == "identity" || n == "i") return GateKind::Identity;
  if (n == "x") return GateKind::X;
  if (n == "z") return GateKind::Z;
  if (n == "hadamard" || n == "h") return GateKind::Hadamard;
  if (n == "recovery" || n == "qec") return GateKind::Recovery;
  if (n == "phase") return GateKind::Phase;
  throw ValidationError("unknown gate '" + name + "'");
}

LogicalGate logical_unitary(const BosonicCode& code, const SpaceDescriptor& space, const GateSpec& spec) {
  if (space.cavity_dim() != code.cavity_dim) throw ValidationError("code and space cavity dimensions differ");
  LogicalGate gate;
  gate.spec = spec;
  const double s = 1.0 / std::sqrt(2.0);
  switch (spec.kind) {
    case GateKind::Identity: gate.logical << 1, 0, 0, 1; break;
    case GateKind::X: gate.logical << 0, 1, 1, 0; break;
    case GateKind::Z: gate.logical << 1, 0, 0, -1; break;
    case GateKind::Hadamard: gate.logical << s, s, s, -s; break;
    case GateKind::Recovery: gate.logical << 1, 0, 0, 1; break;
    case GateKind::Phase: gate.logical << 1, 0, 0, std::exp(kI * spec.phase_angle); break;
  }
  Matrix out_words(code.cavity_dim, 2);
  out_words << code.zero_logical, code.one_logical;
  Matrix in_words = out_words;
  if (spec.kind == GateKind::Recovery) in_words << code.zero_error, code.one_error;

  gate.target = kron(space.transmon_identity(), out_words * gate.logical * in_words.adjoint());
  gate.input_basis.resize(space.total_dim(), 2);
  gate.output_basis.resize(space.total_dim(), 2);
  for (int c = 0; c < 2; ++c) {
    gate.input_basis.col(c) = product_state(space, 0, in_words.col(c));
    gate.output_basis.col(c) = product_state(space, 0, out_words.col(c));
  }
  return gate;
}

Operator codespace_projector(const BosonicCode& code, const SpaceDescriptor& space) {
  const Matrix cavity_proj =
      code.zero_logical * code.zero_logical.adjoint() + code.one_logical * code.one_logical.adjoint();
  Matrix ground = Matrix::Zero(space.transmon_dim(), space.transmon_dim());
  ground(0, 0) = 1.0;
  return kron(ground, cavity_proj);
}

std::array<Eigen::Vector2cd, 6> cardinal_coefficients() {
  const double s = 1.0 / std::sqrt(2.0);
  return {Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(0.0, 1.0), Eigen::Vector2cd(s, s),
          Eigen::Vector2cd(s, -s),    Eigen::Vector2cd(s, kI * s), Eigen::Vector2cd(s, -kI * s)};
}

std::array<StateVector, 6> cardinal_states(const BosonicCode& code, const SpaceDescriptor& space) {
  std::array<StateVector, 6> states;
  const auto coeffs = cardinal_coefficients();
  for (std::size_t i = 0; i < 6; ++i) {
    states[i] = product_state(space, 0, coeffs[i](0) * code.zero_logical + coeffs[i](1) * code.one_logical);
  }
  return states;
}

}  // namespace bosonq
