#pragma once

#include <array>
#include <cstddef>

#include "bosonq/types.hpp"

namespace bosonq {

/// Transmon ⊗ cavity Hilbert space. Transmon levels beyond |e⟩ are carried
/// inertly: every transmon operator acts on the {|g⟩, |e⟩} pair only.
class SpaceDescriptor {
 public:
  SpaceDescriptor(int transmon_dim, int cavity_dim);

  int transmon_dim() const { return transmon_dim_; }
  int cavity_dim() const { return cavity_dim_; }
  int total_dim() const { return transmon_dim_ * cavity_dim_; }

  /// Basis index of |transmon_level, fock⟩.
  int index(int transmon_level, int fock) const {
    return transmon_level * cavity_dim_ + fock;
  }

  const Matrix& transmon_identity() const { return transmon_identity_; }
  const Matrix& cavity_identity() const { return cavity_identity_; }
  const Matrix& identity() const { return identity_; }

  bool operator==(const SpaceDescriptor& other) const {
    return transmon_dim_ == other.transmon_dim_ && cavity_dim_ == other.cavity_dim_;
  }

 private:
  int transmon_dim_;
  int cavity_dim_;
  Matrix transmon_identity_;
  Matrix cavity_identity_;
  Matrix identity_;
};

/// Throws ValidationError when either factor is smaller than 2.
SpaceDescriptor make_space(int transmon_dim = 2, int cavity_dim = 30);

// Single-factor operators.
Matrix cavity_annihilation(int cavity_dim);
Matrix cavity_number(int cavity_dim);
/// Displacement exp(α a† − α* a) on the truncated cavity.
Matrix cavity_displacement(int cavity_dim, Complex alpha);
Matrix transmon_sigma_x(int transmon_dim);
Matrix transmon_sigma_y(int transmon_dim);
/// |e⟩⟨e| − |g⟩⟨g|
Matrix transmon_sigma_z(int transmon_dim);
/// |g⟩⟨e|
Matrix transmon_sigma_minus(int transmon_dim);
/// |e⟩⟨g|
Matrix transmon_sigma_plus(int transmon_dim);
Matrix transmon_excited_projector(int transmon_dim);

Matrix kron(const Matrix& a, const Matrix& b);

// Full-space embeddings.
Operator on_transmon(const SpaceDescriptor& space, const Matrix& transmon_op);
Operator on_cavity(const SpaceDescriptor& space, const Matrix& cavity_op);
StateVector product_state(const SpaceDescriptor& space, int transmon_level, const Vector& cavity_state);
Vector fock_state(int cavity_dim, int n);

/// χ a†a ⊗ |e⟩⟨e| with chi in rad/s.
Operator build_static_hamiltonian(const SpaceDescriptor& space, double chi);

enum class Control : std::size_t { TransmonI = 0, TransmonQ = 1, CavityI = 2, CavityQ = 3 };
inline constexpr std::size_t kNumControls = 4;
const char* control_name(std::size_t k);

/// {σx/2, σy/2, (a+a†)/2, (a−a†)/(2i)}, each embedded in the full space.
std::array<Operator, kNumControls> control_generators(const SpaceDescriptor& space);

/// Sparse form of the system Hamiltonian used by the propagators:
/// H = diag(drift) + 2π·1e6 Σ_k u_k[MHz] · generator_k.
struct ControlSystem {
  SpaceDescriptor space;
  double chi;
  RealVector drift;
  std::array<SparseMatrix, kNumControls> generators;
  std::array<double, kNumControls> generator_norms;  // induced 1-norm bounds

  /// Union sparsity pattern of drift and generators, with the values of each
  /// term aligned to it, so H(u) is assembled by a few vector operations.
  SparseMatrix pattern;
  Vector drift_values;
  std::array<Vector, kNumControls> generator_values;

  ControlSystem(const SpaceDescriptor& space, double chi);

  /// h ← H(u) on the union pattern.
  void load(const std::array<double, kNumControls>& u, SparseMatrix& h) const;
  /// out = H v for amplitudes u (MHz).
  void apply(const std::array<double, kNumControls>& u, const Eigen::Ref<const Matrix>& v,
             Eigen::Ref<Matrix> out) const;
  /// Upper bound on ‖H‖ for amplitudes u.
  double norm_bound(const std::array<double, kNumControls>& u) const;
  Operator dense_hamiltonian(const std::array<double, kNumControls>& u) const;
};

double max_abs_deviation_from_hermitian(const Matrix& a);
bool is_hermitian(const Matrix& a, double tol = 1e-12);

/// Population in the top `levels` Fock states of the cavity.
double top_fock_population(const SpaceDescriptor& space, const StateVector& psi, int levels = 3);
double top_fock_population(const SpaceDescriptor& space, const DensityMatrix& rho, int levels = 3);

/// Throws TruncationError when more than `threshold` of the population sits in
/// the top three Fock levels.
inline constexpr double kLeakageThreshold = 0.01;
void check_truncation(const SpaceDescriptor& space, const StateVector& psi,
                      double threshold = kLeakageThreshold);
void check_truncation(const SpaceDescriptor& space, const DensityMatrix& rho,
                      double threshold = kLeakageThreshold);

DensityMatrix reduce_to_cavity(const SpaceDescriptor& space, const DensityMatrix& rho);
DensityMatrix reduce_to_transmon(const SpaceDescriptor& space, const DensityMatrix& rho);
DensityMatrix pure_density(const StateVector& psi);

}  // namespace bosonq
