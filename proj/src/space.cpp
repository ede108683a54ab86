#include "bosonq/space.hpp"

#include <cmath>
#include <string>

#include "bosonq/linalg.hpp"

namespace bosonq {

SpaceDescriptor::SpaceDescriptor(int transmon_dim, int cavity_dim)
    : transmon_dim_(transmon_dim), cavity_dim_(cavity_dim) {
  if (transmon_dim < 2 || cavity_dim < 2) {
    throw ValidationError("space dimensions must be >= 2 (got transmon=" +
                          std::to_string(transmon_dim) + ", cavity=" + std::to_string(cavity_dim) + ")");
  }
  transmon_identity_ = Matrix::Identity(transmon_dim, transmon_dim);
  cavity_identity_ = Matrix::Identity(cavity_dim, cavity_dim);
  identity_ = Matrix::Identity(total_dim(), total_dim());
}

SpaceDescriptor make_space(int transmon_dim, int cavity_dim) {
  return SpaceDescriptor(transmon_dim, cavity_dim);
}

Matrix cavity_annihilation(int cavity_dim) {
  Matrix a = Matrix::Zero(cavity_dim, cavity_dim);
  for (int n = 1; n < cavity_dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix cavity_number(int cavity_dim) {
  Matrix n = Matrix::Zero(cavity_dim, cavity_dim);
  for (int k = 0; k < cavity_dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

Matrix cavity_displacement(int cavity_dim, Complex alpha) {
  const Matrix a = cavity_annihilation(cavity_dim);
  const Matrix generator = alpha * a.adjoint() - std::conj(alpha) * a;
  // generator is anti-Hermitian: D = exp(-i H) with H = i·generator.
  return expm_hermitian(kI * generator, 1.0);
}

namespace {

Matrix two_level(int dim, Complex gg, Complex ge, Complex eg, Complex ee) {
  Matrix m = Matrix::Zero(dim, dim);
  m(0, 0) = gg;
  m(0, 1) = ge;
  m(1, 0) = eg;
  m(1, 1) = ee;
  return m;
}

}  // namespace

Matrix transmon_sigma_x(int d) { return two_level(d, 0.0, 1.0, 1.0, 0.0); }
Matrix transmon_sigma_y(int d) { return two_level(d, 0.0, kI, -kI, 0.0); }
Matrix transmon_sigma_z(int d) { return two_level(d, -1.0, 0.0, 0.0, 1.0); }
Matrix transmon_sigma_minus(int d) { return two_level(d, 0.0, 1.0, 0.0, 0.0); }
Matrix transmon_sigma_plus(int d) { return two_level(d, 0.0, 0.0, 1.0, 0.0); }
Matrix transmon_excited_projector(int d) { return two_level(d, 0.0, 0.0, 0.0, 1.0); }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator on_transmon(const SpaceDescriptor& space, const Matrix& transmon_op) {
  return kron(transmon_op, space.cavity_identity());
}

Operator on_cavity(const SpaceDescriptor& space, const Matrix& cavity_op) {
  return kron(space.transmon_identity(), cavity_op);
}

Vector fock_state(int cavity_dim, int n) {
  if (n < 0 || n >= cavity_dim) throw ValidationError("Fock index outside the cavity truncation");
  Vector v = Vector::Zero(cavity_dim);
  v(n) = 1.0;
  return v;
}

StateVector product_state(const SpaceDescriptor& space, int transmon_level, const Vector& cavity_state) {
  if (cavity_state.size() != space.cavity_dim()) {
    throw ValidationError("cavity state dimension does not match the space");
  }
  StateVector psi = StateVector::Zero(space.total_dim());
  psi.segment(space.index(transmon_level, 0), space.cavity_dim()) = cavity_state;
  return psi;
}

Operator build_static_hamiltonian(const SpaceDescriptor& space, double chi) {
  return chi * kron(transmon_excited_projector(space.transmon_dim()), cavity_number(space.cavity_dim()));
}

const char* control_name(std::size_t k) {
  static constexpr const char* kNames[kNumControls] = {"transmon_I", "transmon_Q", "cavity_I", "cavity_Q"};
  return kNames[k];
}

std::array<Operator, kNumControls> control_generators(const SpaceDescriptor& space) {
  const int td = space.transmon_dim();
  const Matrix a = cavity_annihilation(space.cavity_dim());
  return {
      on_transmon(space, 0.5 * transmon_sigma_x(td)),
      on_transmon(space, 0.5 * transmon_sigma_y(td)),
      on_cavity(space, 0.5 * (a + a.adjoint())),
      on_cavity(space, (a - a.adjoint()) / (2.0 * kI)),
  };
}

ControlSystem::ControlSystem(const SpaceDescriptor& s, double chi_in) : space(s), chi(chi_in) {
  drift = build_static_hamiltonian(space, chi).diagonal().real();
  const auto dense = control_generators(space);
  for (std::size_t k = 0; k < kNumControls; ++k) {
    generators[k] = (kMHzToRadPerSecond * dense[k]).sparseView(1.0, 1e-300);
    generators[k].makeCompressed();
    double col_max = 0.0;
    for (int c = 0; c < generators[k].outerSize(); ++c) {
      double col = 0.0;
      for (SparseMatrix::InnerIterator it(generators[k], c); it; ++it) col += std::abs(it.value());
      col_max = std::max(col_max, col);
    }
    generator_norms[k] = col_max;
  }

  // Mark every structural entry with a positive value so nothing cancels.
  const int n = space.total_dim();
  Matrix mask = Matrix::Identity(n, n);
  for (const auto& g : generators) mask += Matrix(g).cwiseAbs().cast<Complex>();
  pattern = mask.sparseView(1.0, 1e-300);
  pattern.makeCompressed();
  const Eigen::Index nnz = pattern.nonZeros();
  drift_values = Vector::Zero(nnz);
  for (auto& v : generator_values) v = Vector::Zero(nnz);
  std::array<Matrix, kNumControls> dense_gens;
  for (std::size_t k = 0; k < kNumControls; ++k) dense_gens[k] = Matrix(generators[k]);
  Eigen::Index pos = 0;
  for (int r = 0; r < pattern.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(pattern, r); it; ++it, ++pos) {
      if (it.row() == it.col()) drift_values(pos) = drift(it.row());
      for (std::size_t k = 0; k < kNumControls; ++k) generator_values[k](pos) = dense_gens[k](it.row(), it.col());
    }
  }
}

void ControlSystem::load(const std::array<double, kNumControls>& u, SparseMatrix& h) const {
  if (h.nonZeros() != pattern.nonZeros()) h = pattern;
  Eigen::Map<Vector> values(h.valuePtr(), h.nonZeros());
  values = drift_values;
  for (std::size_t k = 0; k < kNumControls; ++k) {
    if (u[k] != 0.0) values += u[k] * generator_values[k];
  }
}

void ControlSystem::apply(const std::array<double, kNumControls>& u, const Eigen::Ref<const Matrix>& v,
                          Eigen::Ref<Matrix> out) const {
  SparseMatrix h;
  load(u, h);
  out.noalias() = h * v;
}

double ControlSystem::norm_bound(const std::array<double, kNumControls>& u) const {
  double bound = drift.cwiseAbs().maxCoeff();
  for (std::size_t k = 0; k < kNumControls; ++k) bound += std::abs(u[k]) * generator_norms[k];
  return bound;
}

Operator ControlSystem::dense_hamiltonian(const std::array<double, kNumControls>& u) const {
  Operator h = drift.cast<Complex>().asDiagonal();
  for (std::size_t k = 0; k < kNumControls; ++k) h += u[k] * Matrix(generators[k]);
  return h;
}

double max_abs_deviation_from_hermitian(const Matrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& a, double tol) { return max_abs_deviation_from_hermitian(a) <= tol; }

double top_fock_population(const SpaceDescriptor& space, const StateVector& psi, int levels) {
  double pop = 0.0;
  for (int t = 0; t < space.transmon_dim(); ++t) {
    for (int n = space.cavity_dim() - levels; n < space.cavity_dim(); ++n) {
      if (n >= 0) pop += std::norm(psi(space.index(t, n)));
    }
  }
  return pop;
}

double top_fock_population(const SpaceDescriptor& space, const DensityMatrix& rho, int levels) {
  double pop = 0.0;
  for (int t = 0; t < space.transmon_dim(); ++t) {
    for (int n = space.cavity_dim() - levels; n < space.cavity_dim(); ++n) {
      if (n >= 0) pop += rho(space.index(t, n), space.index(t, n)).real();
    }
  }
  return pop;
}

void check_truncation(const SpaceDescriptor& space, const StateVector& psi, double threshold) {
  const double pop = top_fock_population(space, psi);
  if (pop > threshold) {
    throw TruncationError("cavity truncation leakage " + std::to_string(pop) + " exceeds " +
                          std::to_string(threshold));
  }
}

void check_truncation(const SpaceDescriptor& space, const DensityMatrix& rho, double threshold) {
  const double pop = top_fock_population(space, rho);
  if (pop > threshold) {
    throw TruncationError("cavity truncation leakage " + std::to_string(pop) + " exceeds " +
                          std::to_string(threshold));
  }
}

DensityMatrix reduce_to_cavity(const SpaceDescriptor& space, const DensityMatrix& rho) {
  const int c = space.cavity_dim();
  DensityMatrix out = DensityMatrix::Zero(c, c);
  for (int t = 0; t < space.transmon_dim(); ++t) out += rho.block(t * c, t * c, c, c);
  return out;
}

DensityMatrix reduce_to_transmon(const SpaceDescriptor& space, const DensityMatrix& rho) {
  const int c = space.cavity_dim();
  const int td = space.transmon_dim();
  DensityMatrix out(td, td);
  for (int s = 0; s < td; ++s) {
    for (int t = 0; t < td; ++t) out(s, t) = rho.block(s * c, t * c, c, c).trace();
  }
  return out;
}

DensityMatrix pure_density(const StateVector& psi) { return psi * psi.adjoint(); }

}  // namespace bosonq
