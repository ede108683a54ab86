#include "bosonq/propagator.hpp"

#include <cmath>
#include <vector>

namespace bosonq {

namespace {

constexpr double kMaxSubstepNorm = 1.0;
constexpr int kMaxSubsteps = 4096;

// Smallest K with θ^K / K! below 1e−18 (θ ≤ 1 gives K ≤ 20).
int taylor_order(double theta) {
  double term = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= theta / k;
    if (term < 1e-18) return std::max(k, 2);
  }
  return 60;
}

}  // namespace

int substep_count(const ControlSystem& sys, const std::array<double, kNumControls>& u, double dt) {
  const double theta = sys.norm_bound(u) * std::abs(dt);
  if (!std::isfinite(theta)) throw NumericalError("non-finite Hamiltonian norm in step propagation");
  const double s = std::ceil(theta / kMaxSubstepNorm);
  if (s > kMaxSubsteps) throw NumericalError("control amplitude too large for step propagation");
  return std::max(1, static_cast<int>(s));
}

namespace {

// v ← exp(−i h tau)^substeps v
void taylor_substeps(const SparseMatrix& h, double tau, int order, int substeps, Matrix& v, Matrix& term,
                     Matrix& next) {
  for (int r = 0; r < substeps; ++r) {
    term = v;
    for (int q = 1; q <= order; ++q) {
      next.noalias() = h * term;
      term = (-kI * tau / static_cast<double>(q)) * next;
      v += term;
    }
  }
}

}  // namespace

void apply_step(const ControlSystem& sys, const std::array<double, kNumControls>& u, double dt, Matrix& v) {
  const int s = substep_count(sys, u, dt);
  const double tau = dt / s;
  const int order = taylor_order(sys.norm_bound(u) * std::abs(tau));
  SparseMatrix h;
  sys.load(u, h);
  Matrix term(v.rows(), v.cols());
  Matrix next(v.rows(), v.cols());
  taylor_substeps(h, tau, order, s, v, term, next);
}

StepGradient step_gradient(const ControlSystem& sys, const std::array<double, kNumControls>& u, double dt,
                           const Matrix& phi, const Matrix& lambda) {
  const int s = substep_count(sys, u, dt);
  const double tau = dt / s;
  const int order = taylor_order(sys.norm_bound(u) * std::abs(tau));
  const Eigen::Index n = phi.rows();
  const Eigen::Index c = phi.cols();
  SparseMatrix h;
  sys.load(u, h);
  Matrix term(n, c), next(n, c);

  // Substep states φ_r = E^r φ and costates μ_i = (E†)^i λ.
  std::vector<Matrix> forward(s);
  forward[0] = phi;
  for (int r = 1; r < s; ++r) {
    forward[r] = forward[r - 1];
    taylor_substeps(h, tau, order, 1, forward[r], term, next);
  }
  std::vector<Matrix> backward(s + 1);
  backward[0] = lambda;
  for (int i = 1; i <= s; ++i) {
    backward[i] = backward[i - 1];
    taylor_substeps(h, -tau, order, 1, backward[i], term, next);
  }

  // 1/m! table
  std::vector<double> inv_fact(2 * order + 2);
  inv_fact[0] = 1.0;
  for (std::size_t m = 1; m < inv_fact.size(); ++m) inv_fact[m] = inv_fact[m - 1] / static_cast<double>(m);

  // C(i,j) = Σ_r Σ_q Σ_c conj(G_q(i,c)) f_q(j,c) on the pattern of H; then
  // ∂⟨λ|U|φ⟩/∂u_k = −iτ Σ_ij (H_k)_ij C(i,j).
  const Eigen::Index nnz = h.nonZeros();
  Vector pair_sum = Vector::Zero(nnz);
  const int* outer = h.outerIndexPtr();
  const int* inner = h.innerIndexPtr();

  std::vector<Matrix> f(order, Matrix(n, c));  // A^q φ_r, A = −iτH
  std::vector<Matrix> g(order, Matrix(n, c));  // (A†)^p μ
  Matrix weighted(n, c);
  for (int r = 0; r < s; ++r) {
    f[0] = forward[r];
    g[0] = backward[s - 1 - r];
    for (int q = 1; q < order; ++q) {
      f[q].noalias() = h * f[q - 1];
      f[q] *= -kI * tau;
      g[q].noalias() = h * g[q - 1];
      g[q] *= kI * tau;
    }
    for (int q = 0; q < order; ++q) {
      // G_q = Σ_{p ≤ K−1−q} g_p / (p+q+1)!
      weighted = inv_fact[q + 1] * g[0];
      for (int p = 1; p + q < order; ++p) weighted += inv_fact[p + q + 1] * g[p];
      for (Eigen::Index col = 0; col < c; ++col) {
        const Complex* w = weighted.col(col).data();
        const Complex* fv = f[q].col(col).data();
        for (Eigen::Index row = 0; row < n; ++row) {
          const Complex wc = std::conj(w[row]);
          for (int pos = outer[row]; pos < outer[row + 1]; ++pos) pair_sum(pos) += wc * fv[inner[pos]];
        }
      }
    }
  }
  StepGradient out;
  for (std::size_t k = 0; k < kNumControls; ++k) {
    out.d_overlap[k] = (-kI * tau) * sys.generator_values[k].cwiseProduct(pair_sum).sum();
  }
  out.lambda_prev = std::move(backward[s]);
  return out;
}

Operator total_propagator(const ControlSystem& sys, const Waveform& wf) {
  Matrix u = Matrix::Identity(sys.space.total_dim(), sys.space.total_dim());
  for (int j = 0; j < wf.steps(); ++j) apply_step(sys, wf.at(j), wf.dt, u);
  return u;
}

Operator total_propagator(const Waveform& wf, const SpaceDescriptor& space, double chi) {
  return total_propagator(ControlSystem(space, chi), wf);
}

double unitarity_defect(const Operator& u) {
  return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace bosonq
