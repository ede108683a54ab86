#include "bosonq/dynamics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "bosonq/linalg.hpp"
#include "bosonq/metrics.hpp"
#include "bosonq/propagator.hpp"

namespace bosonq {

std::string channel_name(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::CavityLoss: return "cavity_loss";
    case ChannelKind::TransmonRelaxation: return "transmon_relaxation";
    case ChannelKind::TransmonDephasing: return "transmon_dephasing";
    case ChannelKind::TransmonThermal: return "transmon_thermal";
  }
  return "unknown";
}

Operator jump_operator(const SpaceDescriptor& space, ChannelKind kind) {
  const int td = space.transmon_dim();
  switch (kind) {
    case ChannelKind::CavityLoss: return on_cavity(space, cavity_annihilation(space.cavity_dim()));
    case ChannelKind::TransmonRelaxation: return on_transmon(space, transmon_sigma_minus(td));
    case ChannelKind::TransmonDephasing: return on_transmon(space, transmon_sigma_z(td) / std::sqrt(2.0));
    case ChannelKind::TransmonThermal: return on_transmon(space, transmon_sigma_plus(td));
  }
  throw ValidationError("unknown channel kind");
}

DecoherenceChannel make_channel(const SpaceDescriptor& space, ChannelKind kind, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw ValidationError("decoherence rate of " + channel_name(kind) + " must be finite and >= 0");
  }
  return {kind, rate, jump_operator(space, kind)};
}

double DecoherenceRates::rate(ChannelKind kind) const {
  auto inverse = [](double lifetime, const char* name) {
    if (!(lifetime > 0.0)) throw ValidationError(std::string(name) + " must be positive");
    return std::isinf(lifetime) ? 0.0 : 1.0 / lifetime;
  };
  switch (kind) {
    case ChannelKind::CavityLoss: return inverse(cavity_lifetime, "cavity lifetime 1/kappa");
    case ChannelKind::TransmonRelaxation: return inverse(t1, "T1");
    case ChannelKind::TransmonDephasing: return inverse(t_phi, "T_phi");
    case ChannelKind::TransmonThermal:
      if (!(n_th >= 0.0) || !std::isfinite(n_th)) throw ValidationError("n_th must be finite and >= 0");
      return n_th * inverse(t1, "T1");
  }
  return 0.0;
}

std::vector<DecoherenceChannel> make_channels(const SpaceDescriptor& space, const DecoherenceRates& rates,
                                              bool include_thermal) {
  std::vector<DecoherenceChannel> out;
  for (ChannelKind kind : kAllChannels) {
    if (kind == ChannelKind::TransmonThermal && !include_thermal) continue;
    const double rate = rates.rate(kind);
    if (rate > 0.0) out.push_back(make_channel(space, kind, rate));
  }
  return out;
}

namespace {

RealVector number_diagonal(const SpaceDescriptor& space) {
  RealVector d(space.total_dim());
  for (int t = 0; t < space.transmon_dim(); ++t) {
    for (int n = 0; n < space.cavity_dim(); ++n) d(space.index(t, n)) = n;
  }
  return d;
}

RealVector excited_diagonal(const SpaceDescriptor& space) {
  RealVector d = RealVector::Zero(space.total_dim());
  for (int n = 0; n < space.cavity_dim(); ++n) d(space.index(1, n)) = 1.0;
  return d;
}

void check_normalized(const StateVector& psi, const SpaceDescriptor& space) {
  if (psi.size() != space.total_dim()) throw ValidationError("initial state dimension does not match the space");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw ValidationError("initial state is not normalized");
}

void check_waveform(const Waveform& wf) {
  if (wf.u.rows() != static_cast<Eigen::Index>(kNumControls) || wf.steps() < 1) {
    throw ValidationError("waveform must have 4 rows and at least one step");
  }
  if (!wf.u.allFinite()) throw ValidationError("waveform contains non-finite amplitudes");
  if (!(wf.dt > 0.0)) throw ValidationError("waveform time step must be positive");
}

// Sparse jump operators and the diagonal of Σ γ L†L.
class Dissipator {
 public:
  Dissipator(const SpaceDescriptor& space, const std::vector<DecoherenceChannel>& channels) {
    const int n = space.total_dim();
    Matrix k_sum = Matrix::Zero(n, n);
    for (const auto& ch : channels) {
      if (!(ch.rate >= 0.0) || !std::isfinite(ch.rate)) throw ValidationError("decoherence rates must be >= 0");
      if (ch.jump.rows() != n || ch.jump.cols() != n) throw ValidationError("jump operator dimension mismatch");
      if (ch.rate == 0.0) continue;
      SparseMatrix l = (std::sqrt(ch.rate) * ch.jump).sparseView(1.0, 1e-300);
      l.makeCompressed();
      jumps_.push_back(std::move(l));
      k_sum += ch.rate * ch.jump.adjoint() * ch.jump;
    }
    half_k_ = 0.5 * k_sum.diagonal().real();
    if ((k_sum - Matrix(k_sum.diagonal().asDiagonal())).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + half_k_.maxCoeff())) {
      dense_half_k_ = 0.5 * k_sum;
    }
  }

  bool active() const { return !jumps_.empty(); }

  // out = D(ρ) for Hermitian ρ.
  void apply(const Matrix& rho, Matrix& out, Matrix& tmp) const {
    if (dense_half_k_.size() == 0) {
      out = rho;
      for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        for (Eigen::Index i = 0; i < rho.rows(); ++i) out(i, j) *= -(half_k_(i) + half_k_(j));
      }
    } else {
      tmp.noalias() = dense_half_k_ * rho;
      out = -tmp - tmp.adjoint();
    }
    for (const auto& l : jumps_) {
      tmp.noalias() = l * rho;
      // L ρ L† = L (L ρ)† for Hermitian ρ
      out.noalias() += l * tmp.adjoint();
    }
  }

  // ρ ← Σ_{q≤4} (hD)^q/q! ρ, identical to one classical RK4 step for this linear flow.
  void flow(Matrix& rho, double h, Matrix& term, Matrix& next, Matrix& tmp) const {
    term = rho;
    for (int q = 1; q <= 4; ++q) {
      apply(term, next, tmp);
      term = (h / q) * next;
      rho += term;
    }
  }

 private:
  std::vector<SparseMatrix> jumps_;
  RealVector half_k_;
  Matrix dense_half_k_;
};

class OpenPropagator {
 public:
  OpenPropagator(const ControlSystem& sys, const std::vector<DecoherenceChannel>& channels,
                 const OpenOptions& options, int steps)
      : sys_(sys), dissipator_(sys.space, channels), options_(options) {
    if (options.substeps < 1) throw ValidationError("open propagation needs at least one substep");
    step_trace_tolerance_ = options.trace_tolerance / std::max(1, steps);
  }

  void step(const std::array<double, kNumControls>& u, double dt, std::vector<DensityMatrix>& rhos) {
    std::vector<DensityMatrix> start = rhos;
    int substeps = options_.substeps;
    for (int attempt = 0;; ++attempt) {
      bool ok = true;
      for (std::size_t i = 0; i < rhos.size(); ++i) {
        const Complex before = start[i].trace();
        rhos[i] = start[i];
        advance(u, dt, substeps, rhos[i]);
        if (std::abs(rhos[i].trace() - before) > step_trace_tolerance_) ok = false;
      }
      if (ok) return;
      if (attempt >= options_.max_refinements) {
        throw NumericalError("open propagation: trace drift persists after substep refinement");
      }
      substeps *= 2;
    }
  }

 private:
  void prepare(const std::array<double, kNumControls>& u, double h) {
    if (cached_ && u == cached_u_ && h == cached_h_) return;
    const int n = sys_.space.total_dim();
    half_ = Matrix::Identity(n, n);
    apply_step(sys_, u, 0.5 * h, half_);
    full_ = half_ * half_;
    cached_u_ = u;
    cached_h_ = h;
    cached_ = true;
  }

  void conjugate(const Matrix& v, Matrix& rho) {
    tmp_.noalias() = v * rho;
    rho.noalias() = tmp_ * v.adjoint();
  }

  // Strang composition V D W D ... W D V with V = U(h/2), W = U(h).
  void advance(const std::array<double, kNumControls>& u, double dt, int substeps, Matrix& rho) {
    const double h = dt / substeps;
    prepare(u, h);
    conjugate(half_, rho);
    for (int r = 0; r < substeps; ++r) {
      if (dissipator_.active()) dissipator_.flow(rho, h, term_, next_, tmp2_);
      conjugate(r + 1 < substeps ? full_ : half_, rho);
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();
  }

  const ControlSystem& sys_;
  Dissipator dissipator_;
  OpenOptions options_;
  double step_trace_tolerance_ = 0.0;
  bool cached_ = false;
  std::array<double, kNumControls> cached_u_{};
  double cached_h_ = 0.0;
  Matrix half_, full_, tmp_, tmp2_, term_, next_;
};

void check_positive(const DensityMatrix& rho, double floor) {
  if (hermitian_eigenvalues(rho).minCoeff() < floor) {
    throw NumericalError("open propagation: density matrix lost positivity");
  }
}

void record(Trajectory& traj, const SpaceDescriptor& space, const RealVector& number, const RealVector& excited,
            double t, const StateVector& psi) {
  const RealVector pop = psi.cwiseAbs2();
  traj.times.push_back(t);
  traj.mean_photon.push_back(pop.dot(number));
  traj.transmon_excitation.push_back(pop.dot(excited));
  traj.entropy.push_back(entanglement_entropy(psi, space));
  traj.states.push_back(psi);
}

void record(Trajectory& traj, const RealVector& number, const RealVector& excited, double t,
            const DensityMatrix& rho) {
  const RealVector pop = rho.diagonal().real();
  traj.times.push_back(t);
  traj.mean_photon.push_back(pop.dot(number));
  traj.transmon_excitation.push_back(pop.dot(excited));
  traj.densities.push_back(rho);
}

}  // namespace

Trajectory propagate_closed(const Waveform& wf, const ControlSystem& sys, const StateVector& psi0, int stride) {
  check_waveform(wf);
  check_normalized(psi0, sys.space);
  if (stride < 1) throw ValidationError("sample stride must be >= 1");
  const RealVector number = number_diagonal(sys.space);
  const RealVector excited = excited_diagonal(sys.space);
  Trajectory traj;
  Matrix psi = psi0;
  record(traj, sys.space, number, excited, 0.0, psi.col(0));
  const int n = wf.steps();
  for (int j = 0; j < n; ++j) {
    apply_step(sys, wf.at(j), wf.dt, psi);
    check_truncation(sys.space, StateVector(psi.col(0)));
    if ((j + 1) % stride == 0 || j + 1 == n) record(traj, sys.space, number, excited, (j + 1) * wf.dt, psi.col(0));
  }
  return traj;
}

Trajectory propagate_closed(const Waveform& wf, const SpaceDescriptor& space, double chi, const StateVector& psi0,
                            int stride) {
  return propagate_closed(wf, ControlSystem(space, chi), psi0, stride);
}

Trajectory propagate_open(const Waveform& wf, const ControlSystem& sys, const DensityMatrix& rho0,
                          const std::vector<DecoherenceChannel>& channels, int stride, const OpenOptions& options) {
  check_waveform(wf);
  if (rho0.rows() != sys.space.total_dim()) throw ValidationError("initial density matrix dimension mismatch");
  validate_density_matrix(rho0);
  if (stride < 1) throw ValidationError("sample stride must be >= 1");
  const RealVector number = number_diagonal(sys.space);
  const RealVector excited = excited_diagonal(sys.space);
  OpenPropagator prop(sys, channels, options, wf.steps());
  Trajectory traj;
  std::vector<DensityMatrix> rho{rho0};
  record(traj, number, excited, 0.0, rho[0]);
  const int n = wf.steps();
  for (int j = 0; j < n; ++j) {
    prop.step(wf.at(j), wf.dt, rho);
    check_truncation(sys.space, rho[0]);
    if ((j + 1) % stride == 0 || j + 1 == n) record(traj, number, excited, (j + 1) * wf.dt, rho[0]);
  }
  check_positive(rho[0], options.positivity_floor);
  return traj;
}

std::vector<DensityMatrix> propagate_open_final(const Waveform& wf, const ControlSystem& sys,
                                                std::vector<DensityMatrix> rhos,
                                                const std::vector<DecoherenceChannel>& channels,
                                                const OpenOptions& options) {
  check_waveform(wf);
  for (const auto& r : rhos) {
    if (r.rows() != sys.space.total_dim()) throw ValidationError("initial density matrix dimension mismatch");
    validate_density_matrix(r);
  }
  OpenPropagator prop(sys, channels, options, wf.steps());
  for (int j = 0; j < wf.steps(); ++j) {
    prop.step(wf.at(j), wf.dt, rhos);
    for (const auto& r : rhos) check_truncation(sys.space, r);
  }
  for (const auto& r : rhos) check_positive(r, options.positivity_floor);
  return rhos;
}

CardinalPairs cardinal_pairs(const LogicalGate& gate) {
  const auto coeffs = cardinal_coefficients();
  CardinalPairs out;
  for (std::size_t i = 0; i < 6; ++i) {
    out.inputs[i] = gate.input_basis * coeffs[i];
    out.targets[i] = gate.output_basis * (gate.logical * coeffs[i]);
  }
  return out;
}

GateFidelity gate_fidelity_closed(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate) {
  check_waveform(wf);
  const CardinalPairs pairs = cardinal_pairs(gate);
  Matrix cols(sys.space.total_dim(), 6);
  for (int i = 0; i < 6; ++i) cols.col(i) = pairs.inputs[i];
  for (int j = 0; j < wf.steps(); ++j) {
    apply_step(sys, wf.at(j), wf.dt, cols);
    for (int i = 0; i < 6; ++i) check_truncation(sys.space, StateVector(cols.col(i)));
  }
  GateFidelity out;
  for (int i = 0; i < 6; ++i) {
    out.per_state[i] = state_fidelity(pairs.targets[i], StateVector(cols.col(i)));
    out.fidelity += out.per_state[i] / 6.0;
  }
  out.error = 1.0 - out.fidelity;
  return out;
}

GateFidelity gate_fidelity_open(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate,
                                const std::vector<DecoherenceChannel>& channels, const OpenOptions& options) {
  const CardinalPairs pairs = cardinal_pairs(gate);
  std::vector<DensityMatrix> rhos;
  for (const auto& psi : pairs.inputs) rhos.push_back(pure_density(psi));
  rhos = propagate_open_final(wf, sys, std::move(rhos), channels, options);
  GateFidelity out;
  for (int i = 0; i < 6; ++i) {
    out.per_state[i] = state_fidelity(pairs.targets[i], rhos[i]);
    out.fidelity += out.per_state[i] / 6.0;
  }
  out.error = 1.0 - out.fidelity;
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t_ns,mean_photon,transmon_excitation,entropy\n";
  os << std::setprecision(12);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << traj.times[i] / kNano << ',' << traj.mean_photon[i] << ',' << traj.transmon_excitation[i] << ',';
    if (i < traj.entropy.size()) os << traj.entropy[i];
    os << '\n';
  }
}

nlohmann::json fidelity_report_json(const GateFidelity& closed, const GateFidelity* open,
                                    const std::vector<DecoherenceChannel>& channels) {
  nlohmann::json j;
  j["F0"] = closed.fidelity;
  j["r0"] = closed.error;
  j["per_state_F0"] = closed.per_state;
  if (open) {
    j["F"] = open->fidelity;
    j["r_L"] = open->error;
    j["per_state_F"] = open->per_state;
  }
  nlohmann::json rates = nlohmann::json::object();
  for (const auto& ch : channels) rates[channel_name(ch.kind)] = ch.rate;
  j["rates_per_s"] = rates;
  return j;
}

}  // namespace bosonq
