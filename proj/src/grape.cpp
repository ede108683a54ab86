#include "bosonq/grape.hpp"

#include <cmath>
#include <limits>

#include "bosonq/parallel.hpp"
#include "bosonq/propagator.hpp"

namespace bosonq {

ConstraintPreset standard_preset() { return {"standard", 30.0 * kMHz, 2.0 * kNano, {20.0, 20.0, 3.0, 3.0}}; }

ConstraintPreset weak_preset() { return {"weak", 45.0 * kMHz, 1.0 * kNano, {20.0, 20.0, 15.0, 15.0}}; }

ConstraintPreset preset_by_name(const std::string& name) {
  if (name == "standard") return standard_preset();
  if (name == "weak") return weak_preset();
  throw ValidationError("unknown constraint preset '" + name + "' (expected standard or weak)");
}

OptimizationProblem make_problem(const SpaceDescriptor& space, double chi, const BosonicCode& code,
                                 const GateSpec& gate, double gate_time, const ConstraintPreset& preset,
                                 const PenaltyWeights& weights, const StopCriteria& stop, int fourier_terms) {
  for (double u : preset.u_max_mhz) {
    if (!(u > 0.0)) throw ValidationError("u_max must be positive for every control");
  }
  if (weights.gate_error < 0.0 || weights.amplitude < 0.0 || weights.boundary < 0.0) {
    throw ValidationError("penalty weights must be non-negative");
  }
  if (!std::isfinite(chi)) throw ValidationError("chi must be finite");
  if (stop.max_iterations < 0) throw ValidationError("max_iterations must be non-negative");
  return OptimizationProblem{
      space,
      chi,
      code,
      logical_unitary(code, space, gate),
      make_pulse_params(preset.f_max, gate_time, preset.dt, fourier_terms),
      preset.name,
      preset.u_max_mhz,
      weights,
      stop,
      ControlSystem(space, chi),
  };
}

double gate_error_cost(const Operator& u_tot, const Operator& target, const Operator& projector) {
  const double d = projector.trace().real();
  const Complex overlap = (projector * target.adjoint() * projector * u_tot).trace();
  return 1.0 - std::norm(overlap) / (d * d);
}

double gate_error_cost(const Operator& u_tot, const LogicalGate& target) {
  const Complex overlap =
      (target.logical.adjoint() * target.output_basis.adjoint() * u_tot * target.input_basis).trace();
  return 1.0 - std::norm(overlap) / 4.0;
}

double amplitude_penalty(const Waveform& wf, const std::array<double, kNumControls>& u_max, RealMatrix* grad_u) {
  const int n = wf.steps();
  constexpr double kLogSpaceExponent = 81.0;  // |u| > 3 u_max
  constexpr double kMaxExponent = 700.0;
  const double max_double = std::numeric_limits<double>::max();
  double total = 0.0;
  for (std::size_t k = 0; k < kNumControls; ++k) {
    const auto row = wf.u.row(static_cast<Eigen::Index>(k));
    double peak = 0.0;
    for (int j = 0; j < n; ++j) peak = std::max(peak, std::pow(row(j) / u_max[k], 4));
    double per_control;
    if (peak <= kLogSpaceExponent) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += std::exp(std::pow(row(j) / u_max[k], 4));
      per_control = acc / n;
    } else {
      // log-sum-exp: log Ψ2_k = peak + log Σ exp(e_j − peak) − log N
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += std::exp(std::pow(row(j) / u_max[k], 4) - peak);
      const double log_value = peak + std::log(acc) - std::log(static_cast<double>(n));
      per_control = log_value < std::log(max_double) ? std::exp(log_value) : max_double;
    }
    total = (total > max_double - per_control) ? max_double : total + per_control;
    if (grad_u) {
      for (int j = 0; j < n; ++j) {
        const double x = row(j) / u_max[k];
        const double e = std::pow(x, 4);
        const double g = e < kMaxExponent ? std::exp(e) * 4.0 * x * x * x / (u_max[k] * n)
                                          : std::copysign(max_double * 1e-10, x);
        (*grad_u)(static_cast<Eigen::Index>(k), j) += g;
      }
    }
  }
  return total;
}

double boundary_penalty(const Waveform& wf, RealMatrix* grad_u) {
  const int last = wf.steps() - 1;
  double total = 0.0;
  for (std::size_t k = 0; k < kNumControls; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    total += wf.u(kk, 0) * wf.u(kk, 0) + wf.u(kk, last) * wf.u(kk, last);
    if (grad_u) {
      (*grad_u)(kk, 0) += 2.0 * wf.u(kk, 0);
      (*grad_u)(kk, last) += 2.0 * wf.u(kk, last);
    }
  }
  return total;
}

namespace {

Complex overlap_with_target(const Matrix& final_columns, const LogicalGate& target) {
  return (target.logical.adjoint() * target.output_basis.adjoint() * final_columns).trace();
}

}  // namespace

double gate_error_of(const Waveform& wf, const OptimizationProblem& problem) {
  Matrix cols = problem.target.input_basis;
  for (int j = 0; j < wf.steps(); ++j) apply_step(problem.system, wf.at(j), wf.dt, cols);
  return 1.0 - std::norm(overlap_with_target(cols, problem.target)) / 4.0;
}

CostEvaluation cost_and_gradient(const PulseParams& params, const OptimizationProblem& problem) {
  const Waveform wf = synthesize(params);
  const int n = wf.steps();
  const ControlSystem& sys = problem.system;

  // Forward: Φ_j = U_{j−1} ⋯ U_0 Q_in
  std::vector<Matrix> phi(n + 1);
  phi[0] = problem.target.input_basis;
  for (int j = 0; j < n; ++j) {
    phi[j + 1] = phi[j];
    apply_step(sys, wf.at(j), wf.dt, phi[j + 1]);
  }
  const Complex g = overlap_with_target(phi[n], problem.target);

  // Backward: Λ_N = Q_out G, Λ_j = U_j† Λ_{j+1}; ∂g/∂u_kj = Σ_c ⟨Λ_{j+1}|∂U_j|Φ_j⟩
  RealMatrix grad_u = RealMatrix::Zero(kNumControls, n);
  Matrix lambda = problem.target.output_basis * problem.target.logical;
  const double c1 = problem.weights.gate_error;
  for (int j = n - 1; j >= 0; --j) {
    StepGradient sg = step_gradient(sys, wf.at(j), wf.dt, phi[j], lambda);
    for (std::size_t k = 0; k < kNumControls; ++k) {
      // Ψ1 = 1 − |g|²/4 ⇒ ∂Ψ1 = −½ Re(g* ∂g)
      grad_u(static_cast<Eigen::Index>(k), j) = -0.5 * c1 * (std::conj(g) * sg.d_overlap[k]).real();
    }
    lambda = std::move(sg.lambda_prev);
  }

  CostEvaluation out;
  out.terms.gate_error = 1.0 - std::norm(g) / 4.0;
  RealMatrix grad_amp = RealMatrix::Zero(kNumControls, n);
  RealMatrix grad_bnd = RealMatrix::Zero(kNumControls, n);
  out.terms.amplitude = amplitude_penalty(wf, problem.u_max_mhz, &grad_amp);
  out.terms.boundary = boundary_penalty(wf, &grad_bnd);
  out.terms.total = c1 * out.terms.gate_error + problem.weights.amplitude * out.terms.amplitude +
                    problem.weights.boundary * out.terms.boundary;
  grad_u += problem.weights.amplitude * grad_amp + problem.weights.boundary * grad_bnd;
  out.gradient = pull_back(jacobian(params), grad_u);
  return out;
}

OptimizedGate optimize(const OptimizationProblem& problem, const PulseParams& initial) {
  validate(initial);
  PulseParams work = initial;

  // Ψ1 of recently evaluated points, so the stop test needs no extra propagation.
  std::vector<std::pair<RealVector, CostTerms>> recent;
  auto objective = [&](const RealVector& x, RealVector& grad) {
    work.assign(x);
    CostEvaluation ev = cost_and_gradient(work, problem);
    grad = std::move(ev.gradient);
    if (recent.size() >= 64) recent.erase(recent.begin());
    recent.emplace_back(x, ev.terms);
    return ev.terms.total;
  };
  auto terms_at = [&](const RealVector& x) -> CostTerms {
    for (auto it = recent.rbegin(); it != recent.rend(); ++it) {
      if (it->first.size() == x.size() && it->first == x) return it->second;
    }
    work.assign(x);
    return cost_and_gradient(work, problem).terms;
  };
  auto stop = [&](const RealVector& x, double) {
    return terms_at(x).gate_error < problem.stop.target_gate_error;
  };

  LbfgsOptions opt;
  opt.max_iterations = problem.stop.max_iterations;
  opt.gradient_tolerance = problem.stop.gradient_tolerance;
  const LbfgsResult res = minimize_lbfgs(objective, initial.to_vector(), opt, stop);

  OptimizedGate gate;
  gate.params = initial;
  gate.params.assign(res.x);
  gate.waveform = synthesize(gate.params);
  gate.terms = terms_at(res.x);
  gate.iterations = res.iterations;
  gate.evaluations = res.evaluations;
  gate.seed = initial.seed;
  gate.status = to_string(res.status);
  gate.converged = res.status == LbfgsStatus::StopRequested || res.status == LbfgsStatus::GradientTolerance;
  gate.trace = res.trace;
  return gate;
}

OptimizedGate optimize(const OptimizationProblem& problem, std::uint64_t seed) {
  return optimize(problem, random_pulse_params(problem.params_template, problem.u_max_mhz, seed));
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t index) {
  // splitmix64 of (base, index)
  std::uint64_t z = base_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<RestartOutcome> random_restarts(const OptimizationProblem& problem, std::size_t count,
                                            std::uint64_t base_seed, int jobs) {
  if (count < 1) throw ValidationError("restart count must be >= 1");
  std::vector<RestartOutcome> out(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    out[i].seed = derive_seed(base_seed, i);
    try {
      out[i].gate = optimize(problem, out[i].seed);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace bosonq
