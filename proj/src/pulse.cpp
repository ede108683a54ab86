#include "bosonq/pulse.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>

namespace bosonq {

RealVector PulseParams::to_vector() const {
  const int per = params_per_control();
  RealVector flat(parameter_count());
  for (std::size_t k = 0; k < kNumControls; ++k) {
    const auto& c = controls[k];
    const int base = static_cast<int>(k) * per;
    flat(base) = c.dc;
    for (int l = 0; l < fourier_terms; ++l) {
      flat(base + 1 + l) = c.cos[l];
      flat(base + 1 + fourier_terms + l) = c.sin[l];
    }
  }
  return flat;
}

void PulseParams::assign(const RealVector& flat) {
  if (flat.size() != parameter_count()) throw ValidationError("parameter vector has the wrong length");
  const int per = params_per_control();
  for (std::size_t k = 0; k < kNumControls; ++k) {
    auto& c = controls[k];
    const int base = static_cast<int>(k) * per;
    c.dc = flat(base);
    c.cos.resize(fourier_terms);
    c.sin.resize(fourier_terms);
    for (int l = 0; l < fourier_terms; ++l) {
      c.cos[l] = flat(base + 1 + l);
      c.sin[l] = flat(base + 1 + fourier_terms + l);
    }
  }
}

int min_fourier_terms(double f_max, double gate_time) {
  return static_cast<int>(std::ceil(f_max * gate_time - 1e-9));
}

void validate(const PulseParams& p) {
  if (!(p.gate_time > 0.0) || !(p.f_max > 0.0)) throw ValidationError("gate time and f_max must be positive");
  if (p.steps < 2) throw ValidationError("pulse needs at least 2 time steps");
  if (p.fourier_terms < 1 || p.fourier_terms < min_fourier_terms(p.f_max, p.gate_time)) {
    throw ValidationError("fourier_terms M=" + std::to_string(p.fourier_terms) + " is below ceil(f_max*T)=" +
                          std::to_string(min_fourier_terms(p.f_max, p.gate_time)));
  }
  for (const auto& c : p.controls) {
    if (static_cast<int>(c.cos.size()) != p.fourier_terms || static_cast<int>(c.sin.size()) != p.fourier_terms) {
      throw ValidationError("coefficient list length differs from M");
    }
  }
}

PulseParams make_pulse_params(double f_max, double gate_time, double dt, int fourier_terms, std::uint64_t seed) {
  if (!(dt > 0.0) || !(gate_time > 0.0)) throw ValidationError("gate time and dt must be positive");
  PulseParams p;
  p.f_max = f_max;
  p.gate_time = gate_time;
  p.steps = static_cast<int>(std::lround(gate_time / dt));
  if (std::abs(p.steps * dt - gate_time) > 1e-6 * dt) {
    throw ValidationError("gate time is not an integer multiple of dt");
  }
  p.fourier_terms = fourier_terms > 0 ? fourier_terms : min_fourier_terms(f_max, gate_time);
  p.seed = seed;
  for (auto& c : p.controls) {
    c.cos.assign(p.fourier_terms, 0.0);
    c.sin.assign(p.fourier_terms, 0.0);
  }
  validate(p);
  return p;
}

PulseParams random_pulse_params(PulseParams p, const std::array<double, kNumControls>& u_max_mhz,
                                std::uint64_t seed) {
  validate(p);
  p.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < kNumControls; ++k) {
    const double half_width = u_max_mhz[k] / (4.0 * p.fourier_terms);
    std::uniform_real_distribution<double> dist(-half_width, half_width);
    auto& c = p.controls[k];
    c.dc = dist(rng);
    for (int l = 0; l < p.fourier_terms; ++l) c.cos[l] = dist(rng);
    for (int l = 0; l < p.fourier_terms; ++l) c.sin[l] = dist(rng);
  }
  return p;
}

Waveform zero_waveform(int steps, double gate_time) {
  Waveform wf;
  wf.u = RealMatrix::Zero(kNumControls, steps);
  wf.gate_time = gate_time;
  wf.dt = gate_time / steps;
  return wf;
}

RealMatrix jacobian(const PulseParams& p) {
  validate(p);
  const int m = p.fourier_terms;
  RealMatrix basis(p.steps, 2 * m + 1);
  for (int j = 0; j < p.steps; ++j) {
    const double t = p.time(j);
    basis(j, 0) = 1.0;
    for (int l = 1; l <= m; ++l) {
      const double phase = kTwoPi * p.frequency(l) * t;
      basis(j, l) = std::cos(phase);
      basis(j, m + l) = std::sin(phase);
    }
  }
  return basis;
}

Waveform synthesize(const PulseParams& p) {
  const RealMatrix basis = jacobian(p);
  const RealVector flat = p.to_vector();
  const int per = p.params_per_control();
  Waveform wf = zero_waveform(p.steps, p.gate_time);
  for (std::size_t k = 0; k < kNumControls; ++k) {
    wf.u.row(static_cast<Eigen::Index>(k)) = (basis * flat.segment(static_cast<Eigen::Index>(k) * per, per)).transpose();
  }
  return wf;
}

RealVector pull_back(const RealMatrix& basis, const RealMatrix& grad_u) {
  const Eigen::Index per = basis.cols();
  RealVector grad(static_cast<Eigen::Index>(kNumControls) * per);
  for (std::size_t k = 0; k < kNumControls; ++k) {
    grad.segment(static_cast<Eigen::Index>(k) * per, per) =
        basis.transpose() * grad_u.row(static_cast<Eigen::Index>(k)).transpose();
  }
  return grad;
}

nlohmann::json to_json(const PulseParams& p) {
  nlohmann::ordered_json j;
  j["M"] = p.fourier_terms;
  j["f_max_mhz"] = p.f_max / kMHz;
  j["T_gate_us"] = p.gate_time / kMicro;
  j["N"] = p.steps;
  j["seed"] = p.seed;
  for (std::size_t k = 0; k < kNumControls; ++k) {
    const std::string name = control_name(k);
    j[name + "_c0"] = p.controls[k].dc;
    j[name + "_a"] = p.controls[k].cos;
    j[name + "_b"] = p.controls[k].sin;
  }
  return nlohmann::json(j);
}

PulseParams pulse_params_from_json(const nlohmann::json& j) {
  try {
    PulseParams p;
    p.fourier_terms = j.at("M").get<int>();
    p.f_max = j.at("f_max_mhz").get<double>() * kMHz;
    p.gate_time = j.at("T_gate_us").get<double>() * kMicro;
    p.steps = j.at("N").get<int>();
    p.seed = j.at("seed").get<std::uint64_t>();
    for (std::size_t k = 0; k < kNumControls; ++k) {
      const std::string name = control_name(k);
      p.controls[k].dc = j.at(name + "_c0").get<double>();
      p.controls[k].cos = j.at(name + "_a").get<std::vector<double>>();
      p.controls[k].sin = j.at(name + "_b").get<std::vector<double>>();
    }
    validate(p);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("pulse parameters: ") + e.what());
  }
}

void write_waveform_csv(std::ostream& os, const Waveform& wf) {
  os << "t_ns,transmon_I_MHz,transmon_Q_MHz,cavity_I_MHz,cavity_Q_MHz\n";
  os << std::setprecision(17);
  for (int j = 0; j < wf.steps(); ++j) {
    os << (wf.gate_time * j / wf.steps()) / kNano;
    for (std::size_t k = 0; k < kNumControls; ++k) os << ',' << wf.u(static_cast<Eigen::Index>(k), j);
    os << '\n';
  }
}

}  // namespace bosonq
