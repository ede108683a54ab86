#include "bosonq/error_model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include "bosonq/propagator.hpp"

namespace bosonq {

CardinalTrajectories cardinal_trajectories(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate) {
  const CardinalPairs pairs = cardinal_pairs(gate);
  Matrix cols(sys.space.total_dim(), 6);
  for (int i = 0; i < 6; ++i) cols.col(i) = pairs.inputs[i];
  CardinalTrajectories out;
  auto record = [&](double t) {
    out.times.push_back(t);
    for (int i = 0; i < 6; ++i) out.states[i].push_back(cols.col(i));
  };
  record(0.0);
  for (int j = 0; j < wf.steps(); ++j) {
    apply_step(sys, wf.at(j), wf.dt, cols);
    for (int i = 0; i < 6; ++i) check_truncation(sys.space, StateVector(cols.col(i)));
    record((j + 1) * wf.dt);
  }
  return out;
}

JumpStatistics jump_statistics(const StateVector& psi, const Operator& jump) {
  if (jump.cols() != psi.size()) throw ValidationError("jump operator dimension mismatch");
  const StateVector lpsi = jump * psi;
  const double p = lpsi.squaredNorm();
  const double lp = std::norm(psi.dot(lpsi));
  return {p, lp, p - lp};
}

SusceptibilityTimecourse susceptibility_timecourse(const CardinalTrajectories& traj, ChannelKind kind,
                                                   const Operator& jump) {
  SparseMatrix l = jump.sparseView(1.0, 1e-300);
  SusceptibilityTimecourse tc{kind, traj.times, {}, {}, {}};
  for (int i = 0; i < 6; ++i) {
    const auto& states = traj.states[i];
    tc.p[i].resize(states.size());
    tc.l_prime[i].resize(states.size());
    tc.s[i].resize(states.size());
    for (std::size_t t = 0; t < states.size(); ++t) {
      const StateVector lpsi = l * states[t];
      const double p = lpsi.squaredNorm();
      const double lp = std::norm(states[t].dot(lpsi));
      tc.p[i][t] = p;
      tc.l_prime[i][t] = lp;
      tc.s[i][t] = p - lp;
    }
  }
  return tc;
}

namespace {

// (1/T) ∫ f dt on a uniform grid by the trapezoidal rule.
double trapezoid_mean(const std::vector<double>& f) {
  if (f.size() < 2) return f.empty() ? 0.0 : f.front();
  double acc = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
  return acc / static_cast<double>(f.size() - 1);
}

}  // namespace

ChannelSusceptibility gate_susceptibility(const SusceptibilityTimecourse& tc, double rate) {
  ChannelSusceptibility out{tc.kind, rate, 0.0, 0.0, 0.0};
  for (int i = 0; i < 6; ++i) {
    out.p += trapezoid_mean(tc.p[i]) / 6.0;
    out.l_prime += trapezoid_mean(tc.l_prime[i]) / 6.0;
    out.s += trapezoid_mean(tc.s[i]) / 6.0;
  }
  return out;
}

double decoherence_error(double gate_time, const std::vector<ChannelSusceptibility>& channels) {
  double sum = 0.0;
  for (const auto& ch : channels) sum += ch.rate * ch.s;
  return gate_time * sum;
}

double model_residual(double r_l, double r0, double r_prime) { return r_l - (r0 + r_prime); }

SusceptibilityReport susceptibility_report(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate,
                                           const std::vector<DecoherenceChannel>& channels,
                                           std::vector<SusceptibilityTimecourse>* timecourses) {
  const CardinalTrajectories traj = cardinal_trajectories(wf, sys, gate);
  const CardinalPairs pairs = cardinal_pairs(gate);
  SusceptibilityReport report;
  report.gate_time = wf.gate_time;
  for (const auto& ch : channels) {
    SusceptibilityTimecourse tc = susceptibility_timecourse(traj, ch.kind, ch.jump);
    report.channels.push_back(gate_susceptibility(tc, ch.rate));
    if (timecourses) timecourses->push_back(std::move(tc));
  }
  report.r_prime = decoherence_error(wf.gate_time, report.channels);
  double f0 = 0.0;
  for (int i = 0; i < 6; ++i) f0 += std::norm(pairs.targets[i].dot(traj.states[i].back())) / 6.0;
  report.r0 = 1.0 - f0;
  return report;
}

nlohmann::json to_json(const SusceptibilityReport& report) {
  nlohmann::json j;
  j["gate_time_us"] = report.gate_time / kMicro;
  nlohmann::json chans = nlohmann::json::object();
  for (const auto& ch : report.channels) {
    chans[channel_name(ch.kind)] = {{"rate_per_s", ch.rate}, {"p", ch.p}, {"l_prime", ch.l_prime}, {"s", ch.s}};
  }
  j["channels"] = chans;
  j["r_prime"] = report.r_prime;
  j["r0"] = report.r0;
  if (report.r_l) j["r_L"] = *report.r_l;
  if (report.residual) j["residual"] = *report.residual;
  return j;
}

void write_timecourse_csv(std::ostream& os, const std::vector<SusceptibilityTimecourse>& timecourses) {
  os << "channel,state,t_ns,p,l_prime,s\n" << std::setprecision(12);
  for (const auto& tc : timecourses) {
    for (int i = 0; i < 6; ++i) {
      for (std::size_t t = 0; t < tc.times.size(); ++t) {
        os << channel_name(tc.kind) << ',' << i << ',' << tc.times[t] / kNano << ',' << tc.p[i][t] << ','
           << tc.l_prime[i][t] << ',' << tc.s[i][t] << '\n';
      }
    }
  }
}

double idle_susceptibility(ChannelKind kind) {
  Eigen::Matrix2cd l;
  switch (kind) {
    case ChannelKind::TransmonRelaxation: l << 0, 1, 0, 0; break;
    case ChannelKind::TransmonThermal: l << 0, 0, 1, 0; break;
    case ChannelKind::TransmonDephasing: l << -1.0 / std::sqrt(2.0), 0, 0, 1.0 / std::sqrt(2.0); break;
    default: throw ValidationError("idle susceptibility is defined for transmon channels only");
  }
  double avg = 0.0;
  for (const auto& c : cardinal_coefficients()) {
    const Eigen::Vector2cd lpsi = l * c;
    avg += (lpsi.squaredNorm() - std::norm(c.dot(lpsi))) / 6.0;
  }
  return avg;
}

SigmaZMoments sigma_z_moment_stats() {
  using boost::math::quadrature::gauss;
  // uniform on the sphere ⇔ cos θ uniform on [−1, 1]
  auto mean = [](auto f) { return 0.5 * gauss<double, 20>::integrate(f, -1.0, 1.0); };
  SigmaZMoments m;
  m.mean = mean([](double z) { return z; });
  const double m2 = mean([](double z) { return z * z; });
  const double m4 = mean([](double z) { return z * z * z * z; });
  m.std = std::sqrt(m2 - m.mean * m.mean);
  m.mean_sq = m2;
  m.std_sq = std::sqrt(m4 - m2 * m2);
  return m;
}

EnsembleStats ensemble_stats(const std::vector<double>& values) {
  if (values.size() < 2) throw ValidationError("ensemble statistics need at least two values");
  EnsembleStats s;
  for (double v : values) s.average += v;
  s.average /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.average) * (v - s.average);
  s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  s.rsd = s.average != 0.0 ? s.std / s.average : std::numeric_limits<double>::quiet_NaN();
  return s;
}

double fit_intrinsic_decay(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw ValidationError("intrinsic-error fit needs at least three points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [t, r] : points) {
    if (!(r > 0.0)) throw ValidationError("intrinsic-error fit requires r0 > 0");
    sx += t;
    sy += std::log(r);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [t, r] : points) {
    sxy += (t - mx) * (std::log(r) - my);
    sxx += (t - mx) * (t - mx);
  }
  if (sxx == 0.0) throw ValidationError("intrinsic-error fit needs distinct gate times");
  return -sxy / sxx;
}

void ErrorBoundParams::validate() const {
  const std::pair<double, const char*> fields[] = {
      {decay_per_us, "decay_per_us"}, {s_relax, "s_relax"},   {s_dep, "s_dep"},
      {s_loss_per_photon, "s_loss_per_photon"}, {mean_photon, "mean_photon"},
      {t1_us, "t1_us"},   {t_phi_us, "t_phi_us"}, {cavity_lifetime_us, "cavity_lifetime_us"}};
  for (const auto& [v, name] : fields) {
    if (!(v > 0.0)) throw ValidationError(std::string("error bound parameter ") + name + " must be positive");
  }
}

double default_decay_constant(CodeKind kind) {
  switch (kind) {
    case CodeKind::Bin11: return 11.05;
    case CodeKind::Cat4: return 10.50;
    case CodeKind::Bin22: return 8.50;
  }
  return 11.05;
}

double error_bound_decoherence(double gate_time_us, const ErrorBoundParams& p) {
  return gate_time_us *
         (p.s_relax / p.t1_us + p.s_dep / p.t_phi_us + p.s_loss_per_photon * p.mean_photon / p.cavity_lifetime_us);
}

double error_bound(double gate_time_us, const ErrorBoundParams& p) {
  if (!(gate_time_us > 0.0)) throw ValidationError("gate time must be positive");
  p.validate();
  return std::exp(-p.decay_per_us * gate_time_us) + error_bound_decoherence(gate_time_us, p);
}

BoundMinimum minimize_bound(const ErrorBoundParams& params, double lo_us, double hi_us) {
  if (!(lo_us > 0.0) || !(hi_us > lo_us)) throw ValidationError("bound minimization needs 0 < lo < hi");
  params.validate();
  const auto [t, v] = boost::math::tools::brent_find_minima(
      [&](double t) { return error_bound(t, params); }, lo_us, hi_us, std::numeric_limits<double>::digits / 2);
  return {t, v};
}

BoundHeatmap bound_heatmap(const std::vector<double>& gate_times_us, const std::vector<double>& t_phis_us,
                           const ErrorBoundParams& params) {
  auto monotone = [](const std::vector<double>& v) {
    return !v.empty() && std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
  };
  if (!monotone(gate_times_us) || !monotone(t_phis_us)) {
    throw ValidationError("heatmap axes must be non-empty and strictly increasing");
  }
  BoundHeatmap map{gate_times_us, t_phis_us,
                   RealMatrix(static_cast<Eigen::Index>(gate_times_us.size()),
                              static_cast<Eigen::Index>(t_phis_us.size()))};
  for (std::size_t j = 0; j < t_phis_us.size(); ++j) {
    ErrorBoundParams p = params;
    p.t_phi_us = t_phis_us[j];
    for (std::size_t i = 0; i < gate_times_us.size(); ++i) {
      map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = error_bound(gate_times_us[i], p);
    }
  }
  return map;
}

void write_heatmap_csv(std::ostream& os, const BoundHeatmap& map) {
  os << std::setprecision(12) << "t_gate_us\\t_phi_us";
  for (double tp : map.t_phis_us) os << ',' << tp;
  os << '\n';
  for (std::size_t i = 0; i < map.gate_times_us.size(); ++i) {
    os << map.gate_times_us[i];
    for (std::size_t j = 0; j < map.t_phis_us.size(); ++j) {
      os << ',' << map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    os << '\n';
  }
}

ErrorBoundParams bound_params_from_ensemble(const std::vector<SusceptibilityReport>& reports, double mean_photon,
                                            ErrorBoundParams base) {
  if (reports.empty()) throw ValidationError("ensemble is empty");
  if (!(mean_photon > 0.0)) throw ValidationError("mean photon number must be positive");
  auto min_s = [&](ChannelKind kind, double fallback) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : reports) {
      for (const auto& ch : r.channels) {
        if (ch.kind == kind) best = std::min(best, ch.s);
      }
    }
    return std::isfinite(best) ? best : fallback;
  };
  base.s_relax = min_s(ChannelKind::TransmonRelaxation, base.s_relax);
  base.s_dep = min_s(ChannelKind::TransmonDephasing, base.s_dep);
  base.s_loss_per_photon = min_s(ChannelKind::CavityLoss, base.s_loss_per_photon * mean_photon) / mean_photon;
  base.mean_photon = mean_photon;
  return base;
}

std::vector<SusceptibilityRow> susceptibility_table(const std::vector<SusceptibilityReport>& reports) {
  std::vector<SusceptibilityRow> rows;
  for (ChannelKind kind : kAllChannels) {
    std::vector<double> values;
    for (const auto& r : reports) {
      for (const auto& ch : r.channels) {
        if (ch.kind == kind) values.push_back(ch.s);
      }
    }
    if (values.size() >= 2) rows.push_back({kind, ensemble_stats(values)});
  }
  return rows;
}

void write_table_text(std::ostream& os, const std::vector<SusceptibilityRow>& rows) {
  os << std::left << std::setw(22) << "channel" << std::right << std::setw(10) << "average" << std::setw(10)
     << "std" << std::setw(10) << "RSD" << '\n';
  os << std::fixed << std::setprecision(3);
  for (const auto& r : rows) {
    os << std::left << std::setw(22) << channel_name(r.kind) << std::right << std::setw(10) << r.stats.average
       << std::setw(10) << r.stats.std << std::setw(10) << r.stats.rsd << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

void write_table_csv(std::ostream& os, const std::vector<SusceptibilityRow>& rows) {
  os << "channel,average,std,rsd\n" << std::setprecision(12);
  for (const auto& r : rows) {
    os << channel_name(r.kind) << ',' << r.stats.average << ',' << r.stats.std << ',' << r.stats.rsd << '\n';
  }
}

Histogram make_histogram(const std::vector<std::pair<std::string, std::vector<double>>>& series, int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [name, values] : series) {
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) throw ValidationError("histogram needs at least one finite value");
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + (hi - lo) * b / bins);
  for (const auto& [name, values] : series) {
    std::vector<int> counts(bins, 0);
    for (double v : values) {
      int b = static_cast<int>((v - lo) / (hi - lo) * bins);
      counts[std::clamp(b, 0, bins - 1)]++;
    }
    h.counts.emplace_back(name, std::move(counts));
  }
  return h;
}

void write_histogram_csv(std::ostream& os, const Histogram& hist) {
  os << std::setprecision(12) << "bin_lo,bin_hi";
  for (const auto& [name, c] : hist.counts) os << ',' << name;
  os << '\n';
  for (std::size_t b = 0; b + 1 < hist.edges.size(); ++b) {
    os << hist.edges[b] << ',' << hist.edges[b + 1];
    for (const auto& [name, c] : hist.counts) os << ',' << c[b];
    os << '\n';
  }
}

}  // namespace bosonq
