#include "bosonq/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>

#include "bosonq/io.hpp"
#include "bosonq/metrics.hpp"
#include "bosonq/parallel.hpp"

namespace bosonq {

using nlohmann::json;

GateAnalysis analyze_gate(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate,
                          const std::vector<DecoherenceChannel>& channels, bool open,
                          std::vector<SusceptibilityTimecourse>* timecourses) {
  GateAnalysis a;
  a.closed = gate_fidelity_closed(wf, sys, gate);
  a.report = susceptibility_report(wf, sys, gate, channels, timecourses);
  if (open) {
    a.open = gate_fidelity_open(wf, sys, gate, channels);
    a.report.r_l = a.open->error;
    a.report.residual = model_residual(a.open->error, a.report.r0, a.report.r_prime);
  }
  return a;
}

double relative_fidelity(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate,
                         const DecoherenceChannel& channel, double closed_fidelity) {
  return gate_fidelity_open(wf, sys, gate, {channel}).fidelity / closed_fidelity;
}

namespace {

ChannelKind parse_channel(const std::string& name) {
  for (ChannelKind k : kAllChannels) {
    if (channel_name(k) == name) return k;
  }
  throw ValidationError("unknown channel '" + name + "'");
}

// Runs fn, tagging numerical failures with the stage name.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const NumericalError& e) {
    throw StageError(name, e.what());
  }
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

PulseParams read_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read pulse parameters '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("pulse parameters '" + path + "': " + e.what());
  }
  PulseParams p = pulse_params_from_json(j);
  validate(p);
  return p;
}

json analysis_json(const GateAnalysis& a) {
  json j = to_json(a.report);
  j["F0"] = a.closed.fidelity;
  j["per_state_F0"] = a.closed.per_state;
  if (a.open) {
    j["F"] = a.open->fidelity;
    j["per_state_F"] = a.open->per_state;
  }
  return j;
}

std::vector<DecoherenceChannel> channels_for(const RunConfig& c) {
  return make_channels(c.space(), c.rates.to_rates(), c.rates.include_thermal);
}

std::string time_tag(double t_us) {
  std::ostringstream os;
  os << "T" << std::setprecision(6) << t_us << "us";
  return os.str();
}

void run_optimize(const RunConfig& c, OutputDir& out, std::ostream& log) {
  const OptimizationProblem problem = c.problem(c.gate_time_us);
  log << "optimizing " << gate_name(c.gate.kind) << " on " << code_name(c.code.kind) << ", T = " << c.gate_time_us
      << " us, " << c.restarts << " restart(s), seed " << *c.seed << '\n';
  const auto outcomes = stage("optimize", [&] { return random_restarts(problem, c.restarts, *c.seed, c.jobs); });

  json runs = json::array();
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    json r{{"index", i}, {"seed", o.seed}};
    if (o.gate) {
      r["gate_error"] = o.gate->terms.gate_error;
      r["amplitude_penalty"] = o.gate->terms.amplitude;
      r["boundary_penalty"] = o.gate->terms.boundary;
      r["cost"] = o.gate->terms.total;
      r["iterations"] = o.gate->iterations;
      r["evaluations"] = o.gate->evaluations;
      r["status"] = o.gate->status;
      r["converged"] = o.gate->converged;
      if (!best || o.gate->terms.gate_error < outcomes[*best].gate->terms.gate_error) best = i;
    } else {
      r["error"] = o.error;
    }
    runs.push_back(r);
    log << "  restart " << i << " seed " << o.seed << ": "
        << (o.gate ? "gate error " + fmt(o.gate->terms.gate_error) + " (" + o.gate->status + ")" : o.error) << '\n';
  }
  if (!best) throw StageError("optimize", "every restart failed");
  const OptimizedGate& g = *outcomes[*best].gate;
  const GateFidelity closed = stage("evaluate", [&] { return gate_fidelity_closed(g.waveform, problem.system, problem.target); });

  out.write("params.json", to_json(g.params).dump(2) + "\n");
  out.write_with("waveform.csv", [&](std::ostream& os) { write_waveform_csv(os, g.waveform); });
  out.write_with("trace.csv", [&](std::ostream& os) {
    os << "iteration,cost\n" << std::setprecision(12);
    for (std::size_t i = 0; i < g.trace.size(); ++i) os << i << ',' << g.trace[i] << '\n';
  });
  out.write_json("summary.json", {{"best_index", *best},
                                  {"best_seed", g.seed},
                                  {"gate_error", g.terms.gate_error},
                                  {"r0", closed.error},
                                  {"F0", closed.fidelity},
                                  {"restarts", runs}});
  log << "best restart " << *best << ": gate error " << fmt(g.terms.gate_error) << ", r0 " << fmt(closed.error)
      << '\n';
}

void run_evaluate(const RunConfig& c, OutputDir& out, std::ostream& log) {
  const PulseParams p = read_params(c.params);
  const Waveform wf = synthesize(p);
  const ControlSystem sys(c.space(), c.chi());
  const LogicalGate gate = logical_unitary(build_code(c.code, c.cavity_dim), sys.space, c.gate);
  const auto channels = channels_for(c);
  const GateFidelity closed = stage("closed evolution", [&] { return gate_fidelity_closed(wf, sys, gate); });
  std::optional<GateFidelity> open;
  if (c.open) open = stage("open evolution", [&] { return gate_fidelity_open(wf, sys, gate, channels); });
  json j = fidelity_report_json(closed, open ? &*open : nullptr, channels);
  j["gate_time_us"] = wf.gate_time / kMicro;
  out.write_json("report.json", j);
  log << "r0 " << fmt(closed.error) << (open ? ", r_L " + fmt(open->error) : std::string()) << '\n';
}

void run_susceptibility(const RunConfig& c, OutputDir& out, std::ostream& log) {
  const PulseParams p = read_params(c.params);
  const Waveform wf = synthesize(p);
  const ControlSystem sys(c.space(), c.chi());
  const LogicalGate gate = logical_unitary(build_code(c.code, c.cavity_dim), sys.space, c.gate);
  std::vector<SusceptibilityTimecourse> tcs;
  const GateAnalysis a =
      stage("susceptibility", [&] { return analyze_gate(wf, sys, gate, channels_for(c), c.open, &tcs); });
  out.write_json("susceptibility.json", analysis_json(a));
  out.write_with("timecourse.csv", [&](std::ostream& os) { write_timecourse_csv(os, tcs); });
  log << "r0 " << fmt(a.report.r0) << ", r' " << fmt(a.report.r_prime);
  if (a.report.r_l) log << ", r_L " << fmt(*a.report.r_l) << ", residual " << fmt(*a.report.residual);
  log << '\n';
}

struct Member {
  double gate_time_us = 0.0;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::optional<OptimizedGate> gate;
  std::optional<GateAnalysis> analysis;
  std::optional<double> loss_only, relax_only;  // F/F0
  std::string error;
};

void run_ensemble(const RunConfig& c, OutputDir& out, std::ostream& log) {
  const auto& e = c.ensemble;
  std::vector<OptimizationProblem> problems;
  for (double t : e.gate_times_us) problems.push_back(c.problem(t));
  const auto channels = channels_for(c);
  const SpaceDescriptor space = c.space();

  std::vector<Member> members;
  for (std::size_t g = 0; g < e.gate_times_us.size(); ++g) {
    for (int i = 0; i < e.count; ++i) {
      Member m;
      m.gate_time_us = e.gate_times_us[g];
      m.index = static_cast<std::size_t>(i);
      m.seed = derive_seed(*c.seed, g * static_cast<std::size_t>(e.count) + m.index);
      members.push_back(m);
    }
  }
  log << "ensemble of " << members.size() << " gate(s) on " << c.jobs << " job(s)\n";
  std::mutex log_mutex;
  parallel_for(members.size(), c.jobs, [&](std::size_t k) {
    Member& m = members[k];
    const auto& problem = problems[k / static_cast<std::size_t>(e.count)];
    try {
      m.gate = optimize(problem, m.seed);
      m.analysis = analyze_gate(m.gate->waveform, problem.system, problem.target, channels, true);
      if (e.single_channel) {
        const double f0 = m.analysis->closed.fidelity;
        m.loss_only = relative_fidelity(m.gate->waveform, problem.system, problem.target,
                                        make_channel(space, ChannelKind::CavityLoss,
                                                     1.0 / (e.loss_only_lifetime_us * kMicro)),
                                        f0);
        m.relax_only = relative_fidelity(m.gate->waveform, problem.system, problem.target,
                                         make_channel(space, ChannelKind::TransmonRelaxation,
                                                      1.0 / (e.relax_only_t1_us * kMicro)),
                                         f0);
      }
    } catch (const NumericalError& ex) {
      m.error = ex.what();
    }
    std::lock_guard lock(log_mutex);
    log << "  T " << m.gate_time_us << " us #" << m.index << " seed " << m.seed << ": "
        << (m.error.empty() ? "gate error " + fmt(m.gate->terms.gate_error) + ", r_L " +
                                  fmt(*m.analysis->report.r_l)
                            : m.error)
        << '\n';
  });

  json list = json::array();
  std::ostringstream csv;
  csv << std::setprecision(12)
      << "gate_time_us,index,seed,gate_error,accepted,r0,r_L,r_prime,residual,F_over_F0_loss,F_over_F0_relax";
  for (const auto& ch : channels) {
    const std::string n = channel_name(ch.kind);
    csv << ",p_" << n << ",l_prime_" << n << ",s_" << n;
  }
  csv << '\n';
  std::vector<std::pair<double, double>> fit_points;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const Member& m = members[k];
    json j{{"gate_time_us", m.gate_time_us}, {"index", m.index}, {"seed", m.seed}};
    if (!m.error.empty()) {
      j["error"] = m.error;
      list.push_back(j);
      continue;
    }
    const bool accepted = m.gate->terms.gate_error <= e.max_gate_error;
    const std::string name = "params/params_" + time_tag(m.gate_time_us) + "_" + std::to_string(m.index) + ".json";
    out.write(name, to_json(m.gate->params).dump(2) + "\n");
    j["params"] = name;
    j["gate_error"] = m.gate->terms.gate_error;
    j["status"] = m.gate->status;
    j["accepted"] = accepted;
    j["report"] = analysis_json(*m.analysis);
    if (m.loss_only) j["F_over_F0_loss_only"] = *m.loss_only;
    if (m.relax_only) j["F_over_F0_relax_only"] = *m.relax_only;
    list.push_back(j);
    const auto& r = m.analysis->report;
    if (accepted && r.r0 > 0.0) fit_points.emplace_back(m.gate_time_us, r.r0);
    csv << m.gate_time_us << ',' << m.index << ',' << m.seed << ',' << m.gate->terms.gate_error << ','
        << (accepted ? 1 : 0) << ',' << r.r0 << ',' << *r.r_l << ',' << r.r_prime << ',' << *r.residual << ','
        << (m.loss_only ? fmt(*m.loss_only, 12) : "") << ',' << (m.relax_only ? fmt(*m.relax_only, 12) : "");
    for (const auto& ch : r.channels) csv << ',' << ch.p << ',' << ch.l_prime << ',' << ch.s;
    csv << '\n';
  }
  out.write("members.csv", csv.str());

  json summary{{"members", list.size()}};
  const bool multi = e.gate_times_us.size() > 1;
  for (double t : e.gate_times_us) {
    std::vector<SusceptibilityReport> reports;
    std::vector<double> residuals;
    for (const auto& m : members) {
      if (m.gate_time_us != t || !m.error.empty() || m.gate->terms.gate_error > e.max_gate_error) continue;
      SusceptibilityReport r = m.analysis->report;
      // thermal excitation stays out of the summary tables
      std::erase_if(r.channels, [](const auto& ch) { return ch.kind == ChannelKind::TransmonThermal; });
      reports.push_back(std::move(r));
      residuals.push_back(*m.analysis->report.residual);
    }
    const std::string suffix = multi ? "_" + time_tag(t) : "";
    json entry{{"gate_time_us", t}, {"accepted", reports.size()}};
    if (reports.size() >= 2) {
      const auto rows = susceptibility_table(reports);
      out.write_with("table" + suffix + ".txt", [&](std::ostream& os) { write_table_text(os, rows); });
      out.write_with("table" + suffix + ".csv", [&](std::ostream& os) { write_table_csv(os, rows); });
      std::vector<std::pair<std::string, std::vector<double>>> abs_series, rel_series;
      for (const auto& row : rows) {
        std::vector<double> v;
        for (const auto& r : reports) {
          for (const auto& ch : r.channels) {
            if (ch.kind == row.kind) v.push_back(ch.s);
          }
        }
        std::vector<double> rel;
        for (double x : v) rel.push_back(x / row.stats.average);
        abs_series.emplace_back(channel_name(row.kind), v);
        rel_series.emplace_back(channel_name(row.kind), rel);
        entry["channels"][channel_name(row.kind)] = {
            {"average", row.stats.average}, {"std", row.stats.std}, {"rsd", row.stats.rsd}};
      }
      out.write_with("s_histogram" + suffix + ".csv", [&](std::ostream& os) {
        write_histogram_csv(os, make_histogram(abs_series, e.histogram_bins));
      });
      out.write_with("s_relative_histogram" + suffix + ".csv", [&](std::ostream& os) {
        write_histogram_csv(os, make_histogram(rel_series, e.histogram_bins));
      });
      out.write_with("residual_histogram" + suffix + ".csv", [&](std::ostream& os) {
        write_histogram_csv(os, make_histogram({{"residual", residuals}}, e.histogram_bins));
      });
    }
    summary["gate_times"].push_back(entry);
  }
  std::vector<double> distinct;
  for (const auto& [t, r] : fit_points) {
    if (std::find(distinct.begin(), distinct.end(), t) == distinct.end()) distinct.push_back(t);
  }
  if (distinct.size() >= 2 && fit_points.size() >= 3) {
    summary["intrinsic_decay_per_us"] = fit_intrinsic_decay(fit_points);
  }
  out.write_json("ensemble.json", {{"members", list}});
  out.write_json("summary.json", summary);
}

void run_bound(const RunConfig& c, OutputDir& out, std::ostream& log) {
  const BosonicCode code = build_code(c.code, c.cavity_dim);
  ErrorBoundParams p;
  p.decay_per_us = c.bound.decay_per_us.value_or(default_decay_constant(c.code.kind));
  p.s_relax = c.bound.s_relax;
  p.s_dep = c.bound.s_dep;
  p.s_loss_per_photon = c.bound.s_loss_per_photon;
  p.mean_photon = code.mean_photon;
  constexpr double kOff = std::numeric_limits<double>::infinity();
  p.t1_us = c.rates.t1_us.value_or(kOff);
  p.t_phi_us = c.rates.t_phi_us.value_or(kOff);
  p.cavity_lifetime_us = c.rates.cavity_lifetime_us.value_or(kOff);
  if (!c.bound.from_ensemble.empty()) {
    std::ifstream in(c.bound.from_ensemble);
    json j;
    try {
      in >> j;
    } catch (const json::exception& ex) {
      throw ValidationError("bound.from_ensemble: " + std::string(ex.what()));
    }
    p = bound_params_from_ensemble(reports_from_ensemble_json(j), code.mean_photon, p);
  }
  p.validate();
  const BoundHeatmap map = bound_heatmap(c.bound.gate_times_us, c.bound.t_phis_us, p);
  out.write_with("bound_heatmap.csv", [&](std::ostream& os) { write_heatmap_csv(os, map); });

  const double lo = c.bound.gate_times_us.front(), hi = c.bound.gate_times_us.back();
  std::ostringstream minima;
  minima << "t_phi_us,t_gate_opt_us,bound\n" << std::setprecision(12);
  for (double tphi : c.bound.t_phis_us) {
    ErrorBoundParams q = p;
    q.t_phi_us = tphi;
    const BoundMinimum m = minimize_bound(q, lo, hi);
    minima << tphi << ',' << m.gate_time_us << ',' << m.value << '\n';
  }
  out.write("bound_minima.csv", minima.str());
  json params{{"decay_per_us", p.decay_per_us},       {"s_relax", p.s_relax},
              {"s_dep", p.s_dep},                     {"s_loss_per_photon", p.s_loss_per_photon},
              {"mean_photon", p.mean_photon},         {"t1_us", p.t1_us},
              {"cavity_lifetime_us", p.cavity_lifetime_us}};
  out.write_json("bound.json", {{"params", params}});
  log << "bound at T = 1 us, T_phi = " << p.t_phi_us << " us: " << fmt(error_bound(1.0, p)) << '\n';
}

void run_trajectory(const RunConfig& c, OutputDir& out, std::ostream& log) {
  const PulseParams p = read_params(c.params);
  const Waveform wf = synthesize(p);
  const ControlSystem sys(c.space(), c.chi());
  const LogicalGate gate = logical_unitary(build_code(c.code, c.cavity_dim), sys.space, c.gate);
  const StateVector psi0 = cardinal_pairs(gate).inputs[c.trajectory.state];
  const Trajectory traj = stage("trajectory", [&] {
    return c.trajectory.open
               ? propagate_open(wf, sys, pure_density(psi0), channels_for(c), c.trajectory.stride)
               : propagate_closed(wf, sys, psi0, c.trajectory.stride);
  });
  out.write_with("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj); });

  const auto& t = c.trajectory;
  std::vector<double> axis;
  for (int i = 0; i < t.wigner_points; ++i) axis.push_back(-t.wigner_extent + 2.0 * t.wigner_extent * i / (t.wigner_points - 1));
  json snapshots = json::array();
  const std::size_t samples = traj.times.size();
  for (int s = 0; s < t.wigner_snapshots; ++s) {
    const std::size_t idx =
        t.wigner_snapshots == 1 ? samples - 1 : (samples - 1) * static_cast<std::size_t>(s) / (t.wigner_snapshots - 1);
    const DensityMatrix rho = traj.pure() ? pure_density(traj.states[idx]) : traj.densities[idx];
    const WignerGrid grid = wigner_grid(reduce_to_cavity(sys.space, rho), axis, axis);
    const std::string name = "wigner_" + std::to_string(s) + ".csv";
    out.write_with(name, [&](std::ostream& os) {
      os << std::setprecision(10) << "x\\p";
      for (double x : axis) os << ',' << x;
      os << '\n';
      for (int i = 0; i < grid.values.rows(); ++i) {
        os << axis[i];
        for (int j = 0; j < grid.values.cols(); ++j) os << ',' << grid.values(i, j);
        os << '\n';
      }
    });
    snapshots.push_back({{"file", name}, {"t_ns", traj.times[idx] / kNano}, {"truncation_warning", grid.truncation_warning}});
    if (grid.truncation_warning) log << "warning: truncation edge populated in " << name << '\n';
  }
  out.write_json("trajectory.json", {{"initial_state", t.state}, {"open", t.open}, {"wigner", snapshots}});
  log << "trajectory with " << samples << " samples\n";
}

}  // namespace

std::vector<SusceptibilityReport> reports_from_ensemble_json(const json& j) {
  std::vector<SusceptibilityReport> out;
  try {
    for (const auto& m : j.at("members")) {
      if (!m.contains("report") || !m.value("accepted", true)) continue;
      SusceptibilityReport r;
      const auto& rep = m.at("report");
      r.gate_time = rep.at("gate_time_us").get<double>() * kMicro;
      r.r0 = rep.at("r0").get<double>();
      r.r_prime = rep.at("r_prime").get<double>();
      for (const auto& [name, ch] : rep.at("channels").items()) {
        r.channels.push_back({parse_channel(name), ch.at("rate_per_s").get<double>(), ch.at("p").get<double>(),
                              ch.at("l_prime").get<double>(), ch.at("s").get<double>()});
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("ensemble file: ") + e.what());
  }
  if (out.empty()) throw ValidationError("ensemble file holds no accepted members");
  return out;
}

void run(const RunConfig& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_timestamp();
  OutputDir out(config.out);
  switch (config.command) {
    case Command::Optimize: run_optimize(config, out, log); break;
    case Command::Evaluate: run_evaluate(config, out, log); break;
    case Command::Susceptibility: run_susceptibility(config, out, log); break;
    case Command::Ensemble: run_ensemble(config, out, log); break;
    case Command::Bound: run_bound(config, out, log); break;
    case Command::Trajectory: run_trajectory(config, out, log); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.write_manifest(command_name(config.command), config.echo, started, wall);
  log << "wrote " << out.files().size() << " file(s) and manifest.json to " << out.root().string() << '\n';
}

}  // namespace bosonq
