// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bosonq/error_model.hpp"
#include "bosonq/grape.hpp"
#include "bosonq/parallel.hpp"
#include "bosonq/pipeline.hpp"

using namespace bosonq;

namespace {

constexpr double kChi = -kTwoPi * 2.0e6;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

class Reporter {
 public:
  explicit Reporter(nlohmann::json* report) : report_(report) {}

  void check(const std::string& id, bool pass, const std::string& what, const std::string& detail) {
    std::lock_guard lock(mutex_);
    std::cout << (pass ? "PASS" : "FAIL") << "  " << id << "  " << what << "  [" << detail << "]" << std::endl;
    if (!pass) ++failures_;
    if (report_) (*report_)["criteria"].push_back({{"id", id}, {"pass", pass}, {"what", what}, {"detail", detail}});
  }

  void note(const std::string& text) {
    std::lock_guard lock(mutex_);
    std::cout << "      " << text << std::endl;
  }

  int failures() const { return failures_; }

 private:
  nlohmann::json* report_;
  std::mutex mutex_;
  int failures_ = 0;
};

// ---------------------------------------------------------------- criterion 1

double decay_deviation() {
  double worst = 0.0;
  {
    const auto space = make_space(2, 6);
    const double kappa = 1e6;
    const auto traj =
        propagate_open(zero_waveform(200, 1.0 / kappa), ControlSystem(space, kChi),
                       pure_density(product_state(space, 0, fock_state(6, 1))),
                       {make_channel(space, ChannelKind::CavityLoss, kappa)}, 200);
    worst = std::max(worst, std::abs(traj.mean_photon.back() / std::exp(-1.0) - 1.0));
  }
  {
    const auto space = make_space(2, 4);
    const double t1 = 2e-6;
    const auto traj = propagate_open(zero_waveform(200, t1), ControlSystem(space, kChi),
                                     pure_density(product_state(space, 1, fock_state(4, 0))),
                                     {make_channel(space, ChannelKind::TransmonRelaxation, 1.0 / t1)}, 200);
    worst = std::max(worst, std::abs(traj.transmon_excitation.back() / std::exp(-1.0) - 1.0));
  }
  {
    const auto space = make_space(2, 4);
    const double t1 = 3e-6, tphi = 2e-6;
    const double t2 = 1.0 / (0.5 / t1 + 1.0 / tphi);
    StateVector psi = StateVector::Zero(space.total_dim());
    psi(space.index(0, 0)) = psi(space.index(1, 0)) = 1.0 / std::sqrt(2.0);
    const auto traj = propagate_open(zero_waveform(200, t2), ControlSystem(space, kChi), pure_density(psi),
                                     {make_channel(space, ChannelKind::TransmonRelaxation, 1.0 / t1),
                                      make_channel(space, ChannelKind::TransmonDephasing, 1.0 / tphi)},
                                     200);
    const double coherence = std::abs(traj.densities.back()(space.index(0, 0), space.index(1, 0)));
    worst = std::max(worst, std::abs(coherence / (0.5 * std::exp(-1.0)) - 1.0));
  }
  return worst;
}

double displacement_deviation() {
  const int d = 50;
  const auto space = make_space(2, d);
  const auto code = build_code({CodeKind::Bin11}, d);
  const ControlSystem sys(space, 0.0);  // bare cavity: no dispersive coupling, no transmon drive
  Waveform wf = zero_waveform(200, 1e-6);
  wf.u.row(2).setConstant(0.3);
  wf.u.row(3).setConstant(-0.2);
  const Operator a = jump_operator(space, ChannelKind::CavityLoss);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Vector cav = Complex(g(rng), g(rng)) * code.zero_logical + Complex(g(rng), g(rng)) * code.one_logical;
    cav.normalize();
    const auto traj = propagate_closed(wf, sys, product_state(space, 0, cav), 1);
    for (const auto& psi : traj.states) worst = std::max(worst, std::abs(jump_statistics(psi, a).s - 2.0));
  }
  return worst;
}

// Bin11 on a 4-level cavity (dim 8): the codewords are cut to fit.
OptimizationProblem tiny_problem(GateKind gate) {
  const int dim = 4;
  BosonicCode code = build_code({CodeKind::Bin11}, 15);
  auto cut = [&](const Vector& v) { return Vector(v.head(dim)); };
  code.cavity_dim = dim;
  code.zero_logical = cut(code.zero_logical);
  code.one_logical = cut(code.one_logical);
  code.zero_error = cut(code.zero_error);
  code.one_error = cut(code.one_error);
  const ConstraintPreset preset{"tiny", 125e6, 2e-9, {80.0, 80.0, 60.0, 60.0}};
  return make_problem(make_space(2, dim), kChi, code, {gate}, 8e-9, preset);
}

double gradient_deviation() {
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const auto problem = tiny_problem(inst % 2 ? GateKind::Hadamard : GateKind::X);
    const PulseParams p =
        random_pulse_params(problem.params_template, {160.0, 160.0, 120.0, 120.0}, 500 + static_cast<unsigned>(inst));
    const CostEvaluation ev = cost_and_gradient(p, problem);
    const RealVector x0 = p.to_vector();
    const double eps = 1e-6;
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
      RealVector xp = x0, xm = x0;
      xp(i) += eps;
      xm(i) -= eps;
      PulseParams pp = p, pm = p;
      pp.assign(xp);
      pm.assign(xm);
      const double fd =
          (cost_and_gradient(pp, problem).terms.total - cost_and_gradient(pm, problem).terms.total) / (2 * eps);
      const double scale = std::max(std::abs(fd), ev.gradient.cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(fd - ev.gradient(i)) / scale);
    }
  }
  return worst;
}

void criterion_1(Reporter& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  const double decay = decay_deviation();
  rep.check("1.1", decay <= 1e-5, "Lindblad decays match e^{-kt}, e^{-t/T1}, e^{-t/T2} at one lifetime",
            "max relative deviation " + fmt(decay, 3) + " <= 1e-5");

  const double relax = idle_susceptibility(ChannelKind::TransmonRelaxation);
  const double deph = idle_susceptibility(ChannelKind::TransmonDephasing);
  const double idle = std::max(std::abs(relax - 1.0 / 3.0), std::abs(deph - 1.0 / 3.0));
  rep.check("1.2", idle <= 1e-12, "idle susceptibility is 1/3 for relaxation and dephasing",
            "max |s - 1/3| = " + fmt(idle, 3) + " <= 1e-12");

  const auto m = sigma_z_moment_stats();
  const bool sz = std::abs(m.std - 0.577) <= 1e-3 && std::abs(m.std_sq - 0.298) <= 1e-3;
  rep.check("1.3", sz, "sigma_z moment statistics (0.577, 0.298)",
            "got (" + fmt(m.std, 6) + ", " + fmt(m.std_sq, 6) + ") within 1e-3");

  const double disp = displacement_deviation();
  rep.check("1.4", disp <= 1e-8, "displacement drive keeps s_loss = 2 on 5 random Bin11 states",
            "max |s_loss - 2| = " + fmt(disp, 3) + " <= 1e-8");

  const double grad = gradient_deviation();
  rep.check("1.5", grad < 1e-6, "GRAPE gradient vs central differences, dim 8, N=4, 20 instances",
            "max relative deviation " + fmt(grad, 3) + " < 1e-6");

  const double elapsed = seconds_since(t0);
  rep.check("1.6", elapsed < 60.0, "analytic oracle suite runs in under a minute", fmt(elapsed, 3) + " s < 60 s");
}

// ---------------------------------------------------------------- criterion 2

void criterion_2(Reporter& rep) {
  const ErrorBoundParams p;
  const double dec = error_bound_decoherence(1.0, p);
  rep.check("2.1", std::abs(dec - 0.0168) <= 1e-4, "bound decoherence part at T=1 us, Tphi=25 us is 1.68%",
            fmt(100 * dec, 5) + "% within 1.68 +/- 0.01%");

  ErrorBoundParams q = p;
  q.t_phi_us = 31.0;
  const BoundMinimum star = minimize_bound(q);
  const bool ok_star = star.gate_time_us >= 0.55 && star.gate_time_us <= 0.65 && std::abs(star.value - 0.010) <= 5e-4;
  rep.check("2.2", ok_star, "bound minimum at Tphi=31 us is ~1.0% at T in [550, 650] ns",
            fmt(100 * star.value, 4) + "% at " + fmt(1000 * star.gate_time_us, 4) + " ns");

  std::string detail;
  bool ok = true;
  const std::pair<double, double> cases[] = {{37, 0.009}, {46, 0.008}, {60, 0.007}, {85, 0.006}};
  for (const auto& [tphi, expected] : cases) {
    q.t_phi_us = tphi;
    const double v = minimize_bound(q).value;
    ok = ok && std::abs(v - expected) <= 5e-4;
    detail += (detail.empty() ? "" : ", ") + fmt(tphi, 3) + " us -> " + fmt(100 * v, 3) + "%";
  }
  rep.check("2.3", ok, "bound minima at Tphi = 37/46/60/85 us are 0.9/0.8/0.7/0.6% +/- 0.05%", detail);
}

// ----------------------------------------------------------- criteria 3 to 5

struct GateRun {
  std::string label;
  GateKind gate = GateKind::Hadamard;
  CodeSpec code;
  bool weak = false;
  std::uint64_t seed = 0;
  std::optional<OptimizedGate> result;
  std::optional<GateAnalysis> analysis;
  double loss_only = 0.0, relax_only = 0.0;  // F/F0
  double mean_photon = 0.0;
  std::string error;
  double seconds = 0.0;
};

void run_gate(GateRun& g, Reporter& rep) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto space = make_space(2, 30);
    const BosonicCode code = build_code(g.code, 30);
    g.mean_photon = code.mean_photon;
    const auto problem =
        make_problem(space, kChi, code, {g.gate}, 1e-6, g.weak ? weak_preset() : standard_preset());
    g.result = optimize(problem, g.seed);
    if (g.gate == GateKind::Hadamard) {
      // paper-standard rates, thermal excitation included in both r_L and r'
      const auto channels = make_channels(space, DecoherenceRates{}, true);
      g.analysis = analyze_gate(g.result->waveform, problem.system, problem.target, channels, !g.weak);
      if (!g.weak) {
        const double f0 = g.analysis->closed.fidelity;
        g.loss_only = relative_fidelity(g.result->waveform, problem.system, problem.target,
                                        make_channel(space, ChannelKind::CavityLoss, 1.0 / 500e-6), f0);
        g.relax_only = relative_fidelity(g.result->waveform, problem.system, problem.target,
                                         make_channel(space, ChannelKind::TransmonRelaxation, 1.0 / 100e-6), f0);
      }
    }
  } catch (const std::exception& e) {
    g.error = e.what();
  }
  g.seconds = seconds_since(t0);
  std::ostringstream os;
  os << g.label << " seed " << g.seed << ": ";
  if (!g.error.empty()) {
    os << "error: " << g.error;
  } else {
    os << "psi1 " << fmt(g.result->terms.gate_error, 3) << " (" << g.result->status << ", "
       << g.result->iterations << " it)";
    if (g.analysis) {
      const auto& r = g.analysis->report;
      os << ", r0 " << fmt(r.r0, 3);
      if (r.r_l) os << ", r_L " << fmt(*r.r_l, 4) << ", residual " << fmt(*r.residual, 3);
    }
  }
  os << ", " << fmt(g.seconds, 4) << " s";
  rep.note(os.str());
}

double channel_s(const GateRun& g, ChannelKind kind) {
  for (const auto& ch : g.analysis->report.channels) {
    if (ch.kind == kind) return ch.s;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

nlohmann::json gate_json(const GateRun& g) {
  nlohmann::json j{{"label", g.label}, {"seed", g.seed}, {"seconds", g.seconds}};
  if (!g.error.empty()) j["error"] = g.error;
  if (g.result) {
    j["gate_error"] = g.result->terms.gate_error;
    j["status"] = g.result->status;
    j["iterations"] = g.result->iterations;
  }
  if (g.analysis) {
    j["report"] = to_json(g.analysis->report);
    if (g.analysis->open) j["F_over_F0_loss_only"] = g.loss_only, j["F_over_F0_relax_only"] = g.relax_only;
  }
  return j;
}

void criteria_3_to_5(Reporter& rep, int jobs, std::uint64_t base_seed, int hadamards, bool with_3, bool with_4,
                     bool with_5, nlohmann::json* report) {
  std::vector<GateRun> runs;
  if (with_3 || with_4) {
    for (int i = 0; i < hadamards; ++i) {
      GateRun g;
      g.label = "hadamard #" + std::to_string(i);
      g.seed = derive_seed(base_seed, static_cast<std::size_t>(i));
      runs.push_back(g);
    }
  }
  if (with_3) {
    for (int i = 0; i < 3; ++i) {
      GateRun g;
      g.label = "z #" + std::to_string(i);
      g.gate = GateKind::Z;
      g.seed = derive_seed(base_seed + 1, static_cast<std::size_t>(i));
      runs.push_back(g);
    }
  }
  if (with_5) {
    GateRun cat;
    cat.label = "cat4 hadamard (weak preset)";
    cat.code = {CodeKind::Cat4, std::sqrt(3.0)};
    cat.weak = true;
    cat.seed = derive_seed(base_seed + 2, 0);
    runs.push_back(cat);
    GateRun bin22;
    bin22.label = "bin22 hadamard (weak preset)";
    bin22.code = {CodeKind::Bin22};
    bin22.weak = true;
    bin22.seed = derive_seed(base_seed + 3, 0);
    runs.push_back(bin22);
  }
  rep.note("optimizing " + std::to_string(runs.size()) + " gates on " + std::to_string(jobs) + " job(s)");
  parallel_for(runs.size(), jobs, [&](std::size_t i) { run_gate(runs[i], rep); });
  if (report) {
    for (const auto& g : runs) (*report)["gates"].push_back(gate_json(g));
  }

  std::vector<const GateRun*> had, zs;
  for (const auto& g : runs) {
    if (g.code.kind != CodeKind::Bin11) continue;
    (g.gate == GateKind::Z ? zs : had).push_back(&g);
  }
  auto ok = [](const GateRun* g) { return g->error.empty() && g->result; };

  if (with_3) {
    int reached = 0;
    std::string detail;
    for (const auto* g : zs) {
      const bool hit = ok(g) && g->result->terms.gate_error < 1e-4;
      reached += hit;
      detail += (detail.empty() ? "" : ", ") + (ok(g) ? fmt(g->result->terms.gate_error, 3) : std::string("error"));
    }
    rep.check("3.1", reached >= 2, "Z gate on Bin11, T=1 us: at least 2 of 3 restarts reach psi1 < 1e-4",
              std::to_string(reached) + "/3 (psi1 " + detail + ")");

    const GateRun* best = nullptr;
    for (int i = 0; i < std::min<int>(3, static_cast<int>(had.size())); ++i) {
      if (ok(had[i]) && (!best || had[i]->analysis->report.r0 < best->analysis->report.r0)) best = had[i];
    }
    rep.check("3.2", best && best->analysis->report.r0 <= 5e-3,
              "Hadamard on Bin11, T=1 us: best of 3 restarts has r0 <= 5e-3",
              best ? "r0 " + fmt(best->analysis->report.r0, 3) + " (" + best->label + ")" : "no successful run");
    const double rl = best ? *best->analysis->report.r_l : std::numeric_limits<double>::quiet_NaN();
    rep.check("3.3", best && rl >= 0.014 && rl <= 0.026, "best Hadamard with paper-standard rates: r_L in [1.4%, 2.6%]",
              "r_L " + fmt(100 * rl, 4) + "%");
  }

  if (with_4) {
    std::vector<const GateRun*> good;
    for (const auto* g : had) {
      if (ok(g)) good.push_back(g);
    }
    double worst = 0.0;
    for (const auto* g : good) worst = std::max(worst, std::abs(*g->analysis->report.residual));
    const bool enough = good.size() >= 8 && good.size() == had.size();
    rep.check("4.1", enough && worst <= 3e-3, "model residual |r_L - (r0 + r')| <= 0.3% on each of >= 8 Hadamard gates",
              std::to_string(good.size()) + " gates, max |residual| " + fmt(100 * worst, 3) + "%");

    auto stats_of = [&](ChannelKind kind) {
      std::vector<double> v;
      for (const auto* g : good) v.push_back(channel_s(*g, kind));
      return v.size() >= 2 ? ensemble_stats(v) : EnsembleStats{};
    };
    const auto loss = stats_of(ChannelKind::CavityLoss);
    const auto relax = stats_of(ChannelKind::TransmonRelaxation);
    const auto deph = stats_of(ChannelKind::TransmonDephasing);
    rep.note("s_loss " + fmt(loss.average) + " +/- " + fmt(loss.std) + " (RSD " + fmt(loss.rsd) + "), s_relax " +
             fmt(relax.average) + " +/- " + fmt(relax.std) + " (RSD " + fmt(relax.rsd) + "), s_dep " +
             fmt(deph.average) + " +/- " + fmt(deph.std) + " (RSD " + fmt(deph.rsd) + ")");
    rep.check("4.2", enough && loss.average >= 1.8 && loss.average <= 2.3, "ensemble mean s_loss in [1.8, 2.3]",
              "mean s_loss " + fmt(loss.average));
    const bool transmon = relax.average >= 0.25 && relax.average <= 0.50 && deph.average >= 0.25 && deph.average <= 0.50;
    rep.check("4.3", enough && transmon, "ensemble mean s_relax and s_dep in [0.25, 0.50]",
              "mean s_relax " + fmt(relax.average) + ", mean s_dep " + fmt(deph.average));
    rep.check("4.4", enough && loss.rsd < relax.rsd, "RSD[s_loss] < RSD[s_relax]",
              fmt(loss.rsd) + " < " + fmt(relax.rsd));

    std::vector<double> lo, re;
    for (const auto* g : good) {
      lo.push_back(g->loss_only);
      re.push_back(g->relax_only);
    }
    const double std_lo = lo.size() >= 2 ? ensemble_stats(lo).std : NAN;
    const double std_re = re.size() >= 2 ? ensemble_stats(re).std : NAN;
    rep.check("4.5", enough && std_lo < std_re,
              "Std[F/F0] with loss only (1/k = 500 us) < Std[F/F0] with relaxation only (T1 = 100 us)",
              fmt(std_lo, 3) + " < " + fmt(std_re, 3));
  }

  if (with_5) {
    rep.note("declared out of desk scale: 100-gate ensembles, the full gate-time sweep and dense cross-code sweeps");
    std::string id = "5.1";
    for (const auto& g : runs) {
      if (g.code.kind == CodeKind::Bin11) continue;
      const bool good = g.error.empty() && g.analysis;
      const double s = good ? channel_s(g, ChannelKind::CavityLoss) : NAN;
      rep.check(id, good && std::abs(s / g.mean_photon - 1.0) <= 0.15,
                code_name(g.code.kind) + " spot run: mean s_loss within 15% of mean photon number",
                "s_loss " + fmt(s) + ", nbar " + fmt(g.mean_photon) + ", psi1 " +
                    (g.result ? fmt(g.result->terms.gate_error, 3) : std::string("n/a")));
      id = "5.2";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int jobs = 1;
  std::uint64_t seed = 1;
  int hadamards = 8;
  std::vector<int> only;
  std::string report_path;
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "base seed of the optimized gates");
  app.add_option("--hadamards", hadamards, "size of the Hadamard ensemble")->check(CLI::Range(3, 1000));
  app.add_option("--only", only, "run only these criteria (1-5)");
  app.add_option("--report", report_path, "write a JSON record of every check and gate");
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };
  nlohmann::json report;
  Reporter rep(report_path.empty() ? nullptr : &report);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (wanted(1)) criterion_1(rep);
    if (wanted(2)) criterion_2(rep);
    if (wanted(3) || wanted(4) || wanted(5)) {
      criteria_3_to_5(rep, jobs, seed, hadamards, wanted(3), wanted(4), wanted(5), report_path.empty() ? nullptr : &report);
    }
  } catch (const std::exception& e) {
    std::cout << "FAIL  run aborted: " << e.what() << std::endl;
    return 1;
  }
  rep.note("total " + fmt(seconds_since(t0), 5) + " s, " + std::to_string(rep.failures()) + " failure(s)");
  if (!report_path.empty()) std::ofstream(report_path) << report.dump(2) << '\n';
  return rep.failures() == 0 ? 0 : 1;
}
