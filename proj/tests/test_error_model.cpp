#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bosonq/error_model.hpp"

using namespace bosonq;

namespace {

constexpr double kChi = -kTwoPi * 2.0e6;

Waveform random_waveform(int steps, double gate_time, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-8.0, 8.0);
  Waveform wf = zero_waveform(steps, gate_time);
  for (auto& x : wf.u.reshaped()) x = d(rng);
  wf.u.row(2) *= 0.2;
  wf.u.row(3) *= 0.2;
  return wf;
}

}  // namespace

TEST(Susceptibility, InitialValuesOnBin11) {
  const auto space = make_space(2, 20);
  const auto code = build_code({CodeKind::Bin11}, 20);
  const auto gate = logical_unitary(code, space, {GateKind::Hadamard});
  const ControlSystem sys(space, kChi);
  const auto traj = cardinal_trajectories(random_waveform(40, 0.2e-6, 1), sys, gate);
  ASSERT_EQ(traj.times.size(), 41u);

  const auto loss = susceptibility_timecourse(traj, ChannelKind::CavityLoss, jump_operator(space, ChannelKind::CavityLoss));
  const auto relax = susceptibility_timecourse(traj, ChannelKind::TransmonRelaxation,
                                               jump_operator(space, ChannelKind::TransmonRelaxation));
  const auto deph = susceptibility_timecourse(traj, ChannelKind::TransmonDephasing,
                                              jump_operator(space, ChannelKind::TransmonDephasing));
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(loss.p[i][0], 2.0, 1e-12);
    EXPECT_NEAR(loss.l_prime[i][0], 0.0, 1e-12);
    EXPECT_NEAR(loss.s[i][0], 2.0, 1e-12);
    EXPECT_NEAR(relax.p[i][0], 0.0, 1e-15);
    EXPECT_NEAR(relax.s[i][0], 0.0, 1e-15);
    for (std::size_t t = 0; t < traj.times.size(); ++t) {
      EXPECT_NEAR(deph.p[i][t], 0.5, 1e-12);
      for (const auto* tc : {&loss, &relax, &deph}) {
        EXPECT_GE(tc->s[i][t], -1e-12);
        EXPECT_GE(tc->l_prime[i][t], 0.0);
        EXPECT_NEAR(tc->s[i][t], tc->p[i][t] - tc->l_prime[i][t], 1e-9);
      }
    }
  }
  const auto avg = gate_susceptibility(deph, 4e4);
  EXPECT_NEAR(avg.p, 0.5, 1e-12);
  EXPECT_NEAR(avg.s, avg.p - avg.l_prime, 1e-9);
}

// A pure cavity displacement keeps s_loss at n̄ for any codespace state.
TEST(Susceptibility, DisplacementConservation) {
  const int d = 50;
  const auto space = make_space(2, d);
  const auto code = build_code({CodeKind::Bin11}, d);
  const ControlSystem sys(space, 0.0);
  Waveform wf = zero_waveform(100, 0.5e-6);
  wf.u.row(2).setConstant(0.4);
  wf.u.row(3).setConstant(-0.25);
  const Operator a = jump_operator(space, ChannelKind::CavityLoss);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    Complex c0(g(rng), g(rng)), c1(g(rng), g(rng));
    Vector cav = c0 * code.zero_logical + c1 * code.one_logical;
    cav.normalize();
    const Trajectory traj = propagate_closed(wf, sys, product_state(space, 0, cav), 1);
    ASSERT_EQ(traj.states.size(), 101u);
    double max_dev = 0.0;
    for (const auto& psi : traj.states) max_dev = std::max(max_dev, std::abs(jump_statistics(psi, a).s - 2.0));
    EXPECT_LT(max_dev, 1e-8);
    // the displacement does move the state
    EXPECT_GT(std::abs(jump_statistics(traj.states.back(), a).p - 2.0), 1e-3);
  }
}

TEST(Susceptibility, IdleLimitAndSixStateExactness) {
  EXPECT_NEAR(idle_susceptibility(ChannelKind::TransmonRelaxation), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(idle_susceptibility(ChannelKind::TransmonDephasing), 1.0 / 3.0, 1e-12);
  EXPECT_THROW(idle_susceptibility(ChannelKind::CavityLoss), ValidationError);

  // cos⁴(θ/2) and ½ − ½cos²θ over the six cardinal points
  double a = 0.0, b = 0.0;
  for (const auto& c : cardinal_coefficients()) {
    const double z = std::norm(c(0)) - std::norm(c(1));
    a += std::pow(0.5 * (1 + z), 2) / 6.0;
    b += (0.5 - 0.5 * z * z) / 6.0;
  }
  EXPECT_NEAR(a, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(b, 1.0 / 3.0, 1e-15);

  const StateVector g = product_state(make_space(2, 4), 0, fock_state(4, 1));
  EXPECT_EQ(jump_statistics(g, jump_operator(make_space(2, 4), ChannelKind::TransmonRelaxation)).s, 0.0);
}

TEST(Susceptibility, SigmaZMoments) {
  const auto m = sigma_z_moment_stats();
  EXPECT_NEAR(m.mean, 0.0, 1e-14);
  EXPECT_NEAR(m.std, std::sqrt(1.0 / 3.0), 1e-12);
  EXPECT_NEAR(m.std_sq, std::sqrt(1.0 / 5.0 - 1.0 / 9.0), 1e-12);
  EXPECT_NEAR(m.std, 0.577, 1e-3);
  EXPECT_NEAR(m.std_sq, 0.298, 1e-3);
}

TEST(ErrorModel, DecoherenceErrorIsLinear) {
  std::vector<ChannelSusceptibility> ch{{ChannelKind::TransmonRelaxation, 1e4, 0, 0, 0.25},
                                        {ChannelKind::TransmonDephasing, 4e4, 0, 0, 0.31},
                                        {ChannelKind::CavityLoss, 1e3, 0, 0, 0.94 * 2}};
  EXPECT_NEAR(decoherence_error(1e-6, ch), 0.0025 + 0.0124 + 0.00188, 1e-12);
  EXPECT_NEAR(decoherence_error(1e-6, ch), 0.0168, 1e-4);
  auto doubled = ch;
  for (auto& c : doubled) c.rate *= 2;
  EXPECT_DOUBLE_EQ(decoherence_error(1e-6, doubled), 2 * decoherence_error(1e-6, ch));
  for (auto& c : ch) c.rate = 0.0;
  EXPECT_EQ(decoherence_error(1e-6, ch), 0.0);
  EXPECT_DOUBLE_EQ(model_residual(0.02, 0.001, 0.018), 0.02 - 0.019);
}

TEST(ErrorModel, ReportMatchesClosedFidelity) {
  const auto space = make_space(2, 20);
  const auto code = build_code({CodeKind::Bin11}, 20);
  const auto gate = logical_unitary(code, space, {GateKind::Hadamard});
  const ControlSystem sys(space, kChi);
  const Waveform wf = random_waveform(50, 0.25e-6, 2);
  const auto ch = make_channels(space, DecoherenceRates{});
  std::vector<SusceptibilityTimecourse> tcs;
  const auto rep = susceptibility_report(wf, sys, gate, ch, &tcs);
  EXPECT_NEAR(rep.r0, gate_fidelity_closed(wf, sys, gate).error, 1e-12);
  EXPECT_EQ(rep.channels.size(), 4u);
  EXPECT_EQ(tcs.size(), 4u);
  EXPECT_GE(rep.r_prime, 0.0);
  for (const auto& c : rep.channels) EXPECT_NEAR(c.s, c.p - c.l_prime, 1e-9);

  const auto j = to_json(rep);
  EXPECT_TRUE(j.at("channels").contains("cavity_loss"));
  EXPECT_FALSE(j.contains("r_L"));
  std::ostringstream os;
  write_timecourse_csv(os, tcs);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "channel,state,t_ns,p,l_prime,s");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 4 * 6 * 51);
}

// With every rate zero the residual vanishes; a single channel's residual is
// second order in its rate.
TEST(ErrorModel, ResidualOrder) {
  const auto space = make_space(2, 15);
  const auto code = build_code({CodeKind::Bin11}, 15);
  const auto gate = logical_unitary(code, space, {GateKind::Identity});
  const ControlSystem sys(space, kChi);
  const Waveform wf = zero_waveform(50, 1e-6);

  auto residual = [&](double kappa) {
    std::vector<DecoherenceChannel> ch;
    if (kappa > 0) ch.push_back(make_channel(space, ChannelKind::CavityLoss, kappa));
    const auto rep = susceptibility_report(wf, sys, gate, ch);
    const double r_l = gate_fidelity_open(wf, sys, gate, ch).error;
    return model_residual(r_l, rep.r0, rep.r_prime);
  };
  EXPECT_NEAR(residual(0.0), 0.0, 1e-8);
  const double full = residual(2e4), half = residual(1e4);
  EXPECT_GT(std::abs(full), 2.5 * std::abs(half));
  EXPECT_LT(std::abs(full), 5.0 * std::abs(half));
}

TEST(Ensemble, Statistics) {
  auto s = ensemble_stats({2, 2, 2});
  EXPECT_EQ(s.average, 2.0);
  EXPECT_EQ(s.std, 0.0);
  EXPECT_EQ(s.rsd, 0.0);
  s = ensemble_stats({0.3, 0.5});
  EXPECT_NEAR(s.average, 0.4, 1e-15);
  EXPECT_NEAR(s.std, std::sqrt(0.02), 1e-15);
  EXPECT_NEAR(s.rsd, std::sqrt(0.02) / 0.4, 1e-14);
  EXPECT_NEAR(0.069 / 2.038, 0.0339, 1e-4);
  EXPECT_THROW(ensemble_stats({1.0}), ValidationError);
  EXPECT_THROW(ensemble_stats({}), ValidationError);
}

TEST(Ensemble, TableAndHistogram) {
  std::vector<SusceptibilityReport> reports(3);
  const double loss[] = {2.0, 2.1, 1.9}, relax[] = {0.3, 0.4, 0.35};
  for (int i = 0; i < 3; ++i) {
    reports[i].channels = {{ChannelKind::CavityLoss, 1e3, 0, 0, loss[i]},
                           {ChannelKind::TransmonRelaxation, 1e4, 0, 0, relax[i]}};
  }
  const auto rows = susceptibility_table(reports);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].stats.average, 2.0, 1e-12);
  EXPECT_NEAR(rows[0].stats.std, 0.1, 1e-12);
  std::ostringstream csv;
  write_table_csv(csv, rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "channel,average,std,rsd");

  const auto params = bound_params_from_ensemble(reports, 2.0);
  EXPECT_NEAR(params.s_loss_per_photon, 0.95, 1e-12);
  EXPECT_NEAR(params.s_relax, 0.3, 1e-12);
  EXPECT_NEAR(params.s_dep, 0.31, 1e-12);

  const auto h = make_histogram({{"abs", {0.0, 0.5, 1.0}}, {"rel", {0.25, 0.75}}}, 4);
  ASSERT_EQ(h.edges.size(), 5u);
  EXPECT_DOUBLE_EQ(h.edges.front(), 0.0);
  EXPECT_DOUBLE_EQ(h.edges.back(), 1.0);
  EXPECT_EQ(h.counts[0].second, (std::vector<int>{1, 0, 1, 1}));
  EXPECT_EQ(h.counts[1].second, (std::vector<int>{0, 1, 0, 1}));
  EXPECT_THROW(make_histogram({}, 3), ValidationError);
}

TEST(IntrinsicFit, RecoversDecay) {
  std::vector<std::pair<double, double>> pts;
  for (double t : {0.2, 0.4, 0.6, 0.8}) pts.emplace_back(t, std::exp(-11.05 * t));
  EXPECT_NEAR(fit_intrinsic_decay(pts), 11.05, 1e-6);
  for (auto& p : pts) p.second = 1e-3;
  EXPECT_NEAR(fit_intrinsic_decay(pts), 0.0, 1e-12);
  pts[1].second = 0.0;
  EXPECT_THROW(fit_intrinsic_decay(pts), ValidationError);
  EXPECT_THROW(fit_intrinsic_decay({{0.2, 1e-2}, {0.4, 1e-3}}), ValidationError);
  EXPECT_DOUBLE_EQ(default_decay_constant(CodeKind::Cat4), 10.50);
  EXPECT_DOUBLE_EQ(default_decay_constant(CodeKind::Bin22), 8.50);
}

TEST(Bound, PaperOperatingPoint) {
  const ErrorBoundParams p;
  EXPECT_NEAR(error_bound_decoherence(1.0, p), 0.0168, 1e-4);
  EXPECT_NEAR(error_bound(1.0, p), 0.01678 + std::exp(-11.05), 1e-12);
  EXPECT_NEAR(error_bound(1.0, p), 0.0168, 1e-4);
  EXPECT_THROW(error_bound(0.0, p), ValidationError);
  ErrorBoundParams bad;
  bad.t1_us = -100.0;
  EXPECT_THROW(error_bound(1.0, bad), ValidationError);
}

TEST(Bound, MinimaOverGateTime) {
  ErrorBoundParams p;
  p.t_phi_us = 31.0;
  const auto star = minimize_bound(p);
  EXPECT_GE(star.gate_time_us, 0.55);
  EXPECT_LE(star.gate_time_us, 0.65);
  EXPECT_NEAR(star.value, 0.010, 5e-4);
  const std::pair<double, double> cases[] = {{37, 0.009}, {46, 0.008}, {60, 0.007}, {85, 0.006}};
  for (const auto& [tphi, expected] : cases) {
    p.t_phi_us = tphi;
    EXPECT_NEAR(minimize_bound(p).value, expected, 5e-4) << tphi;
  }
}

TEST(Bound, Heatmap) {
  const ErrorBoundParams p;
  const auto one = bound_heatmap({1.0}, {25.0}, p);
  EXPECT_EQ(one.values(0, 0), error_bound(1.0, p));

  std::vector<double> ts, tphis;
  for (int i = 1; i <= 10; ++i) ts.push_back(0.2 * i);
  for (int j = 0; j < 8; ++j) tphis.push_back(20.0 + 10.0 * j);
  const auto map = bound_heatmap(ts, tphis, p);
  for (Eigen::Index i = 0; i < map.values.rows(); ++i) {
    for (Eigen::Index j = 1; j < map.values.cols(); ++j) EXPECT_LT(map.values(i, j), map.values(i, j - 1));
  }
  EXPECT_THROW(bound_heatmap({1.0, 0.5}, {25.0}, p), ValidationError);

  std::ostringstream os;
  write_heatmap_csv(os, bound_heatmap({0.5, 1.0}, {25.0, 31.0}, p));
  std::istringstream in(os.str());
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  EXPECT_EQ(header, "t_gate_us\\t_phi_us,25,31");
  EXPECT_EQ(row1.substr(0, 2), "1,");
  EXPECT_NEAR(std::stod(row1.substr(2, row1.find(',', 2) - 2)), 0.0168, 1e-4);
}
