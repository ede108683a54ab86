#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bosonq/dynamics.hpp"
#include "bosonq/metrics.hpp"
#include "bosonq/propagator.hpp"

using namespace bosonq;

namespace {

constexpr double kChi = -kTwoPi * 2.0e6;

Waveform random_waveform(int steps, double dt, std::uint64_t seed, double scale = 5.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Waveform wf = zero_waveform(steps, steps * dt);
  for (auto& x : wf.u.reshaped()) x = dist(rng);
  wf.u.row(2) *= 0.2;
  wf.u.row(3) *= 0.2;
  return wf;
}

DensityMatrix excited_superposition(const SpaceDescriptor& space) {
  StateVector psi = StateVector::Zero(space.total_dim());
  psi(space.index(0, 0)) = 1.0 / std::sqrt(2.0);
  psi(space.index(1, 0)) = 1.0 / std::sqrt(2.0);
  return pure_density(psi);
}

}  // namespace

TEST(Channels, JumpOperatorsAndRates) {
  const auto space = make_space(2, 6);
  const DecoherenceRates rates;
  EXPECT_DOUBLE_EQ(rates.rate(ChannelKind::CavityLoss), 1e3);
  EXPECT_DOUBLE_EQ(rates.rate(ChannelKind::TransmonRelaxation), 1e4);
  EXPECT_DOUBLE_EQ(rates.rate(ChannelKind::TransmonDephasing), 4e4);
  EXPECT_DOUBLE_EQ(rates.rate(ChannelKind::TransmonThermal), 100.0);
  EXPECT_EQ(make_channels(space, rates).size(), 4u);
  EXPECT_EQ(make_channels(space, rates, false).size(), 3u);
  DecoherenceRates off;
  off.cavity_lifetime = std::numeric_limits<double>::infinity();
  EXPECT_EQ(make_channels(space, off).size(), 3u);
  DecoherenceRates bad;
  bad.t1 = -1.0;
  EXPECT_THROW(make_channels(space, bad), ValidationError);
  EXPECT_THROW(make_channel(space, ChannelKind::CavityLoss, -1.0), ValidationError);

  const Operator deph = jump_operator(space, ChannelKind::TransmonDephasing);
  EXPECT_NEAR((deph.adjoint() * deph - 0.5 * space.identity()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  const Operator relax = jump_operator(space, ChannelKind::TransmonRelaxation);
  EXPECT_EQ(relax(space.index(0, 2), space.index(1, 2)), Complex(1.0));
}

TEST(Closed, ZeroWaveformIsStationaryInGroundSector) {
  const auto space = make_space(2, 20);
  StateVector psi = StateVector::Zero(space.total_dim());
  psi(space.index(0, 0)) = 1.0 / std::sqrt(2.0);
  psi(space.index(0, 4)) = 1.0 / std::sqrt(2.0);
  const Trajectory traj = propagate_closed(zero_waveform(50, 1e-7), space, kChi, psi, 10);
  ASSERT_EQ(traj.times.size(), 6u);
  for (const auto& s : traj.states) EXPECT_NEAR((s - psi).norm(), 0.0, 1e-13);
  for (double n : traj.mean_photon) EXPECT_NEAR(n, 2.0, 1e-12);
  for (double e : traj.entropy) EXPECT_NEAR(e, 0.0, 1e-9);
}

TEST(Closed, ExcitedFockStatePicksUpDispersivePhase) {
  const auto space = make_space(2, 10);
  const StateVector psi = product_state(space, 1, fock_state(10, 1));
  const double t = 0.37e-6;
  const Trajectory traj = propagate_closed(zero_waveform(37, t), space, kChi, psi, 37);
  const Complex expected = std::exp(-kI * kChi * t);
  EXPECT_NEAR(std::abs(traj.states.back()(space.index(1, 1)) - expected), 0.0, 1e-10);
}

TEST(Closed, FinalStateMatchesTotalPropagatorAndKeepsNorm) {
  const auto space = make_space(2, 12);
  const ControlSystem sys(space, kChi);
  const Waveform wf = random_waveform(500, 2e-9, 1);
  StateVector psi0 = product_state(space, 0, fock_state(12, 1));
  const Trajectory traj = propagate_closed(wf, sys, psi0, 100);
  const Operator u = total_propagator(sys, wf);
  EXPECT_LT((traj.states.back() - u * psi0).norm(), 1e-10);
  EXPECT_LT(std::abs(traj.states.back().norm() - 1.0), 1e-10);
  EXPECT_LT(unitarity_defect(u), 1e-9);
  for (std::size_t i = 1; i < traj.times.size(); ++i) EXPECT_GT(traj.times[i], traj.times[i - 1]);
}

TEST(Closed, RejectsUnnormalizedInputAndTruncationLeak) {
  const auto space = make_space(2, 8);
  StateVector psi = StateVector::Zero(space.total_dim());
  psi(0) = 2.0;
  EXPECT_THROW(propagate_closed(zero_waveform(4, 1e-8), space, kChi, psi), ValidationError);
  const StateVector top = product_state(space, 0, fock_state(8, 7));
  EXPECT_THROW(propagate_closed(zero_waveform(4, 1e-8), space, kChi, top), TruncationError);
}

// Analytic decay oracles, each checked at one lifetime.
TEST(Open, CavityLossMatchesExponential) {
  const auto space = make_space(2, 6);
  const double kappa = 1e6;
  const auto rho0 = pure_density(product_state(space, 0, fock_state(6, 1)));
  const Trajectory traj = propagate_open(zero_waveform(200, 1.0 / kappa), ControlSystem(space, kChi), rho0,
                                         {make_channel(space, ChannelKind::CavityLoss, kappa)}, 200);
  EXPECT_NEAR(traj.mean_photon.back() / std::exp(-1.0), 1.0, 1e-5);
}

TEST(Open, RelaxationMatchesExponential) {
  const auto space = make_space(2, 4);
  const double t1 = 2e-6;
  const auto rho0 = pure_density(product_state(space, 1, fock_state(4, 0)));
  const Trajectory traj = propagate_open(zero_waveform(200, t1), ControlSystem(space, kChi), rho0,
                                         {make_channel(space, ChannelKind::TransmonRelaxation, 1.0 / t1)}, 200);
  EXPECT_NEAR(traj.transmon_excitation.back() / std::exp(-1.0), 1.0, 1e-5);
}

TEST(Open, CoherenceMatchesT2) {
  const auto space = make_space(2, 4);
  const double t1 = 3e-6, tphi = 2e-6, t = 2e-6;
  const std::vector<DecoherenceChannel> ch{make_channel(space, ChannelKind::TransmonRelaxation, 1.0 / t1),
                                           make_channel(space, ChannelKind::TransmonDephasing, 1.0 / tphi)};
  const Trajectory traj =
      propagate_open(zero_waveform(200, t), ControlSystem(space, kChi), excited_superposition(space), ch, 200);
  const double coherence = std::abs(traj.densities.back()(space.index(0, 0), space.index(1, 0)));
  EXPECT_NEAR(coherence / (0.5 * std::exp(-t * (0.5 / t1 + 1.0 / tphi))), 1.0, 1e-5);
}

TEST(Open, ZeroRatesReproduceClosedEvolution) {
  const auto space = make_space(2, 12);
  const ControlSystem sys(space, kChi);
  const Waveform wf = random_waveform(200, 2e-9, 7);
  const StateVector psi0 = product_state(space, 0, fock_state(12, 2));
  const Trajectory closed = propagate_closed(wf, sys, psi0, 200);
  const Trajectory open = propagate_open(wf, sys, pure_density(psi0), {}, 200);
  EXPECT_NEAR(state_fidelity(closed.states.back(), open.densities.back()), 1.0, 1e-8);
  std::vector<DecoherenceChannel> zero{make_channel(space, ChannelKind::CavityLoss, 0.0)};
  const Trajectory open0 = propagate_open(wf, sys, pure_density(psi0), zero, 200);
  EXPECT_NEAR(state_fidelity(closed.states.back(), open0.densities.back()), 1.0, 1e-8);
}

TEST(Open, TraceAndPositivityPreserved) {
  const auto space = make_space(2, 12);
  const ControlSystem sys(space, kChi);
  const Waveform wf = random_waveform(250, 2e-9, 3);
  const auto ch = make_channels(space, DecoherenceRates{1e-5, 1e-6, 1e-6, 0.05});
  const Trajectory traj = propagate_open(wf, sys, excited_superposition(space), ch, 50);
  for (const auto& rho : traj.densities) {
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-7);
    EXPECT_NO_THROW(validate_density_matrix(rho));
  }
}

TEST(Open, SubstepRefinementConverges) {
  const auto space = make_space(2, 12);
  const ControlSystem sys(space, kChi);
  const Waveform wf = random_waveform(100, 2e-9, 9);
  const auto ch = make_channels(space, DecoherenceRates{1e-5, 2e-6, 2e-6, 0.05});
  const auto rho0 = excited_superposition(space);
  OpenOptions fine;
  fine.substeps = 32;
  const auto a = propagate_open(wf, sys, rho0, ch, 100).densities.back();
  const auto b = propagate_open(wf, sys, rho0, ch, 100, fine).densities.back();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(GateFidelity, ExactTargetAndIdentityWaveform) {
  const auto space = make_space(2, 16);
  const auto code = build_code({CodeKind::Bin11, 0.0}, 16);
  const ControlSystem sys(space, kChi);
  const auto ident = logical_unitary(code, space, {GateKind::Identity, 0.0});
  EXPECT_NEAR(gate_fidelity_closed(zero_waveform(20, 4e-8), sys, ident).error, 0.0, 1e-14);
  // Six-state average of |⟨ψ|H|ψ⟩|² is 1/3, so r0 = 2/3.
  const auto had = logical_unitary(code, space, {GateKind::Hadamard, 0.0});
  EXPECT_NEAR(gate_fidelity_closed(zero_waveform(20, 4e-8), sys, had).error, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(gate_fidelity_open(zero_waveform(20, 4e-8), sys, had, {}).error, 2.0 / 3.0, 1e-12);
}

TEST(GateFidelity, OpenEqualsClosedAtZeroRates) {
  const auto space = make_space(2, 16);
  const auto code = build_code({CodeKind::Bin11, 0.0}, 16);
  const ControlSystem sys(space, kChi);
  const auto gate = logical_unitary(code, space, {GateKind::Hadamard, 0.0});
  const Waveform wf = random_waveform(150, 2e-9, 4, 3.0);
  const double r0 = gate_fidelity_closed(wf, sys, gate).error;
  const auto zero = make_channels(space, DecoherenceRates{std::numeric_limits<double>::infinity(),
                                                          std::numeric_limits<double>::infinity(),
                                                          std::numeric_limits<double>::infinity(), 0.0});
  EXPECT_TRUE(zero.empty());
  EXPECT_NEAR(gate_fidelity_open(wf, sys, gate, zero).error, r0, 1e-8);
}

TEST(GateFidelity, MonotoneInEveryRate) {
  // A 2π transmon rotation without dispersive shift is a logical identity
  // that passes through |e⟩, so every channel acts on it.
  const auto space = make_space(2, 16);
  const auto code = build_code({CodeKind::Bin11, 0.0}, 16);
  const ControlSystem sys(space, 0.0);
  const auto gate = logical_unitary(code, space, {GateKind::Identity, 0.0});
  Waveform wf = zero_waveform(50, 100e-9);
  wf.u.row(0).setConstant(10.0);
  ASSERT_NEAR(gate_fidelity_closed(wf, sys, gate).error, 0.0, 1e-12);
  for (ChannelKind kind : kAllChannels) {
    double previous = 2.0;
    for (double rate : {1e4, 1e5, 1e6}) {
      const double f = gate_fidelity_open(wf, sys, gate, {make_channel(space, kind, rate)}).fidelity;
      EXPECT_LE(f, previous + 1e-12) << channel_name(kind);
      previous = f;
    }
  }
}

TEST(Export, TrajectoryCsvAndReport) {
  const auto space = make_space(2, 8);
  const StateVector psi = product_state(space, 0, fock_state(8, 1));
  const Trajectory traj = propagate_closed(zero_waveform(4, 8e-9), space, kChi, psi, 2);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t_ns,mean_photon,transmon_excitation,entropy");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  GateFidelity closed{0.99, 0.01, {}};
  const auto j = fidelity_report_json(closed, &closed, make_channels(space, DecoherenceRates{}));
  EXPECT_DOUBLE_EQ(j["r0"].get<double>(), 0.01);
  EXPECT_DOUBLE_EQ(j["rates_per_s"]["transmon_dephasing"].get<double>(), 4e4);
}
