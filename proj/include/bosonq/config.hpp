#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bosonq/codes.hpp"
#include "bosonq/dynamics.hpp"
#include "bosonq/error_model.hpp"
#include "bosonq/grape.hpp"

namespace bosonq {

enum class Command { Optimize, Evaluate, Susceptibility, Ensemble, Bound, Trajectory };

std::string command_name(Command c);
Command parse_command(const std::string& name);

/// Lifetimes in µs; an absent (null) lifetime switches the channel off.
struct RateConfig {
  std::optional<double> t1_us = 100.0;
  std::optional<double> t_phi_us = 25.0;
  std::optional<double> cavity_lifetime_us = 1000.0;
  double n_th = 0.01;
  bool include_thermal = false;

  DecoherenceRates to_rates() const;
};

struct EnsembleConfig {
  int count = 3;
  std::vector<double> gate_times_us{1.0};
  int histogram_bins = 20;
  double max_gate_error = 1e-3;  // members above this Ψ1 are reported but excluded from statistics
  bool single_channel = false;   // extra F/F0 runs with one channel at a time
  double loss_only_lifetime_us = 500.0;
  double relax_only_t1_us = 100.0;
};

struct BoundConfig {
  std::vector<double> gate_times_us;
  std::vector<double> t_phis_us;
  std::optional<double> decay_per_us;  // default: per-code constant
  double s_relax = 0.25;
  double s_dep = 0.31;
  double s_loss_per_photon = 0.94;
  std::string from_ensemble;  // ensemble.json whose minima replace the constants
};

struct TrajectoryConfig {
  int state = 2;  // cardinal index, 2 = (|0_L⟩ + |1_L⟩)/√2
  int stride = 5;
  bool open = false;
  int wigner_snapshots = 3;
  double wigner_extent = 4.0;
  int wigner_points = 81;
};

struct RunConfig {
  Command command = Command::Optimize;
  CodeSpec code;
  GateSpec gate;
  double gate_time_us = 1.0;
  int transmon_dim = 2;
  int cavity_dim = 30;
  double chi_mhz = -2.0;  // χ/2π
  std::string preset = "standard";
  ConstraintPreset constraints = standard_preset();
  int fourier_terms = 0;
  PenaltyWeights weights;
  StopCriteria stop;
  RateConfig rates;
  int restarts = 1;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out = "out";
  std::string params;  // pulse parameter file for evaluate / susceptibility / trajectory
  bool open = true;    // evaluate / susceptibility also run the Lindblad evaluation
  EnsembleConfig ensemble;
  BoundConfig bound;
  TrajectoryConfig trajectory;

  nlohmann::json echo;  // merged configuration as read

  SpaceDescriptor space() const { return make_space(transmon_dim, cavity_dim); }
  double chi() const { return chi_mhz * kMHzToRadPerSecond; }
  OptimizationProblem problem(double gate_time_us) const;
};

struct Diagnostic {
  std::string field;
  std::string message;
  int line = 0;  // 1-based line in the config file; 0 when unknown or set on the command line

  std::string to_string(const std::string& file = {}) const;
};

/// Values given on the command line. They sit on top of the file.
struct CliOverrides {
  std::optional<Command> command;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<std::string> preset;
  std::vector<std::pair<std::string, std::string>> sets;  // dotted.path=value
};

nlohmann::json default_config_json();
/// Constraint block of a named preset.
nlohmann::json preset_json(const std::string& name);

struct LoadResult {
  std::optional<RunConfig> config;  // set iff diagnostics is empty
  std::vector<Diagnostic> diagnostics;
};

/// defaults ← preset ← file ← command line, then schema and range checks.
/// `file_text` is the config file content (may be empty).
LoadResult load_config(const std::string& file_text, const CliOverrides& cli = {});
/// Reads the file first; an unreadable file throws ValidationError.
LoadResult load_config_file(const std::string& path, const CliOverrides& cli = {});

}  // namespace bosonq
