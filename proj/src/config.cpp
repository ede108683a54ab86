#include "bosonq/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

namespace bosonq {

using nlohmann::json;

std::string command_name(Command c) {
  switch (c) {
    case Command::Optimize: return "optimize";
    case Command::Evaluate: return "evaluate";
    case Command::Susceptibility: return "susceptibility";
    case Command::Ensemble: return "ensemble";
    case Command::Bound: return "bound";
    case Command::Trajectory: return "trajectory";
  }
  return "optimize";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::Optimize, Command::Evaluate, Command::Susceptibility, Command::Ensemble,
                    Command::Bound, Command::Trajectory}) {
    if (command_name(c) == name) return c;
  }
  throw ValidationError("unknown command '" + name + "'");
}

DecoherenceRates RateConfig::to_rates() const {
  constexpr double kOff = std::numeric_limits<double>::infinity();
  DecoherenceRates r;
  r.t1 = t1_us ? *t1_us * kMicro : kOff;
  r.t_phi = t_phi_us ? *t_phi_us * kMicro : kOff;
  r.cavity_lifetime = cavity_lifetime_us ? *cavity_lifetime_us * kMicro : kOff;
  r.n_th = n_th;
  return r;
}

OptimizationProblem RunConfig::problem(double t_us) const {
  const SpaceDescriptor s = space();
  return make_problem(s, chi(), build_code(code, cavity_dim), gate, t_us * kMicro, constraints, weights, stop,
                      fourier_terms);
}

std::string Diagnostic::to_string(const std::string& file) const {
  std::ostringstream os;
  if (!file.empty() && line > 0) {
    os << file << ':' << line << ": ";
  } else if (line > 0) {
    os << "line " << line << ": ";
  }
  os << field << ": " << message;
  return os.str();
}

namespace {

std::vector<double> axis(double lo, double hi, double step) {
  std::vector<double> v;
  const int n = static_cast<int>(std::round((hi - lo) / step));
  for (int i = 0; i <= n; ++i) v.push_back(std::round((lo + i * step) * 1e6) / 1e6);
  return v;
}

using Problems = std::vector<std::pair<std::string, std::string>>;

// Recursive overlay; unlike merge_patch a null value is kept (it means "off").
// Keys absent from the base are reported, not added.
void overlay(json& base, const json& patch, const std::string& prefix, Problems& problems,
             std::vector<std::string>* touched) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) {
      problems.emplace_back(path, "unknown field");
      continue;
    }
    json& slot = base[it.key()];
    if (slot.is_object() != it->is_object()) {
      problems.emplace_back(path, slot.is_object() ? "expected an object" : "unexpected object");
    } else if (slot.is_object()) {
      overlay(slot, *it, path, problems, touched);
    } else {
      slot = *it;
      if (touched) touched->push_back(path);
    }
  }
}

int line_of(const std::string& text, const std::string& path) {
  const std::string key = "\"" + path.substr(path.rfind('.') == std::string::npos ? 0 : path.rfind('.') + 1) + "\"";
  const auto pos = text.find(key);
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class Reader {
 public:
  Reader(const json& root, const std::string& text, const std::set<std::string>& cli_paths,
         std::vector<Diagnostic>& diags)
      : root_(root), text_(text), cli_(cli_paths), diags_(diags) {}

  void error(const std::string& path, const std::string& message) {
    if (!failed_.insert(path).second) return;  // one diagnostic per field
    diags_.push_back({path, message, cli_.count(path) ? 0 : line_of(text_, path)});
  }

  const json& node(const std::string& path) const {
    const json* n = &root_;
    std::istringstream parts(path);
    for (std::string part; std::getline(parts, part, '.');) n = &n->at(part);
    return *n;
  }

  double number(const std::string& path) {
    const json& n = node(path);
    if (!n.is_number()) {
      error(path, "expected a number");
      return std::numeric_limits<double>::quiet_NaN();
    }
    return n.get<double>();
  }

  std::optional<double> nullable(const std::string& path) {
    if (node(path).is_null()) return std::nullopt;
    return number(path);
  }

  int integer(const std::string& path) {
    const json& n = node(path);
    if (!n.is_number_integer()) {
      error(path, "expected an integer");
      return 0;
    }
    return n.get<int>();
  }

  bool boolean(const std::string& path) {
    const json& n = node(path);
    if (!n.is_boolean()) {
      error(path, "expected true or false");
      return false;
    }
    return n.get<bool>();
  }

  std::string string(const std::string& path) {
    const json& n = node(path);
    if (!n.is_string()) {
      error(path, "expected a string");
      return {};
    }
    return n.get<std::string>();
  }

  std::vector<double> numbers(const std::string& path) {
    const json& n = node(path);
    std::vector<double> out;
    if (!n.is_array()) {
      error(path, "expected an array of numbers");
      return out;
    }
    for (const auto& x : n) {
      if (!x.is_number()) {
        error(path, "expected an array of numbers");
        return {};
      }
      out.push_back(x.get<double>());
    }
    return out;
  }

  void positive(const std::string& path, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) error(path, "must be positive");
  }
  void non_negative(const std::string& path, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) error(path, "must be non-negative");
  }
  void at_least(const std::string& path, int v, int lo) {
    if (v < lo) error(path, "must be at least " + std::to_string(lo));
  }
  void increasing(const std::string& path, const std::vector<double>& v) {
    if (v.empty()) {
      error(path, "must not be empty");
      return;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0) || (i > 0 && !(v[i] > v[i - 1]))) {
        error(path, "must be positive and strictly increasing");
        return;
      }
    }
  }
  void readable(const std::string& path, const std::string& file) {
    if (!std::ifstream(file)) error(path, "cannot read '" + file + "'");
  }

 private:
  const json& root_;
  const std::string& text_;
  const std::set<std::string>& cli_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> failed_;
};

json parse_cli_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

json cli_patch(const std::string& path, json value) {
  json patch = std::move(value);
  std::vector<std::string> parts;
  std::istringstream in(path);
  for (std::string p; std::getline(in, p, '.');) parts.push_back(p);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  return patch;
}

RunConfig read_config(const json& root, Reader& r) {
  RunConfig c;
  c.echo = root;
  try {
    c.command = parse_command(r.string("command"));
  } catch (const ValidationError& e) {
    r.error("command", e.what());
  }

  try {
    c.code.kind = parse_code_kind(r.string("code.kind"));
  } catch (const ValidationError& e) {
    r.error("code.kind", e.what());
  }
  c.code.alpha = r.number("code.alpha");
  if (c.code.kind == CodeKind::Cat4) r.positive("code.alpha", c.code.alpha.real());
  try {
    c.gate.kind = parse_gate_kind(r.string("gate.kind"));
  } catch (const ValidationError& e) {
    r.error("gate.kind", e.what());
  }
  c.gate.phase_angle = r.number("gate.phase_angle");
  c.gate_time_us = r.number("gate_time_us");
  r.positive("gate_time_us", c.gate_time_us);

  c.transmon_dim = r.integer("space.transmon_dim");
  r.at_least("space.transmon_dim", c.transmon_dim, 2);
  c.cavity_dim = r.integer("space.cavity_dim");
  r.at_least("space.cavity_dim", c.cavity_dim, 2);
  c.chi_mhz = r.number("space.chi_mhz");
  if (!std::isfinite(c.chi_mhz)) r.error("space.chi_mhz", "must be finite");

  c.preset = r.string("preset");
  c.constraints.name = c.preset;
  const double f_max = r.number("constraints.f_max_mhz");
  const double dt = r.number("constraints.dt_ns");
  r.positive("constraints.f_max_mhz", f_max);
  r.positive("constraints.dt_ns", dt);
  c.constraints.f_max = f_max * kMHz;
  c.constraints.dt = dt * kNano;
  const auto u_max = r.numbers("constraints.u_max_mhz");
  if (u_max.size() != kNumControls) {
    r.error("constraints.u_max_mhz", "expected four values (transmon I, Q, cavity I, Q)");
  } else {
    for (std::size_t k = 0; k < kNumControls; ++k) {
      c.constraints.u_max_mhz[k] = u_max[k];
      r.positive("constraints.u_max_mhz", u_max[k]);
    }
  }
  c.fourier_terms = r.integer("constraints.fourier_terms");
  r.at_least("constraints.fourier_terms", c.fourier_terms, 0);

  c.weights.gate_error = r.number("penalties.c1");
  c.weights.amplitude = r.number("penalties.c2");
  c.weights.boundary = r.number("penalties.c3");
  r.non_negative("penalties.c1", c.weights.gate_error);
  r.non_negative("penalties.c2", c.weights.amplitude);
  r.non_negative("penalties.c3", c.weights.boundary);
  c.stop.max_iterations = r.integer("stop.max_iterations");
  r.at_least("stop.max_iterations", c.stop.max_iterations, 0);
  c.stop.gradient_tolerance = r.number("stop.gradient_tolerance");
  r.non_negative("stop.gradient_tolerance", c.stop.gradient_tolerance);
  c.stop.target_gate_error = r.number("stop.target_gate_error");
  r.non_negative("stop.target_gate_error", c.stop.target_gate_error);

  for (auto [name, slot] : {std::pair{"rates.t1_us", &c.rates.t1_us}, std::pair{"rates.t_phi_us", &c.rates.t_phi_us},
                            std::pair{"rates.cavity_lifetime_us", &c.rates.cavity_lifetime_us}}) {
    *slot = r.nullable(name);
    if (*slot) r.positive(name, **slot);
  }
  c.rates.n_th = r.number("rates.n_th");
  r.non_negative("rates.n_th", c.rates.n_th);
  c.rates.include_thermal = r.boolean("rates.include_thermal");

  c.restarts = r.integer("restarts");
  r.at_least("restarts", c.restarts, 1);
  c.jobs = r.integer("jobs");
  r.at_least("jobs", c.jobs, 1);
  const json& seed = r.node("seed");
  if (seed.is_number_unsigned()) {
    c.seed = seed.get<std::uint64_t>();
  } else if (!seed.is_null()) {
    r.error("seed", "expected a non-negative integer");
  }
  c.out = r.string("out");
  if (c.out.empty()) r.error("out", "must not be empty");
  c.params = r.string("params");
  c.open = r.boolean("open");

  c.ensemble.count = r.integer("ensemble.count");
  r.at_least("ensemble.count", c.ensemble.count, 1);
  c.ensemble.gate_times_us = r.numbers("ensemble.gate_times_us");
  r.increasing("ensemble.gate_times_us", c.ensemble.gate_times_us);
  c.ensemble.histogram_bins = r.integer("ensemble.histogram_bins");
  r.at_least("ensemble.histogram_bins", c.ensemble.histogram_bins, 1);
  c.ensemble.max_gate_error = r.number("ensemble.max_gate_error");
  r.positive("ensemble.max_gate_error", c.ensemble.max_gate_error);
  c.ensemble.single_channel = r.boolean("ensemble.single_channel");
  c.ensemble.loss_only_lifetime_us = r.number("ensemble.loss_only_lifetime_us");
  r.positive("ensemble.loss_only_lifetime_us", c.ensemble.loss_only_lifetime_us);
  c.ensemble.relax_only_t1_us = r.number("ensemble.relax_only_t1_us");
  r.positive("ensemble.relax_only_t1_us", c.ensemble.relax_only_t1_us);

  c.bound.gate_times_us = r.numbers("bound.gate_times_us");
  r.increasing("bound.gate_times_us", c.bound.gate_times_us);
  c.bound.t_phis_us = r.numbers("bound.t_phis_us");
  r.increasing("bound.t_phis_us", c.bound.t_phis_us);
  c.bound.decay_per_us = r.nullable("bound.decay_per_us");
  if (c.bound.decay_per_us) r.positive("bound.decay_per_us", *c.bound.decay_per_us);
  c.bound.s_relax = r.number("bound.s_relax");
  c.bound.s_dep = r.number("bound.s_dep");
  c.bound.s_loss_per_photon = r.number("bound.s_loss_per_photon");
  r.positive("bound.s_relax", c.bound.s_relax);
  r.positive("bound.s_dep", c.bound.s_dep);
  r.positive("bound.s_loss_per_photon", c.bound.s_loss_per_photon);
  c.bound.from_ensemble = r.string("bound.from_ensemble");

  c.trajectory.state = r.integer("trajectory.state");
  if (c.trajectory.state < 0 || c.trajectory.state > 5) r.error("trajectory.state", "must be a cardinal index 0..5");
  c.trajectory.stride = r.integer("trajectory.stride");
  r.at_least("trajectory.stride", c.trajectory.stride, 1);
  c.trajectory.open = r.boolean("trajectory.open");
  c.trajectory.wigner_snapshots = r.integer("trajectory.wigner_snapshots");
  r.at_least("trajectory.wigner_snapshots", c.trajectory.wigner_snapshots, 0);
  c.trajectory.wigner_extent = r.number("trajectory.wigner_extent");
  r.positive("trajectory.wigner_extent", c.trajectory.wigner_extent);
  c.trajectory.wigner_points = r.integer("trajectory.wigner_points");
  r.at_least("trajectory.wigner_points", c.trajectory.wigner_points, 2);
  return c;
}

// Checks that need several fields at once, run only when the fields parsed.
void cross_check(const RunConfig& c, Reader& r) {
  try {
    build_code(c.code, c.cavity_dim);
  } catch (const ValidationError& e) {
    r.error("space.cavity_dim", e.what());
  }
  auto pulse_ok = [&](double t_us, const std::string& field) {
    try {
      make_pulse_params(c.constraints.f_max, t_us * kMicro, c.constraints.dt, c.fourier_terms);
    } catch (const ValidationError& e) {
      r.error(field, e.what());
    }
  };
  const bool needs_seed = c.command == Command::Optimize || c.command == Command::Ensemble;
  if (needs_seed && !c.seed) r.error("seed", "a seed is required for " + command_name(c.command));
  if (c.command == Command::Optimize) pulse_ok(c.gate_time_us, "gate_time_us");
  if (c.command == Command::Ensemble) {
    for (double t : c.ensemble.gate_times_us) pulse_ok(t, "ensemble.gate_times_us");
  }
  const bool needs_params = c.command == Command::Evaluate || c.command == Command::Susceptibility ||
                            c.command == Command::Trajectory;
  if (needs_params) {
    if (c.params.empty()) {
      r.error("params", "a pulse parameter file is required for " + command_name(c.command));
    } else {
      r.readable("params", c.params);
    }
  }
  if (c.command == Command::Bound && !c.bound.from_ensemble.empty()) {
    r.readable("bound.from_ensemble", c.bound.from_ensemble);
  }
}

}  // namespace

json preset_json(const std::string& name) {
  const ConstraintPreset p = preset_by_name(name);
  return {{"f_max_mhz", p.f_max / kMHz},
          {"dt_ns", p.dt / kNano},
          {"u_max_mhz", std::vector<double>(p.u_max_mhz.begin(), p.u_max_mhz.end())}};
}

json default_config_json() {
  json constraints = preset_json("standard");
  constraints["fourier_terms"] = 0;
  return {
      {"command", "optimize"},
      {"code", {{"kind", "bin11"}, {"alpha", std::sqrt(3.0)}}},
      {"gate", {{"kind", "hadamard"}, {"phase_angle", 0.0}}},
      {"gate_time_us", 1.0},
      {"space", {{"transmon_dim", 2}, {"cavity_dim", 30}, {"chi_mhz", -2.0}}},
      {"preset", "standard"},
      {"constraints", constraints},
      {"penalties", {{"c1", 1.0}, {"c2", 1e-4}, {"c3", 1e-3}}},
      {"stop", {{"max_iterations", 2000}, {"gradient_tolerance", 1e-9}, {"target_gate_error", 1e-4}}},
      {"rates",
       {{"t1_us", 100.0},
        {"t_phi_us", 25.0},
        {"cavity_lifetime_us", 1000.0},
        {"n_th", 0.01},
        {"include_thermal", false}}},
      {"restarts", 1},
      {"seed", nullptr},
      {"jobs", 1},
      {"out", "out"},
      {"params", ""},
      {"open", true},
      {"ensemble",
       {{"count", 3},
        {"gate_times_us", {1.0}},
        {"histogram_bins", 20},
        {"max_gate_error", 1e-3},
        {"single_channel", false},
        {"loss_only_lifetime_us", 500.0},
        {"relax_only_t1_us", 100.0}}},
      {"bound",
       {{"gate_times_us", axis(0.2, 2.0, 0.05)},
        {"t_phis_us", axis(10.0, 100.0, 1.0)},
        {"decay_per_us", nullptr},
        {"s_relax", 0.25},
        {"s_dep", 0.31},
        {"s_loss_per_photon", 0.94},
        {"from_ensemble", ""}}},
      {"trajectory",
       {{"state", 2},
        {"stride", 5},
        {"open", false},
        {"wigner_snapshots", 3},
        {"wigner_extent", 4.0},
        {"wigner_points", 81}}},
  };
}

LoadResult load_config(const std::string& text, const CliOverrides& cli) {
  LoadResult result;
  auto& diags = result.diagnostics;

  json file = json::object();
  if (!text.empty()) {
    try {
      file = json::parse(text);
    } catch (const json::parse_error& e) {
      diags.push_back({"(syntax)", e.what(), line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)});
      return result;
    }
    if (!file.is_object()) {
      diags.push_back({"(root)", "config must be a JSON object", 1});
      return result;
    }
  }

  json merged = default_config_json();
  std::string preset = "standard";
  if (file.contains("preset") && file["preset"].is_string()) preset = file["preset"].get<std::string>();
  if (cli.preset) preset = *cli.preset;
  std::set<std::string> cli_paths;
  try {
    Problems unused;
    overlay(merged["constraints"], preset_json(preset), "constraints", unused, nullptr);
  } catch (const ValidationError& e) {
    diags.push_back({"preset", e.what(), cli.preset ? 0 : line_of(text, "preset")});
  }

  Problems problems;
  overlay(merged, file, "", problems, nullptr);
  for (const auto& [path, msg] : problems) diags.push_back({path, msg, line_of(text, path)});

  json patch = json::object();
  if (cli.command) patch["command"] = command_name(*cli.command);
  if (cli.seed) patch["seed"] = *cli.seed;
  if (cli.jobs) patch["jobs"] = *cli.jobs;
  if (cli.out) patch["out"] = *cli.out;
  if (cli.preset) patch["preset"] = *cli.preset;
  std::vector<std::string> touched;
  Problems cli_problems;
  overlay(merged, patch, "", cli_problems, &touched);
  for (const auto& [path, value] : cli.sets) {
    overlay(merged, cli_patch(path, parse_cli_value(value)), "", cli_problems, &touched);
  }
  for (const auto& [path, msg] : cli_problems) diags.push_back({path, msg + " (command line)", 0});
  cli_paths.insert(touched.begin(), touched.end());
  if (!diags.empty()) return result;

  Reader reader(merged, text, cli_paths, diags);
  RunConfig config = read_config(merged, reader);
  if (diags.empty()) cross_check(config, reader);
  if (diags.empty()) result.config = std::move(config);
  return result;
}

LoadResult load_config_file(const std::string& path, const CliOverrides& cli) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return load_config(text.str(), cli);
}

}  // namespace bosonq
