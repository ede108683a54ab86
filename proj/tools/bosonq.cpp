#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bosonq/config.hpp"
#include "bosonq/io.hpp"
#include "bosonq/pipeline.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<std::string> preset;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "base seed (required for optimize and ensemble)");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--preset", o.preset, "constraint preset")->check(CLI::IsMember({"standard", "weak"}));
  cmd->add_option("--set", o.sets, "override a config field, e.g. --set rates.t1_us=80");
}

int print_diagnostics(const std::vector<bosonq::Diagnostic>& diags, const std::string& file) {
  for (const auto& d : diags) std::cerr << d.to_string(file) << '\n';
  return diags.empty() ? 0 : kExitValidation;
}

bosonq::LoadResult load(const Options& o, std::optional<bosonq::Command> command) {
  bosonq::CliOverrides cli;
  cli.command = command;
  cli.seed = o.seed;
  cli.jobs = o.jobs;
  cli.out = o.out;
  cli.preset = o.preset;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw bosonq::ValidationError("--set expects key=value, got '" + s + "'");
    cli.sets.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return o.config.empty() ? bosonq::load_config("", cli) : bosonq::load_config_file(o.config, cli);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse optimization and error budgets for bosonic qubits"};
  app.set_version_flag("--version", bosonq::tool_version());
  app.require_subcommand(1);

  Options opts;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"optimize", "optimize a gate with seeded random restarts"},
      {"evaluate", "closed and Lindblad gate fidelity of a pulse"},
      {"susceptibility", "per-channel error susceptibilities and model residual"},
      {"ensemble", "optimize and analyze an ensemble of gates"},
      {"bound", "achievable-error bound over gate time and dephasing time"},
      {"trajectory", "time evolution diagnostics and Wigner snapshots"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    subs.push_back(app.add_subcommand(name, help));
    add_common(subs.back(), opts);
  }
  CLI::App* validate = app.add_subcommand("validate", "check a configuration without running it");
  add_common(validate, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const auto result = load(opts, std::nullopt);
      const int code = print_diagnostics(result.diagnostics, opts.config);
      if (code == 0) std::cout << "ok\n";
      return code;
    }
    std::optional<bosonq::Command> command;
    for (auto* sub : subs) {
      if (sub->parsed()) command = bosonq::parse_command(sub->get_name());
    }
    const auto result = load(opts, command);
    if (!result.config) return print_diagnostics(result.diagnostics, opts.config);
    bosonq::run(*result.config, std::cerr);
    return 0;
  } catch (const bosonq::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const bosonq::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
