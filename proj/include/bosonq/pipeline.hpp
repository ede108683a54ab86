#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bosonq/config.hpp"

namespace bosonq {

/// A numerical failure tagged with the pipeline stage that raised it.
class StageError : public NumericalError {
 public:
  StageError(const std::string& stage, const std::string& what)
      : NumericalError("stage '" + stage + "' failed: " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct GateAnalysis {
  GateFidelity closed;
  std::optional<GateFidelity> open;
  SusceptibilityReport report;  // r_l and residual filled when open is set
};

/// Closed fidelity and susceptibilities; with `open` also the Lindblad
/// fidelity and the model residual. The same channel set enters r_L and r′.
GateAnalysis analyze_gate(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate,
                          const std::vector<DecoherenceChannel>& channels, bool open,
                          std::vector<SusceptibilityTimecourse>* timecourses = nullptr);

/// F/F0 with a single channel switched on.
double relative_fidelity(const Waveform& wf, const ControlSystem& sys, const LogicalGate& gate,
                         const DecoherenceChannel& channel, double closed_fidelity);

/// Channel susceptibilities of the members of an ensemble.json file.
std::vector<SusceptibilityReport> reports_from_ensemble_json(const nlohmann::json& j);

/// Runs the configured command, writing its artifacts and a manifest into
/// config.out. Progress goes to `log`. Throws ValidationError or StageError.
void run(const RunConfig& config, std::ostream& log);

}  // namespace bosonq
