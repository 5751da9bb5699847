#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/asymptotics.hpp"
#include "core/errors.hpp"
#include "core/simulator.hpp"
#include "core/trial_design.hpp"

namespace interimkm {

struct Diagnostic {
  std::string path;  // JSON pointer into the request
  std::string message;
};

/// Rejected configuration, with one diagnostic per offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

struct ScenarioConfig {
  std::string id;
  SurvivalModel control = SurvivalModel::exponential(1.0);
  std::optional<SurvivalModel> experimental;
  std::optional<double> hazard_ratio;
  double allocation = 0.5;  // share of patients in the control arm
  std::optional<double> accrual_rate;
  std::optional<double> accrual_duration;
  std::optional<int> n_total;
  std::optional<double> truncate_at;
  double accrual_step = 1.0;
  std::optional<double> fu_after_last;
  double alpha = 0.05;
  double power = 0.8;
  std::optional<int> total_events;
  std::optional<double> information_fraction;
  std::optional<double> p;
  std::optional<int> p_decimals = 2;
  std::vector<double> deltas;
  DeltaSpec::Mode delta_mode = DeltaSpec::Mode::relative;
  double interval_alpha = 0.05;
  int replicates = 1000;
  std::uint64_t seed = 1;
  Estimator estimator = Estimator::kaplan_meier;
};

/// Parses either a single scenario object or {"scenarios": [...]}.
std::vector<ScenarioConfig> parse_scenarios(const std::string& json_text);

TrialDesign build_design(const ScenarioConfig& config);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  double tolerance = 0.03;
  bool clip_bounds = false;
  int threads = 0;
  bool dump = false;
  int max_replicates = 0;  // 0 means unlimited
  ProgressCallback progress;
};

struct Report {
  std::string json;
  std::string csv;
  std::string dump_csv;  // per-replicate values, simulate only
  bool pass = true;
};

Report design_report(const std::vector<ScenarioConfig>& scenarios);
Report plan_report(const std::vector<ScenarioConfig>& scenarios, const RunOptions& options);
Report simulate_report(const std::vector<ScenarioConfig>& scenarios, const RunOptions& options);

/// Total replicates a simulate request would run.
long long requested_replicates(const std::vector<ScenarioConfig>& scenarios,
                               const RunOptions& options);

}  // namespace interimkm
