#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/asymptotics.hpp"
#include "core/estimators.hpp"
#include "core/rng.hpp"
#include "core/trial_design.hpp"

namespace interimkm {

enum class Estimator { kaplan_meier, breslow };

struct SimulationConfig {
  TrialDesign design;
  int replicates = 1000;
  std::uint64_t seed = 1;
  DeltaSpec delta;
  Estimator estimator = Estimator::kaplan_meier;
  /// Worker threads; 0 picks the hardware concurrency.
  int threads = 0;
};

struct ReplicateResult {
  bool ok = false;
  std::string failure;
  double t_hat = 0.0;
  int events = 0;
  std::vector<double> estimates;  // per arm, at t_hat - delta
};

/// Draws one cohort, cuts it at the interim and reads each arm's curve at
/// t_hat - delta (delta in months).
ReplicateResult simulate_replicate(const TrialDesign& design, double delta, Estimator estimator,
                                   CounterStream& rng);

struct ArmSimulationSummary {
  double truth = 0.0;  // S(t_p - delta)
  double mean = 0.0;
  double lower = 0.0;  // empirical alpha/2 quantile
  double upper = 0.0;
  double scaled_variance = 0.0;  // n_arm * var
  std::vector<double> values;    // per successful replicate
};

struct SimulationSummary {
  int replicates = 0;
  int failures = 0;
  std::vector<std::string> failure_messages;
  double t_p = 0.0;
  double delta = 0.0;
  double t_hat_mean = 0.0;
  double t_hat_sd = 0.0;
  double t_hat_min = 0.0;
  double t_hat_max = 0.0;
  std::vector<double> t_hat;
  std::vector<ArmSimulationSummary> arms;
};

using ProgressCallback = std::function<void(int done, int total)>;

/// Runs all replicates; bit-identical for a fixed seed whatever the thread count.
SimulationSummary run_simulation(const SimulationConfig& config,
                                 const ProgressCallback& progress = {});

/// Type-1 empirical quantile: the ceil(q n)-th order statistic.
double empirical_quantile(std::vector<double> values, double q);

struct ArmComparison {
  double diff_center = 0.0;
  double diff_lower = 0.0;
  double diff_upper = 0.0;
  bool boundary = false;  // compared on the clipped scale
  bool compared = false;  // too few replicates resolve the tail quantiles
  bool pass = false;
};

struct AgreementReport {
  double tolerance = 0.0;
  std::vector<ArmComparison> arms;
  bool pass = false;
};

/// Endpoint comparison needs more than `min_replicates` successful
/// replicates; below that the 2.5% order statistic is the sample minimum and
/// the arm is reported as not compared.
AgreementReport compare_to_asymptotics(const SimulationSummary& summary, const InterimPlan& plan,
                                       double tolerance, int min_replicates = 40);

/// Fraction of replicates whose estimate falls inside the arm's interval.
std::vector<double> coverage(const SimulationSummary& summary, const InterimPlan& plan);

}  // namespace interimkm
