#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "core/calendar_model.hpp"
#include "core/survival_models.hpp"

namespace interimkm {

/// A fully specified two-arm (or one-arm) trial and its interim trigger.
struct TrialDesign {
  std::vector<ArmSpec> arms;  // arm 0 is the control arm A
  std::vector<int> arm_sizes;
  AccrualModel accrual{0.0};
  /// Follow-up after the last entry; unset means the trial never stops.
  std::optional<double> fu_after_last;
  double alpha = 0.05;
  double power = 0.8;
  std::optional<double> hazard_ratio;
  /// Events planned for the final analysis (0 when unknown).
  int total_events = 0;
  std::optional<double> information_fraction;
  /// Fraction of all patients with an event that triggers the interim.
  double patient_fraction = 0.0;

  int n_total() const;
  double study_end() const;
  CalendarDistributions calendar(double horizon) const;
  /// t_p of this design.
  double interim_time() const;
};

/// Unrounded Schoenfeld event count.
double schoenfeld_events_exact(double hr, double alpha, double power, double q_a = 0.5,
                               double q_b = 0.5);
/// Required events for the final log-rank analysis, rounded up.
int schoenfeld_events(double hr, double alpha, double power, double q_a = 0.5, double q_b = 0.5);

/// Expected number of events among n patients accrued uniformly over [0, R)
/// and followed until calendar time L.
double expected_events(double n, const SurvivalModel& survival, double accrual_duration,
                       double total_duration);
double expected_events(const TrialDesign& design, double calendar_time);

struct DesignInputs {
  double hazard_ratio = 0.65;
  SurvivalModel control = SurvivalModel::exponential_median(6.0);
  /// Patients per month; +inf means everyone enters at time zero.
  double accrual_rate = 4.0;
  double fu_after_last = 6.0;
  double alpha = 0.05;
  double power = 0.8;
  std::optional<double> information_fraction;
  /// Decimals kept in p when it is derived from IF; unset keeps it exact.
  std::optional<int> p_decimals = 2;
  /// Accrual durations are searched on this grid (months). Zero searches over
  /// even sample sizes instead, with R = N / rate.
  double accrual_step = 1.0;
  /// Compare expected events with the unrounded Schoenfeld count.
  bool exact_event_target = true;
};

/// Smallest 1:1 design whose expected events at the end of follow-up reach the
/// Schoenfeld requirement.
TrialDesign solve_design(const DesignInputs& inputs);

/// p = IF * d / N.
double patient_fraction(double information_fraction, int total_events, int n_total);
double patient_fraction(const TrialDesign& design);
double round_to_decimals(double x, int decimals);

}  // namespace interimkm
