#pragma once

#include <cstddef>
#include <vector>

#include "core/calendar_model.hpp"
#include "core/trial_design.hpp"

namespace interimkm {

/// The three summands of an asymptotic variance and their sum.
struct VarianceBreakdown {
  double term_estimation = 0.0;
  double term_timing = 0.0;
  double term_cross = 0.0;
  double total = 0.0;
};

struct PredictionInterval {
  double center = 0.0;
  double sigma = 0.0;
  double n_arm = 0.0;
  double alpha = 0.05;
  double lower = 0.0;
  double upper = 0.0;
  double clipped_lower = 0.0;
  double clipped_upper = 0.0;
};

/// Distance below t_p at which the curve is read: a fraction of t_p, or months.
struct DeltaSpec {
  enum class Mode { relative, absolute };
  Mode mode = Mode::relative;
  double value = 0.1;

  double resolve(double t_p) const;
};

/// Variance of sqrt(n)(S_hat(t_hat - delta) - S(t_p - delta)) for one arm of a
/// trial analysed once a fraction p of all patients had an event. The
/// distributions must use horizon t_p.
VarianceBreakdown sigma2_two_arm(const CalendarDistributions& cd, std::size_t arm, double p,
                                 double t_p, double delta);

/// Single-arm trial; `cd` must hold exactly one arm.
VarianceBreakdown sigma2_one_arm_interim(const CalendarDistributions& cd, double p, double t_p,
                                         double delta);

struct FollowupVariance {
  double t_p = 0.0;
  VarianceBreakdown variance;
};

/// Single arm, censoring from entry over `accrual` with data cut at calendar
/// `horizon`, interim at the p-quantile of the follow-up event subdistribution.
FollowupVariance sigma2_followup_one_arm(const SurvivalModel& survival,
                                         const AccrualModel& accrual, double horizon, double p);

PredictionInterval prediction_interval(double center, double sigma, double n_arm,
                                       double alpha = 0.05);

struct ArmInterimPlan {
  std::string label;
  int n_arm = 0;
  double center = 0.0;
  VarianceBreakdown variance;
  PredictionInterval interval;
};

struct InterimPlan {
  double p = 0.0;
  double t_p = 0.0;
  double delta = 0.0;
  std::vector<ArmInterimPlan> arms;
};

/// Expected KM value and prediction interval per arm at t_p - delta.
InterimPlan expected_km_at_interim(const TrialDesign& design, const DeltaSpec& delta,
                                   double alpha = 0.05);
/// Same, at a given interim time instead of the solved t_p.
InterimPlan expected_km_at_time(const TrialDesign& design, double t_p, const DeltaSpec& delta,
                                double alpha = 0.05);

}  // namespace interimkm
