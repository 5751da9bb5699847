#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "core/survival_models.hpp"

namespace interimkm {

/// One arm of a trial: its survival law and limit allocation fraction q.
struct ArmSpec {
  SurvivalModel survival;
  double weight;
};

// Free-standing pieces of the calendar model that do not depend on the
// censoring horizon.

/// P(E + T <= t): fraction of an arm's patients with an event by calendar t.
/// Events before calendar t are never censored by an analysis held at t or
/// later, so this equals H^{uc,*}_{arm,L}(t) for every horizon L >= t.
double calendar_event_fraction(const SurvivalModel& survival, const AccrualModel& accrual,
                               double t);
/// d/dt of calendar_event_fraction: the integral of f(t - s) dG_Acc(s).
double calendar_event_density(const SurvivalModel& survival, const AccrualModel& accrual,
                              double t);

/// The follow-up-time and calendar-time (sub)distributions of one trial whose
/// data are censored at calendar time `horizon`, and their q-weighted mixtures.
/// Immutable after construction.
class CalendarDistributions {
 public:
  CalendarDistributions(std::vector<ArmSpec> arms, AccrualModel accrual, double horizon);

  const std::vector<ArmSpec>& arms() const noexcept { return arms_; }
  const AccrualModel& accrual() const noexcept { return accrual_; }
  double horizon() const noexcept { return horizon_; }

  /// P(E < horizon - t): fraction of patients whose potential follow-up
  /// exceeds t, i.e. 1 - G_L(t).
  double uncensored_beyond(double t) const;

  /// H_{arm,L}(t) = P(T ^ C <= t) = 1 - S(t) (1 - G_L(t)).
  double h_followup(std::size_t arm, double t) const;
  /// H^{uc}_{arm,L}(t) = P(T <= t, T <= C).
  double h_uc_followup(std::size_t arm, double t) const;
  /// H^{*}_{arm,L}(t) = P(E + T ^ C <= t); everybody is accounted for at L.
  double h_calendar(std::size_t arm, double t) const;
  /// H^{uc,*}_{arm,L}(t) = P(E + T <= t, uncensored).
  double h_uc_calendar(std::size_t arm, double t) const;
  /// h^{uc,*}_{arm,L}(t).
  double h_uc_calendar_density(std::size_t arm, double t) const;

  double mixture_h_followup(double t) const;
  double mixture_h_uc_followup(double t) const;
  double mixture_h_calendar(double t) const;
  double mixture_h_uc_calendar(double t) const;
  double mixture_density(double t) const;

  /// Follow-up times where 1 - G_L has a kink or jump.
  std::vector<double> censoring_breakpoints() const;

 private:
  const ArmSpec& arm(std::size_t index) const;

  std::vector<ArmSpec> arms_;
  AccrualModel accrual_;
  double horizon_;
};

/// The limit interim time t_p: the p-quantile of the calendar-time mixture
/// event subdistribution. Throws an immature_design error if the mixture
/// cannot reach p by `max_horizon`.
double solve_tp(std::span<const ArmSpec> arms, const AccrualModel& accrual, double p,
                double max_horizon = std::numeric_limits<double>::infinity());

}  // namespace interimkm
