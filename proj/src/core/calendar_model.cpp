#include "core/calendar_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/numerics.hpp"

namespace interimkm {

namespace {

constexpr double horizon_slack = 1e-9;

// int_a^b F(u) du for 0 <= a <= b.
double integrated_cdf(const SurvivalModel& survival, double a, double b) {
  return (b - a) - survival.integrated_survival(a, b);
}

}  // namespace

double calendar_event_fraction(const SurvivalModel& survival, const AccrualModel& accrual,
                               double t) {
  if (t <= 0.0) return 0.0;
  double value = 0.0;
  // Continuous entries on [0, min(t, end)): rho * int_{t-m}^{t} F(u) du.
  const double reach = std::min(t, accrual.uniform_end());
  if (reach > 0.0) {
    value += accrual.uniform_density() * integrated_cdf(survival, t - reach, t);
  }
  if (accrual.atom_mass() > 0.0 && t > accrual.atom_time()) {
    value += accrual.atom_mass() * (1.0 - survival.survival(t - accrual.atom_time()));
  }
  return std::clamp(value, 0.0, 1.0);
}

double calendar_event_density(const SurvivalModel& survival, const AccrualModel& accrual,
                              double t) {
  if (t <= 0.0) return 0.0;
  double value = 0.0;
  const double reach = std::min(t, accrual.uniform_end());
  if (reach > 0.0) {
    value += accrual.uniform_density() *
             (survival.survival(t - reach) - survival.survival(t));
  }
  if (accrual.atom_mass() > 0.0 && t > accrual.atom_time()) {
    value += accrual.atom_mass() * survival.density(t - accrual.atom_time());
  }
  return value;
}

CalendarDistributions::CalendarDistributions(std::vector<ArmSpec> arms, AccrualModel accrual,
                                             double horizon)
    : arms_(std::move(arms)), accrual_(std::move(accrual)), horizon_(horizon) {
  require(!arms_.empty(), "calendar model needs at least one arm");
  require(horizon_ >= 0.0 && std::isfinite(horizon_), "horizon must be finite and non-negative");
  double total = 0.0;
  for (const auto& a : arms_) {
    require(a.weight >= 0.0 && a.weight <= 1.0, "arm weight must lie in [0, 1]");
    total += a.weight;
  }
  require(std::abs(total - 1.0) <= 1e-9, "arm weights must sum to one");
}

const ArmSpec& CalendarDistributions::arm(std::size_t index) const {
  require(index < arms_.size(), "arm index out of range");
  return arms_[index];
}

double CalendarDistributions::uncensored_beyond(double t) const {
  return accrual_.cdf_before(horizon_ - t);
}

double CalendarDistributions::h_followup(std::size_t a, double t) const {
  require(t >= 0.0, "follow-up time must be non-negative");
  require(t <= horizon_ + horizon_slack, "no follow-up beyond the censoring horizon");
  return 1.0 - arm(a).survival.survival(t) * uncensored_beyond(t);
}

double CalendarDistributions::h_uc_followup(std::size_t a, double t) const {
  require(t >= 0.0, "follow-up time must be non-negative");
  require(t <= horizon_ + horizon_slack, "no follow-up beyond the censoring horizon");
  const SurvivalModel& s = arm(a).survival;
  const double L = horizon_;
  t = std::min(t, L);

  // 1 - G_L(u) = rho * clamp(L - u, 0, end) + atom * 1{L - u > atom_time}.
  double value = 0.0;
  const double rho = accrual_.uniform_density();
  const double end = accrual_.uniform_end();
  if (rho > 0.0) {
    // Full potential follow-up for entries up to `end`: constant rho * end.
    const double flat_end = std::min(t, std::max(0.0, L - end));
    value += rho * end * (1.0 - s.survival(flat_end));
    // Linear part on [L - end, L): int (L - u) f(u) du by parts.
    const double lo = std::max(0.0, L - end);
    const double hi = std::min(t, L);
    if (hi > lo) {
      value += rho * ((L - lo) * s.survival(lo) - (L - hi) * s.survival(hi) -
                      s.integrated_survival(lo, hi));
    }
  }
  if (accrual_.atom_mass() > 0.0 && L > accrual_.atom_time()) {
    const double reach = std::min(t, L - accrual_.atom_time());
    value += accrual_.atom_mass() * (1.0 - s.survival(reach));
  }
  return std::clamp(value, 0.0, 1.0);
}

double CalendarDistributions::h_calendar(std::size_t a, double t) const {
  if (t >= horizon_) return 1.0;
  return calendar_event_fraction(arm(a).survival, accrual_, t);
}

double CalendarDistributions::h_uc_calendar(std::size_t a, double t) const {
  require(t <= horizon_ + horizon_slack, "calendar time beyond the censoring horizon");
  return calendar_event_fraction(arm(a).survival, accrual_, t);
}

double CalendarDistributions::h_uc_calendar_density(std::size_t a, double t) const {
  return calendar_event_density(arm(a).survival, accrual_, t);
}

double CalendarDistributions::mixture_h_followup(double t) const {
  double v = 0.0;
  for (std::size_t i = 0; i < arms_.size(); ++i) v += arms_[i].weight * h_followup(i, t);
  return v;
}

double CalendarDistributions::mixture_h_uc_followup(double t) const {
  double v = 0.0;
  for (std::size_t i = 0; i < arms_.size(); ++i) v += arms_[i].weight * h_uc_followup(i, t);
  return v;
}

double CalendarDistributions::mixture_h_calendar(double t) const {
  double v = 0.0;
  for (std::size_t i = 0; i < arms_.size(); ++i) v += arms_[i].weight * h_calendar(i, t);
  return v;
}

double CalendarDistributions::mixture_h_uc_calendar(double t) const {
  double v = 0.0;
  for (std::size_t i = 0; i < arms_.size(); ++i) v += arms_[i].weight * h_uc_calendar(i, t);
  return v;
}

double CalendarDistributions::mixture_density(double t) const {
  double v = 0.0;
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    v += arms_[i].weight * h_uc_calendar_density(i, t);
  }
  return v;
}

std::vector<double> CalendarDistributions::censoring_breakpoints() const {
  std::vector<double> points;
  const double kink = horizon_ - accrual_.uniform_end();
  if (kink > 0.0 && kink < horizon_) points.push_back(kink);
  if (accrual_.atom_mass() > 0.0) {
    const double jump = horizon_ - accrual_.atom_time();
    if (jump > 0.0 && jump < horizon_) points.push_back(jump);
  }
  std::sort(points.begin(), points.end());
  return points;
}

double solve_tp(std::span<const ArmSpec> arms, const AccrualModel& accrual, double p,
                double max_horizon) {
  require(!arms.empty(), "solve_tp needs at least one arm");
  require(p > 0.0 && p < 1.0, "patient fraction p must lie in (0, 1)");
  double total = 0.0;
  double longest_mean = 0.0;
  for (const auto& a : arms) {
    total += a.weight;
    longest_mean = std::max(longest_mean, a.survival.mean());
  }
  require(std::abs(total - 1.0) <= 1e-9, "arm weights must sum to one");

  auto mixture = [&](double t) {
    double v = 0.0;
    for (const auto& a : arms) v += a.weight * calendar_event_fraction(a.survival, accrual, t);
    return v;
  };

  double hi = accrual.last_entry() + 10.0 * longest_mean;
  while (mixture(hi) < p && hi < max_horizon && hi < 1e9) hi *= 2.0;
  hi = std::min(hi, max_horizon);
  const double reachable = mixture(hi);
  if (reachable < p) {
    std::ostringstream msg;
    msg << "immature design: the expected event fraction only reaches " << reachable;
    if (std::isfinite(max_horizon)) msg << " by calendar time " << max_horizon;
    msg << ", below the requested patient fraction p = " << p;
    fail(ErrorCode::immature_design, msg.str());
  }
  return numerics::find_root([&](double t) { return mixture(t) - p; }, 0.0, hi, 1e-11, 1e-14);
}

}  // namespace interimkm
