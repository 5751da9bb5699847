#include "core/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/numerics.hpp"

namespace interimkm {

namespace {

constexpr double support_floor = 1e-10;
constexpr double density_floor = 1e-12;
constexpr double quad_tol = 1e-11;

// Integrals against dLambda over [0, upper], taken in w = Lambda(s).
template <class F>
double integrate_dlambda(const SurvivalModel& survival, double upper,
                         const std::vector<double>& kinks, F&& integrand) {
  const double w_end = survival.cum_hazard(upper);
  if (w_end <= 0.0) return 0.0;
  std::vector<double> w_kinks;
  for (double s : kinks) {
    if (s > 0.0 && s < upper) w_kinks.push_back(survival.cum_hazard(s));
  }
  auto in_w = [&](double w) { return integrand(survival.inverse_cum_hazard(w)); };
  return numerics::integrate(in_w, 0.0, w_end, quad_tol, w_kinks);
}

void check_support(double one_minus_h, double at) {
  if (one_minus_h < support_floor) {
    std::ostringstream msg;
    msg << "estimand at boundary of support: 1 - H = " << one_minus_h << " at follow-up time "
        << at;
    fail(ErrorCode::boundary_of_support, msg.str());
  }
}

VarianceBreakdown combine(double estimation, double timing, double cross) {
  return {estimation, timing, cross, estimation + timing + cross};
}

void check_delta(double t_p, double delta) {
  require(std::isfinite(t_p) && t_p > 0.0, "interim time must be positive");
  require(delta > 0.0 && delta < t_p, "delta must lie in (0, t_p)");
}

double mixture_density_at(const CalendarDistributions& cd, double t_p) {
  const double h = cd.mixture_density(t_p);
  if (!(h > density_floor)) {
    std::ostringstream msg;
    msg << "singular timing: event density " << h << " at the interim time " << t_p;
    fail(ErrorCode::singular_timing, msg.str());
  }
  return h;
}

}  // namespace

double DeltaSpec::resolve(double t_p) const {
  require(value > 0.0 && std::isfinite(value), "delta must be positive");
  const double d = mode == Mode::relative ? value * t_p : value;
  require(d < t_p, "delta must be smaller than the interim time");
  return d;
}

VarianceBreakdown sigma2_two_arm(const CalendarDistributions& cd, std::size_t arm, double p,
                                 double t_p, double delta) {
  require(arm < cd.arms().size(), "arm index out of range");
  require(p > 0.0 && p < 1.0, "p must lie in (0, 1)");
  check_delta(t_p, delta);
  const SurvivalModel& s = cd.arms()[arm].survival;
  const double q = cd.arms()[arm].weight;
  const double td = t_p - delta;
  check_support(1.0 - cd.h_followup(arm, td), td);

  const auto kinks = cd.censoring_breakpoints();
  const double estimation_integral = integrate_dlambda(s, td, kinks, [&](double u) {
    return 1.0 / (1.0 - cd.h_followup(arm, u));
  });
  const double huc_star = cd.h_uc_calendar(arm, t_p);
  const double covariance_integral = integrate_dlambda(s, td, kinks, [&](double u) {
    const double h = cd.h_followup(arm, u);
    return (cd.h_uc_followup(arm, u) - huc_star * h) / (1.0 - h);
  });

  const double surv = s.survival(td);
  const double dens = s.density(td);
  const double h_mix = mixture_density_at(cd, t_p);
  const double estimation = surv * surv * estimation_integral;
  const double timing = q * dens * dens * p * (1.0 - p) / (h_mix * h_mix);
  const double cross = -2.0 * surv * q * std::sqrt(q) * dens / h_mix *
                       ((1.0 - huc_star) * s.cum_hazard(td) + covariance_integral);
  return combine(estimation, timing, cross);
}

VarianceBreakdown sigma2_one_arm_interim(const CalendarDistributions& cd, double p, double t_p,
                                         double delta) {
  require(cd.arms().size() == 1, "single-arm variance needs exactly one arm");
  require(p > 0.0 && p < 1.0, "p must lie in (0, 1)");
  check_delta(t_p, delta);
  const SurvivalModel& s = cd.arms()[0].survival;
  const double td = t_p - delta;
  check_support(1.0 - cd.h_followup(0, td), td);

  const auto kinks = cd.censoring_breakpoints();
  const double estimation_integral = integrate_dlambda(s, td, kinks, [&](double u) {
    return 1.0 / (1.0 - cd.h_followup(0, u));
  });
  const double huc_star = cd.h_uc_calendar(0, t_p);
  const double covariance_integral = integrate_dlambda(s, td, kinks, [&](double u) {
    const double h = cd.h_followup(0, u);
    return (cd.h_uc_followup(0, u) - huc_star * h) / (1.0 - h);
  });

  const double surv = s.survival(td);
  const double dens = s.density(td);
  const double h = mixture_density_at(cd, t_p);
  const double estimation = surv * surv * estimation_integral;
  const double timing = dens * dens / (h * h) * p * (1.0 - p);
  const double cross =
      -2.0 * surv * dens / h * ((1.0 - p) * s.cum_hazard(td) + covariance_integral);
  return combine(estimation, timing, cross);
}

FollowupVariance sigma2_followup_one_arm(const SurvivalModel& survival,
                                         const AccrualModel& accrual, double horizon, double p) {
  require(p > 0.0 && p < 1.0, "p must lie in (0, 1)");
  const CalendarDistributions cd({{survival, 1.0}}, accrual, horizon);
  const double reachable = cd.h_uc_followup(0, horizon);
  if (reachable <= p) {
    std::ostringstream msg;
    msg << "immature design: observed event fraction only reaches " << reachable
        << " within follow-up " << horizon << ", below p = " << p;
    fail(ErrorCode::immature_design, msg.str());
  }
  const double t_p = numerics::find_root([&](double t) { return cd.h_uc_followup(0, t) - p; },
                                         0.0, horizon, 1e-12, 1e-15);
  check_support(1.0 - cd.h_followup(0, t_p), t_p);
  const double h_uc = survival.density(t_p) * cd.uncensored_beyond(t_p);
  if (!(h_uc > density_floor)) {
    std::ostringstream msg;
    msg << "singular timing: observed event density " << h_uc << " at t_p = " << t_p;
    fail(ErrorCode::singular_timing, msg.str());
  }

  const auto kinks = cd.censoring_breakpoints();
  const double estimation_integral = integrate_dlambda(survival, t_p, kinks, [&](double u) {
    return 1.0 / (1.0 - cd.h_followup(0, u));
  });
  const double covariance_integral = integrate_dlambda(survival, t_p, kinks, [&](double u) {
    const double h = cd.h_followup(0, u);
    return (cd.h_uc_followup(0, u) - p * h) / (1.0 - h);
  });
  const double surv = survival.survival(t_p);
  const double dens = survival.density(t_p);
  const double estimation = surv * surv * estimation_integral;
  const double timing = dens * dens / (h_uc * h_uc) * p * (1.0 - p);
  const double cross =
      -2.0 * surv * dens / h_uc * ((1.0 - p) * survival.cum_hazard(t_p) + covariance_integral);
  return {t_p, combine(estimation, timing, cross)};
}

PredictionInterval prediction_interval(double center, double sigma, double n_arm, double alpha) {
  require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be non-negative");
  require(n_arm >= 1.0, "arm size must be at least one");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  PredictionInterval pi;
  pi.center = center;
  pi.sigma = sigma;
  pi.n_arm = n_arm;
  pi.alpha = alpha;
  const double half = numerics::normal_upper_quantile(alpha / 2.0) * sigma / std::sqrt(n_arm);
  pi.lower = center - half;
  pi.upper = center + half;
  pi.clipped_lower = std::clamp(pi.lower, 0.0, 1.0);
  pi.clipped_upper = std::clamp(pi.upper, 0.0, 1.0);
  return pi;
}

InterimPlan expected_km_at_time(const TrialDesign& design, double t_p, const DeltaSpec& delta,
                                double alpha) {
  require(design.arms.size() == design.arm_sizes.size(), "every arm needs a size");
  InterimPlan plan;
  plan.p = design.patient_fraction;
  plan.t_p = t_p;
  plan.delta = delta.resolve(t_p);
  const CalendarDistributions cd = design.calendar(t_p);
  for (std::size_t a = 0; a < design.arms.size(); ++a) {
    ArmInterimPlan arm;
    arm.label = design.arms[a].survival.label();
    arm.n_arm = design.arm_sizes[a];
    arm.center = design.arms[a].survival.survival(t_p - plan.delta);
    arm.variance = sigma2_two_arm(cd, a, plan.p, t_p, plan.delta);
    if (arm.variance.total < 0.0) {
      std::ostringstream msg;
      msg << "negative asymptotic variance " << arm.variance.total << " for arm " << a;
      fail(ErrorCode::singular_timing, msg.str());
    }
    arm.interval =
        prediction_interval(arm.center, std::sqrt(arm.variance.total), arm.n_arm, alpha);
    plan.arms.push_back(std::move(arm));
  }
  return plan;
}

InterimPlan expected_km_at_interim(const TrialDesign& design, const DeltaSpec& delta,
                                   double alpha) {
  return expected_km_at_time(design, design.interim_time(), delta, alpha);
}

}  // namespace interimkm
