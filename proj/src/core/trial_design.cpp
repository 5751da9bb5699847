#include "core/trial_design.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "core/errors.hpp"
#include "core/numerics.hpp"

namespace interimkm {

int TrialDesign::n_total() const {
  int n = 0;
  for (int k : arm_sizes) n += k;
  return n;
}

double TrialDesign::study_end() const {
  if (!fu_after_last) return std::numeric_limits<double>::infinity();
  return accrual.last_entry() + *fu_after_last;
}

CalendarDistributions TrialDesign::calendar(double horizon) const {
  return CalendarDistributions(arms, accrual, horizon);
}

double TrialDesign::interim_time() const {
  return solve_tp(arms, accrual, patient_fraction, study_end());
}

double schoenfeld_events_exact(double hr, double alpha, double power, double q_a, double q_b) {
  require(hr > 0.0 && std::isfinite(hr), "hazard ratio must be positive");
  if (hr == 1.0) {
    fail(ErrorCode::infeasible_design,
         "hazard ratio of one: no number of events gives the requested power");
  }
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(power > 0.0 && power < 1.0, "power must lie in (0, 1)");
  require(q_a > 0.0 && q_b > 0.0, "allocation fractions must be positive");
  const double z = numerics::normal_upper_quantile(alpha / 2.0) +
                   numerics::normal_upper_quantile(1.0 - power);
  const double log_hr = std::log(hr);
  return z * z / (log_hr * log_hr * q_a * q_b);
}

int schoenfeld_events(double hr, double alpha, double power, double q_a, double q_b) {
  return static_cast<int>(std::ceil(schoenfeld_events_exact(hr, alpha, power, q_a, q_b) - 1e-9));
}

double expected_events(double n, const SurvivalModel& survival, double accrual_duration,
                       double total_duration) {
  require(n >= 0.0, "patient count must be non-negative");
  require(accrual_duration >= 0.0, "accrual duration must be non-negative");
  require(total_duration >= accrual_duration,
          "total duration must not be shorter than the accrual period");
  return n * calendar_event_fraction(survival, AccrualModel::uniform(accrual_duration),
                                     total_duration);
}

double expected_events(const TrialDesign& design, double calendar_time) {
  double events = 0.0;
  for (std::size_t i = 0; i < design.arms.size(); ++i) {
    events += design.arm_sizes.at(i) *
              calendar_event_fraction(design.arms[i].survival, design.accrual, calendar_time);
  }
  return events;
}

double round_to_decimals(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

double patient_fraction(double information_fraction, int total_events, int n_total) {
  require(information_fraction > 0.0 && information_fraction <= 1.0,
          "information fraction must lie in (0, 1]");
  require(total_events > 0, "total event count must be positive");
  require(n_total > 0, "sample size must be positive");
  const double interim_events = information_fraction * total_events;
  if (interim_events >= n_total) {
    std::ostringstream msg;
    msg << "interim event target " << interim_events << " is not below the sample size "
        << n_total << "; p would reach one";
    fail(ErrorCode::infeasible_design, msg.str());
  }
  return interim_events / n_total;
}

double patient_fraction(const TrialDesign& design) {
  require(design.information_fraction.has_value(), "design has no information fraction");
  return patient_fraction(*design.information_fraction, design.total_events, design.n_total());
}

namespace {

TrialDesign assemble(const DesignInputs& in, int total_events, int n_total, double duration) {
  TrialDesign d;
  SurvivalModel control = in.control;
  if (control.label().empty()) control.set_label("control");
  d.arms = {{control, 0.5}, {control.scaled_hazard(in.hazard_ratio, "experimental"), 0.5}};
  d.arm_sizes = {n_total / 2, n_total - n_total / 2};
  d.accrual = AccrualModel::uniform(duration);
  d.fu_after_last = in.fu_after_last;
  d.alpha = in.alpha;
  d.power = in.power;
  d.hazard_ratio = in.hazard_ratio;
  d.total_events = total_events;
  d.information_fraction = in.information_fraction;
  if (in.information_fraction) {
    double p = patient_fraction(*in.information_fraction, total_events, n_total);
    if (in.p_decimals) p = round_to_decimals(p, *in.p_decimals);
    require(p > 0.0 && p < 1.0, "rounded patient fraction left (0, 1)");
    d.patient_fraction = p;
  }
  return d;
}

}  // namespace

TrialDesign solve_design(const DesignInputs& in) {
  require(in.accrual_rate > 0.0, "accrual rate must be positive");
  require(in.fu_after_last >= 0.0 && std::isfinite(in.fu_after_last),
          "follow-up after the last entry must be finite and non-negative");
  require(in.accrual_step >= 0.0 && std::isfinite(in.accrual_step),
          "accrual step must be finite and non-negative");
  const double d_exact = schoenfeld_events_exact(in.hazard_ratio, in.alpha, in.power);
  const int d = schoenfeld_events(in.hazard_ratio, in.alpha, in.power);
  const double target = in.exact_event_target ? d_exact : static_cast<double>(d);
  const SurvivalModel experimental = in.control.scaled_hazard(in.hazard_ratio);

  auto events = [&](int n_total, double duration) {
    const double half = n_total / 2.0;
    const double end = duration + in.fu_after_last;
    return half * calendar_event_fraction(in.control, AccrualModel::uniform(duration), end) +
           half * calendar_event_fraction(experimental, AccrualModel::uniform(duration), end);
  };

  constexpr int max_patients = 10'000'000;
  if (std::isinf(in.accrual_rate)) {
    const double per_patient = events(2, 0.0) / 2.0;
    if (per_patient > 0.0) {
      int n = 2 * static_cast<int>(std::ceil(target / per_patient / 2.0 - 1e-12));
      n = std::max(n, 2);
      while (events(n, 0.0) < target) n += 2;
      if (n <= max_patients) return assemble(in, d, n, 0.0);
    }
  } else if (in.accrual_step > 0.0) {
    for (int k = 1;; ++k) {
      const double duration = k * in.accrual_step;
      const double raw = in.accrual_rate * duration;
      if (raw > max_patients) break;
      const int n = 2 * static_cast<int>(std::floor(raw / 2.0 + 1e-9));
      if (n >= 2 && events(n, duration) >= target) return assemble(in, d, n, duration);
    }
  } else {
    for (int n = 2; n <= max_patients; n += 2) {
      const double duration = n / in.accrual_rate;
      if (events(n, duration) >= target) return assemble(in, d, n, duration);
    }
  }
  std::ostringstream msg;
  msg << "infeasible design: no sample size up to " << max_patients
      << " reaches the required " << d_exact << " events";
  fail(ErrorCode::infeasible_design, msg.str());
}

}  // namespace interimkm
