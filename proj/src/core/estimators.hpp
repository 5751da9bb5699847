#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace interimkm {

struct PatientRecord {
  int arm = 0;
  double entry = 0.0;       // calendar months
  double event_time = 0.0;  // latent follow-up time to event
  double observed_time = 0.0;
  bool event = false;
};

struct Observation {
  double time = 0.0;
  bool event = false;
};

struct InterimDataset {
  std::vector<PatientRecord> records;
  double t_hat = 0.0;
  double p_target = 0.0;
  std::vector<int> n_included;  // per arm
  int events = 0;

  std::vector<Observation> observations(int arm) const;
};

/// Cuts a cohort with latent event times at the calendar time of the
/// ceil(p N)-th event. Events after `study_end` never happen.
InterimDataset interim_cut(std::span<const PatientRecord> cohort, double p,
                           double study_end = std::numeric_limits<double>::infinity());

/// Right-continuous step function: `start` before the first knot, values[i]
/// on [knots[i], knots[i+1]).
class StepFunction {
 public:
  StepFunction(double start, std::vector<double> knots, std::vector<double> values);

  double operator()(double t) const;
  /// inf{t : F(t) >= level} for a non-decreasing function; +inf if never.
  double quantile(double level) const;
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  double start_;
  std::vector<double> knots_;
  std::vector<double> values_;
};

struct EmpiricalSubdistributions {
  StepFunction h;     // fraction with observed time <= t
  StepFunction h_uc;  // fraction with an observed event by t
};

EmpiricalSubdistributions empirical_subdistributions(std::span<const Observation> data);

/// Risk-set table of a right-censored sample. At tied times events are
/// counted before censorings.
class ProductLimit {
 public:
  explicit ProductLimit(std::span<const Observation> data);

  double nelson_aalen(double t) const;
  double breslow(double t) const;
  double kaplan_meier(double t) const;
  double last_time() const noexcept { return last_time_; }
  /// True when t lies past the largest observed time.
  bool beyond_support(double t) const noexcept { return t > last_time_; }

  const std::vector<double>& event_times() const noexcept { return times_; }
  const std::vector<int>& at_risk() const noexcept { return at_risk_; }
  const std::vector<int>& deaths() const noexcept { return deaths_; }

 private:
  std::size_t events_through(double t) const;

  std::vector<double> times_;
  std::vector<int> at_risk_;
  std::vector<int> deaths_;
  std::vector<double> cum_hazard_;
  std::vector<double> survival_;
  double last_time_ = 0.0;
};

double nelson_aalen(std::span<const Observation> data, double t);
double breslow(std::span<const Observation> data, double t);
double kaplan_meier(std::span<const Observation> data, double t);

/// Columnar CSV (arm,entry,observed_time,event) for interim datasets.
std::string dataset_to_csv(const InterimDataset& data);
InterimDataset dataset_from_csv(const std::string& text);

}  // namespace interimkm
