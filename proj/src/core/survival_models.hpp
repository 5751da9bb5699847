#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <variant>

namespace interimkm {

// All times are in months, all rates per month.

struct Exponential {
  double rate;
};

struct Weibull {
  double shape;
  double scale;
};

/// Parametric law of the time from entry to event for one arm.
class SurvivalModel {
 public:
  using Family = std::variant<Exponential, Weibull>;

  static SurvivalModel exponential(double rate, std::string label = {});
  /// Exponential with the given median; rate = -log(0.5) / median.
  static SurvivalModel exponential_median(double median, std::string label = {});
  static SurvivalModel weibull(double shape, double scale, std::string label = {});

  double survival(double t) const;
  double density(double t) const;
  double hazard(double t) const;
  double cum_hazard(double t) const;
  /// Inverse of F; quantile(0) = 0. Rejects p >= 1.
  double quantile(double p) const;
  /// Inverse of the cumulative hazard, defined on [0, inf).
  double inverse_cum_hazard(double h) const;
  /// Integral of the survival function over [a, b], 0 <= a <= b.
  double integrated_survival(double a, double b) const;
  double median() const { return quantile(0.5); }
  double mean() const;

  /// Model whose hazard is `hr` times this one's at every t.
  SurvivalModel scaled_hazard(double hr, std::string label = {}) const;

  const Family& family() const noexcept { return family_; }
  const std::string& label() const noexcept { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

 private:
  SurvivalModel(Family family, std::string label);

  Family family_;
  std::string label_;
};

/// Calendar-time entry law G_Acc: uniform on [0, R), optionally truncated at
/// some time tau <= R where the remaining mass 1 - tau/R sits as an atom.
/// R = 0 is instant accrual, an atom of size one at calendar time 0.
class AccrualModel {
 public:
  struct PointMass {
    double time;
    double mass;
  };

  AccrualModel(double duration, std::optional<PointMass> point_mass = {});

  static AccrualModel uniform(double duration) { return AccrualModel(duration); }
  /// Uniform accrual over `duration`, with patients who would enter at or after
  /// `at` moved onto an atom at `at`.
  static AccrualModel truncated(double duration, double at);

  double duration() const noexcept { return duration_; }
  const std::optional<PointMass>& point_mass() const noexcept { return point_mass_; }

  /// P(E <= t).
  double cdf(double t) const;
  /// P(E < t).
  double cdf_before(double t) const;
  /// Density of the continuous part; zero for instant accrual.
  double uniform_density() const noexcept { return density_; }
  /// Upper end of the continuous part's support.
  double uniform_end() const noexcept { return uniform_end_; }
  /// Location and size of the atom, if any (instant accrual has one at 0).
  double atom_time() const noexcept { return atom_time_; }
  double atom_mass() const noexcept { return atom_mass_; }
  /// Last calendar time at which anyone enters.
  double last_entry() const noexcept { return std::max(uniform_end_, atom_time_); }

  /// Inverse-cdf draw from a uniform variate in [0, 1).
  double sample(double u) const;

 private:
  double duration_;
  std::optional<PointMass> point_mass_;
  double density_ = 0.0;
  double uniform_end_ = 0.0;
  double atom_time_ = 0.0;
  double atom_mass_ = 0.0;
};

}  // namespace interimkm
