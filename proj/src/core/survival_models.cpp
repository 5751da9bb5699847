#include "core/survival_models.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/errors.hpp"

namespace interimkm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_time(double t) {
  require(t >= 0.0 && !std::isnan(t), "survival model: time must be non-negative");
}

}  // namespace

SurvivalModel::SurvivalModel(Family family, std::string label)
    : family_(family), label_(std::move(label)) {}

SurvivalModel SurvivalModel::exponential(double rate, std::string label) {
  require(rate > 0.0 && std::isfinite(rate), "exponential rate must be positive");
  return SurvivalModel(Exponential{rate}, std::move(label));
}

SurvivalModel SurvivalModel::exponential_median(double median, std::string label) {
  require(median > 0.0 && std::isfinite(median), "median must be positive");
  return exponential(std::numbers::ln2 / median, std::move(label));
}

SurvivalModel SurvivalModel::weibull(double shape, double scale, std::string label) {
  require(shape > 0.0 && std::isfinite(shape), "weibull shape must be positive");
  require(scale > 0.0 && std::isfinite(scale), "weibull scale must be positive");
  return SurvivalModel(Weibull{shape, scale}, std::move(label));
}

double SurvivalModel::cum_hazard(double t) const {
  require_time(t);
  return std::visit(overloaded{
                        [t](const Exponential& e) { return e.rate * t; },
                        [t](const Weibull& w) { return std::pow(t / w.scale, w.shape); },
                    },
                    family_);
}

double SurvivalModel::survival(double t) const { return std::exp(-cum_hazard(t)); }

double SurvivalModel::hazard(double t) const {
  require_time(t);
  return std::visit(overloaded{
                        [](const Exponential& e) { return e.rate; },
                        [t](const Weibull& w) {
                          if (t == 0.0) {
                            if (w.shape < 1.0) return std::numeric_limits<double>::infinity();
                            return w.shape == 1.0 ? 1.0 / w.scale : 0.0;
                          }
                          return w.shape / w.scale * std::pow(t / w.scale, w.shape - 1.0);
                        },
                    },
                    family_);
}

double SurvivalModel::density(double t) const {
  const double h = hazard(t);
  if (std::isinf(h)) return h;
  return h * survival(t);
}

double SurvivalModel::quantile(double p) const {
  require(p >= 0.0 && p < 1.0, "quantile: p must lie in [0, 1)");
  return inverse_cum_hazard(-std::log1p(-p));
}

double SurvivalModel::inverse_cum_hazard(double h) const {
  require(h >= 0.0, "inverse_cum_hazard: argument must be non-negative");
  return std::visit(overloaded{
                        [h](const Exponential& e) { return h / e.rate; },
                        [h](const Weibull& w) { return w.scale * std::pow(h, 1.0 / w.shape); },
                    },
                    family_);
}

double SurvivalModel::integrated_survival(double a, double b) const {
  require_time(a);
  require(b >= a, "integrated_survival: b must not precede a");
  if (b == a) return 0.0;
  return std::visit(
      overloaded{
          [a, b](const Exponential& e) {
            return (std::exp(-e.rate * a) - std::exp(-e.rate * b)) / e.rate;
          },
          [a, b](const Weibull& w) {
            // int_a^b exp(-(u/k)^s) du = (k/s) * [gamma(1/s, (b/k)^s) - gamma(1/s, (a/k)^s)]
            const double shape_inv = 1.0 / w.shape;
            const double xa = std::pow(a / w.scale, w.shape);
            const double xb = std::isinf(b) ? std::numeric_limits<double>::infinity()
                                            : std::pow(b / w.scale, w.shape);
            const double upper_a = boost::math::tgamma(shape_inv, xa);
            const double upper_b = std::isinf(xb) ? 0.0 : boost::math::tgamma(shape_inv, xb);
            return w.scale * shape_inv * (upper_a - upper_b);
          },
      },
      family_);
}

double SurvivalModel::mean() const {
  return std::visit(overloaded{
                        [](const Exponential& e) { return 1.0 / e.rate; },
                        [](const Weibull& w) { return w.scale * std::tgamma(1.0 + 1.0 / w.shape); },
                    },
                    family_);
}

SurvivalModel SurvivalModel::scaled_hazard(double hr, std::string label) const {
  require(hr > 0.0 && std::isfinite(hr), "hazard ratio must be positive");
  return std::visit(overloaded{
                        [&](const Exponential& e) { return exponential(e.rate * hr, std::move(label)); },
                        [&](const Weibull& w) {
                          return weibull(w.shape, w.scale * std::pow(hr, -1.0 / w.shape),
                                         std::move(label));
                        },
                    },
                    family_);
}

AccrualModel::AccrualModel(double duration, std::optional<PointMass> point_mass)
    : duration_(duration), point_mass_(point_mass) {
  require(duration >= 0.0 && std::isfinite(duration), "accrual duration must be non-negative");
  if (duration == 0.0) {
    require(!point_mass || (point_mass->time == 0.0 && point_mass->mass == 1.0),
            "instant accrual cannot carry a separate point mass");
    atom_time_ = 0.0;
    atom_mass_ = 1.0;
    return;
  }
  density_ = 1.0 / duration;
  uniform_end_ = duration;
  if (point_mass) {
    const auto [time, mass] = *point_mass;
    require(time >= 0.0 && time <= duration, "accrual point mass must lie in [0, duration]");
    require(mass >= 0.0 && mass <= 1.0, "accrual point mass must be a probability");
    require(std::abs(time / duration + mass - 1.0) <= 1e-9,
            "accrual point mass must carry exactly the mass beyond its time (total mass 1)");
    uniform_end_ = time;
    atom_time_ = time;
    atom_mass_ = mass;
  }
}

AccrualModel AccrualModel::truncated(double duration, double at) {
  require(duration > 0.0, "truncated accrual needs a positive duration");
  if (at >= duration) return uniform(duration);
  require(at >= 0.0, "truncation time must be non-negative");
  return AccrualModel(duration, PointMass{at, 1.0 - at / duration});
}

double AccrualModel::cdf(double t) const {
  if (t < 0.0) return 0.0;
  double value = density_ * std::min(t, uniform_end_);
  if (t >= atom_time_) value += atom_mass_;
  return std::min(value, 1.0);
}

double AccrualModel::cdf_before(double t) const {
  if (t <= 0.0) return 0.0;
  double value = density_ * std::min(t, uniform_end_);
  if (t > atom_time_) value += atom_mass_;
  return std::min(value, 1.0);
}

double AccrualModel::sample(double u) const {
  require(u >= 0.0 && u < 1.0, "accrual sample: u must lie in [0, 1)");
  const double continuous_mass = density_ * uniform_end_;
  if (u < continuous_mass) return u / density_;
  return atom_time_;
}

}  // namespace interimkm
