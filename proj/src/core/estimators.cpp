#include "core/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "core/errors.hpp"

namespace interimkm {

std::vector<Observation> InterimDataset::observations(int arm) const {
  std::vector<Observation> out;
  for (const auto& r : records) {
    if (r.arm == arm) out.push_back({r.observed_time, r.event});
  }
  return out;
}

InterimDataset interim_cut(std::span<const PatientRecord> cohort, double p, double study_end) {
  require(!cohort.empty(), "cohort is empty");
  require(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
  const auto n = static_cast<double>(cohort.size());
  const auto k = static_cast<std::size_t>(std::ceil(p * n - 1e-9));

  std::vector<double> calendar;
  calendar.reserve(cohort.size());
  int arms = 0;
  for (const auto& r : cohort) {
    require(r.arm >= 0, "arm index must be non-negative");
    require(r.entry >= 0.0 && r.event_time >= 0.0, "entry and event times must be non-negative");
    arms = std::max(arms, r.arm + 1);
    const double c = r.entry + r.event_time;
    if (c <= study_end) calendar.push_back(c);
  }
  if (k > calendar.size()) {
    std::ostringstream msg;
    msg << "insufficient events: " << calendar.size() << " of " << cohort.size()
        << " patients (fraction " << calendar.size() / n << ") have an event, " << k
        << " needed for p = " << p;
    fail(ErrorCode::insufficient_events, msg.str());
  }
  std::nth_element(calendar.begin(), calendar.begin() + (k - 1), calendar.end());

  InterimDataset out;
  out.t_hat = calendar[k - 1];
  out.p_target = p;
  out.n_included.assign(arms, 0);
  for (const auto& r : cohort) {
    if (!(r.entry < out.t_hat)) continue;
    PatientRecord kept = r;
    kept.event = r.entry + r.event_time <= out.t_hat;
    kept.observed_time = kept.event ? r.event_time : out.t_hat - r.entry;
    out.events += kept.event ? 1 : 0;
    ++out.n_included[r.arm];
    out.records.push_back(kept);
  }
  return out;
}

StepFunction::StepFunction(double start, std::vector<double> knots, std::vector<double> values)
    : start_(start), knots_(std::move(knots)), values_(std::move(values)) {
  require(knots_.size() == values_.size(), "step function needs one value per knot");
  require(std::is_sorted(knots_.begin(), knots_.end()), "step function knots must be sorted");
}

double StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return start_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepFunction::quantile(double level) const {
  if (start_ >= level) return -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (values_[i] >= level) return knots_[i];
  }
  return std::numeric_limits<double>::infinity();
}

EmpiricalSubdistributions empirical_subdistributions(std::span<const Observation> data) {
  require(!data.empty(), "empirical distributions need data");
  std::vector<Observation> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Observation& a, const Observation& b) { return a.time < b.time; });
  const double n = static_cast<double>(sorted.size());
  std::vector<double> knots, h, h_uc;
  int all = 0, events = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    ++all;
    events += sorted[i].event ? 1 : 0;
    if (i + 1 < sorted.size() && sorted[i + 1].time == sorted[i].time) continue;
    knots.push_back(sorted[i].time);
    h.push_back(all / n);
    h_uc.push_back(events / n);
  }
  return {StepFunction(0.0, knots, std::move(h)), StepFunction(0.0, knots, std::move(h_uc))};
}

ProductLimit::ProductLimit(std::span<const Observation> data) {
  std::vector<Observation> sorted(data.begin(), data.end());
  for (const auto& o : sorted) require(o.time >= 0.0, "observed times must be non-negative");
  std::sort(sorted.begin(), sorted.end(), [](const Observation& a, const Observation& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.event && !b.event;
  });
  if (!sorted.empty()) last_time_ = sorted.back().time;
  const int n = static_cast<int>(sorted.size());
  double lambda = 0.0;
  double surv = 1.0;
  // Between censorings the product telescopes to anchor * Y_after / Y_anchor.
  double anchor = 1.0;
  int anchor_y = n;
  for (int i = 0; i < n;) {
    const double t = sorted[i].time;
    int d = 0;
    int j = i;
    for (; j < n && sorted[j].time == t; ++j) d += sorted[j].event ? 1 : 0;
    const int y = n - i;
    if (d > 0) {
      lambda += static_cast<double>(d) / y;
      surv = anchor * (y - d) / anchor_y;
      times_.push_back(t);
      at_risk_.push_back(y);
      deaths_.push_back(d);
      cum_hazard_.push_back(lambda);
      survival_.push_back(surv);
    }
    if (j - i > d) {
      anchor = surv;
      anchor_y = y - (j - i);
    }
    i = j;
  }
}

std::size_t ProductLimit::events_through(double t) const {
  return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) -
                                  times_.begin());
}

double ProductLimit::nelson_aalen(double t) const {
  const std::size_t k = events_through(t);
  return k == 0 ? 0.0 : cum_hazard_[k - 1];
}

double ProductLimit::breslow(double t) const { return std::exp(-nelson_aalen(t)); }

double ProductLimit::kaplan_meier(double t) const {
  const std::size_t k = events_through(t);
  return k == 0 ? 1.0 : survival_[k - 1];
}

double nelson_aalen(std::span<const Observation> data, double t) {
  return ProductLimit(data).nelson_aalen(t);
}

double breslow(std::span<const Observation> data, double t) {
  return ProductLimit(data).breslow(t);
}

double kaplan_meier(std::span<const Observation> data, double t) {
  return ProductLimit(data).kaplan_meier(t);
}

std::string dataset_to_csv(const InterimDataset& data) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "arm,entry,observed_time,event\n";
  for (const auto& r : data.records) {
    out << r.arm << ',' << r.entry << ',' << r.observed_time << ',' << (r.event ? 1 : 0) << '\n';
  }
  return out.str();
}

InterimDataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  InterimDataset data;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("arm", 0) == 0)) continue;
    std::istringstream row(line);
    PatientRecord r;
    char c1 = 0, c2 = 0, c3 = 0;
    int event = 0;
    if (!(row >> r.arm >> c1 >> r.entry >> c2 >> r.observed_time >> c3 >> event) || c1 != ',' ||
        c2 != ',' || c3 != ',' || (event != 0 && event != 1) || r.arm < 0) {
      fail(ErrorCode::invalid_config, "dataset line " + std::to_string(line_no) + " is malformed");
    }
    r.event = event == 1;
    r.event_time = r.observed_time;
    if (static_cast<int>(data.n_included.size()) <= r.arm) data.n_included.resize(r.arm + 1, 0);
    ++data.n_included[r.arm];
    data.events += event;
    data.t_hat = std::max(data.t_hat, r.entry + r.observed_time);
    data.records.push_back(r);
  }
  return data;
}

}  // namespace interimkm
