#include "core/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "core/errors.hpp"

namespace interimkm {

ReplicateResult simulate_replicate(const TrialDesign& design, double delta, Estimator estimator,
                                   CounterStream& rng) {
  std::vector<PatientRecord> cohort;
  cohort.reserve(static_cast<std::size_t>(design.n_total()));
  for (std::size_t a = 0; a < design.arms.size(); ++a) {
    const SurvivalModel& s = design.arms[a].survival;
    for (int i = 0; i < design.arm_sizes[a]; ++i) {
      PatientRecord r;
      r.arm = static_cast<int>(a);
      r.entry = design.accrual.sample(rng.uniform());
      r.event_time = s.quantile(rng.uniform());
      cohort.push_back(r);
    }
  }

  ReplicateResult out;
  InterimDataset data;
  try {
    data = interim_cut(cohort, design.patient_fraction, design.study_end());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::insufficient_events) throw;
    out.failure = e.what();
    return out;
  }
  out.ok = true;
  out.t_hat = data.t_hat;
  out.events = data.events;
  const double at = data.t_hat - delta;
  for (std::size_t a = 0; a < design.arms.size(); ++a) {
    const auto obs = data.observations(static_cast<int>(a));
    const ProductLimit pl(obs);
    out.estimates.push_back(estimator == Estimator::kaplan_meier ? pl.kaplan_meier(at)
                                                                 : pl.breslow(at));
  }
  return out;
}

double empirical_quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile of an empty sample");
  require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  return values[rank - 1];
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

SimulationSummary run_simulation(const SimulationConfig& config, const ProgressCallback& progress) {
  const TrialDesign& design = config.design;
  require(config.replicates >= 1, "at least one replicate is required");
  require(design.arms.size() == design.arm_sizes.size(), "every arm needs a size");
  require(design.patient_fraction > 0.0 && design.patient_fraction < 1.0,
          "patient fraction must lie in (0, 1)");

  SimulationSummary summary;
  summary.replicates = config.replicates;
  summary.t_p = design.interim_time();
  summary.delta = config.delta.resolve(summary.t_p);

  std::vector<ReplicateResult> results(static_cast<std::size_t>(config.replicates));
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, config.replicates);

  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= config.replicates) return;
      try {
        CounterStream rng(config.seed, static_cast<std::uint64_t>(i));
        results[static_cast<std::size_t>(i)] =
            simulate_replicate(design, summary.delta, config.estimator, rng);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(config.replicates);
        return;
      }
      const int finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, config.replicates);
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  summary.arms.resize(design.arms.size());
  for (const auto& r : results) {
    if (!r.ok) {
      ++summary.failures;
      if (summary.failure_messages.size() < 5) summary.failure_messages.push_back(r.failure);
      continue;
    }
    summary.t_hat.push_back(r.t_hat);
    for (std::size_t a = 0; a < r.estimates.size(); ++a) {
      summary.arms[a].values.push_back(r.estimates[a]);
    }
  }
  if (summary.failures * 100 > config.replicates) {
    std::ostringstream msg;
    msg << "simulation failed: " << summary.failures << " of " << config.replicates
        << " replicates never reached the interim event target";
    if (!summary.failure_messages.empty()) msg << "; first: " << summary.failure_messages[0];
    fail(ErrorCode::simulation_failed, msg.str());
  }

  summary.t_hat_mean = mean_of(summary.t_hat);
  summary.t_hat_sd = std::sqrt(variance_of(summary.t_hat, summary.t_hat_mean));
  const auto [lo, hi] = std::minmax_element(summary.t_hat.begin(), summary.t_hat.end());
  summary.t_hat_min = *lo;
  summary.t_hat_max = *hi;
  for (std::size_t a = 0; a < summary.arms.size(); ++a) {
    auto& arm = summary.arms[a];
    arm.truth = design.arms[a].survival.survival(summary.t_p - summary.delta);
    arm.mean = mean_of(arm.values);
    arm.lower = empirical_quantile(arm.values, 0.025);
    arm.upper = empirical_quantile(arm.values, 0.975);
    arm.scaled_variance = design.arm_sizes[a] * variance_of(arm.values, arm.mean);
  }
  return summary;
}

AgreementReport compare_to_asymptotics(const SimulationSummary& summary, const InterimPlan& plan,
                                       double tolerance, int min_replicates) {
  require(tolerance >= 0.0, "tolerance must be non-negative");
  require(summary.arms.size() == plan.arms.size(), "summary and plan have different arms");
  require(std::abs(summary.t_p - plan.t_p) <= 1e-6 * std::max(1.0, plan.t_p) &&
              std::abs(summary.delta - plan.delta) <= 1e-6 * std::max(1.0, plan.delta),
          "summary and plan describe different designs");
  AgreementReport report;
  report.tolerance = tolerance;
  report.pass = true;
  for (std::size_t a = 0; a < plan.arms.size(); ++a) {
    const auto& sim = summary.arms[a];
    const auto& pi = plan.arms[a].interval;
    ArmComparison c;
    c.boundary = pi.lower < 0.0 || pi.upper > 1.0;
    c.diff_center = sim.mean - plan.arms[a].center;
    c.diff_lower = sim.lower - (c.boundary ? pi.clipped_lower : pi.lower);
    c.diff_upper = sim.upper - (c.boundary ? pi.clipped_upper : pi.upper);
    c.compared = static_cast<int>(sim.values.size()) > min_replicates;
    c.pass = !c.compared ||
             (std::abs(c.diff_center) <= tolerance && std::abs(c.diff_lower) <= tolerance &&
              std::abs(c.diff_upper) <= tolerance);
    report.pass = report.pass && c.pass;
    report.arms.push_back(c);
  }
  return report;
}

std::vector<double> coverage(const SimulationSummary& summary, const InterimPlan& plan) {
  require(summary.arms.size() == plan.arms.size(), "summary and plan have different arms");
  std::vector<double> out;
  for (std::size_t a = 0; a < plan.arms.size(); ++a) {
    const auto& values = summary.arms[a].values;
    const auto& pi = plan.arms[a].interval;
    std::size_t inside = 0;
    for (double v : values) inside += (v >= pi.lower && v <= pi.upper) ? 1 : 0;
    out.push_back(values.empty() ? 0.0 : static_cast<double>(inside) / values.size());
  }
  return out;
}

}  // namespace interimkm
