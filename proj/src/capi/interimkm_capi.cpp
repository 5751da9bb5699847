#include "interimkm/interimkm.h"

#include <json.hpp>

#include <exception>
#include <new>
#include <string>

#include "core/calendar_model.hpp"
#include "core/scenario.hpp"

using namespace interimkm;

struct ikm_survival {
  SurvivalModel model;
};

struct ikm_accrual {
  AccrualModel model;
};

struct ikm_result {
  Report report;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_error_json;

const char* status_name(ikm_status s) {
  switch (s) {
    case IKM_OK: return "ok";
    case IKM_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case IKM_ERR_INVALID_CONFIG: return "invalid_config";
    case IKM_ERR_DOMAIN: return "domain_error";
    case IKM_ERR_SIMULATION: return "simulation_failed";
    default: return "internal_error";
  }
}

const char* code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::infeasible_design: return "infeasible_design";
    case ErrorCode::immature_design: return "immature_design";
    case ErrorCode::boundary_of_support: return "boundary_of_support";
    case ErrorCode::singular_timing: return "singular_timing";
    case ErrorCode::insufficient_events: return "insufficient_events";
    case ErrorCode::simulation_failed: return "simulation_failed";
  }
  return "internal_error";
}

ikm_status record(ikm_status status, const std::string& kind, const std::string& message,
                  const std::vector<Diagnostic>& diagnostics = {}) {
  last_error = message;
  nlohmann::ordered_json j;
  j["status"] = status_name(status);
  j["error"] = kind;
  j["message"] = message;
  j["diagnostics"] = nlohmann::ordered_json::array();
  for (const auto& d : diagnostics) {
    j["diagnostics"].push_back({{"path", d.path}, {"message", d.message}});
  }
  last_error_json = j.dump();
  return status;
}

template <class F>
ikm_status guarded(F&& body) {
  last_error.clear();
  last_error_json.clear();
  try {
    body();
    return IKM_OK;
  } catch (const ConfigError& e) {
    return record(IKM_ERR_INVALID_CONFIG, "invalid_config", e.what(), e.diagnostics());
  } catch (const Error& e) {
    ikm_status status = IKM_ERR_DOMAIN;
    if (e.code() == ErrorCode::invalid_argument) status = IKM_ERR_INVALID_ARGUMENT;
    if (e.code() == ErrorCode::invalid_config) status = IKM_ERR_INVALID_CONFIG;
    if (e.code() == ErrorCode::simulation_failed) status = IKM_ERR_SIMULATION;
    return record(status, code_name(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(IKM_ERR_INTERNAL, "internal_error", "out of memory");
  } catch (const std::exception& e) {
    return record(IKM_ERR_INTERNAL, "internal_error", e.what());
  } catch (...) {
    return record(IKM_ERR_INTERNAL, "internal_error", "unknown failure");
  }
}

void check_out(const void* p) { require(p != nullptr, "output pointer is null"); }

RunOptions to_options(const ikm_run_options* in) {
  ikm_run_options defaults;
  ikm_run_options_init(&defaults);
  const ikm_run_options& o = in ? *in : defaults;
  RunOptions out;
  if (o.has_seed) out.seed = o.seed;
  if (o.replicates > 0) out.replicates = o.replicates;
  require(o.replicates >= 0, "replicates must be non-negative");
  require(o.tolerance >= 0.0, "tolerance must be non-negative");
  out.tolerance = o.tolerance;
  out.clip_bounds = o.clip_bounds != 0;
  out.threads = o.threads;
  out.dump = o.dump != 0;
  out.max_replicates = o.max_replicates;
  return out;
}

std::vector<ScenarioConfig> parse(const char* config_json) {
  require(config_json != nullptr, "config text is null");
  return parse_scenarios(config_json);
}

std::vector<ArmSpec> gather_arms(const ikm_survival* const* arms, const double* weights,
                                 size_t n_arms) {
  require(arms != nullptr && weights != nullptr && n_arms > 0, "arms and weights are required");
  std::vector<ArmSpec> out;
  for (size_t i = 0; i < n_arms; ++i) {
    require(arms[i] != nullptr, "arm model is null");
    out.push_back({arms[i]->model, weights[i]});
  }
  return out;
}

}  // namespace

extern "C" {

const char* ikm_version(void) { return "1.0.0"; }

const char* ikm_last_error(void) { return last_error.c_str(); }

const char* ikm_last_error_json(void) { return last_error_json.c_str(); }

void ikm_run_options_init(ikm_run_options* options) {
  if (!options) return;
  options->has_seed = 0;
  options->seed = 0;
  options->replicates = 0;
  options->tolerance = 0.03;
  options->clip_bounds = 0;
  options->threads = 0;
  options->dump = 0;
  options->max_replicates = 0;
}

ikm_status ikm_design_json(const char* config_json, ikm_result** out) {
  return guarded([&] {
    check_out(out);
    *out = nullptr;
    auto report = design_report(parse(config_json));
    *out = new ikm_result{std::move(report)};
  });
}

ikm_status ikm_plan_json(const char* config_json, const ikm_run_options* options,
                         ikm_result** out) {
  return guarded([&] {
    check_out(out);
    *out = nullptr;
    auto report = plan_report(parse(config_json), to_options(options));
    *out = new ikm_result{std::move(report)};
  });
}

ikm_status ikm_simulate_json(const char* config_json, const ikm_run_options* options,
                             ikm_progress_fn progress, void* user, ikm_result** out) {
  return guarded([&] {
    check_out(out);
    *out = nullptr;
    RunOptions opts = to_options(options);
    if (progress) opts.progress = [progress, user](int done, int total) { progress(done, total, user); };
    auto report = simulate_report(parse(config_json), opts);
    *out = new ikm_result{std::move(report)};
  });
}

ikm_status ikm_requested_replicates(const char* config_json, const ikm_run_options* options,
                                    long long* out) {
  return guarded([&] {
    check_out(out);
    *out = requested_replicates(parse(config_json), to_options(options));
  });
}

const char* ikm_result_json(const ikm_result* result) {
  return result ? result->report.json.c_str() : "";
}

const char* ikm_result_csv(const ikm_result* result) {
  return result ? result->report.csv.c_str() : "";
}

const char* ikm_result_dump_csv(const ikm_result* result) {
  return result ? result->report.dump_csv.c_str() : "";
}

int ikm_result_passed(const ikm_result* result) { return result && result->report.pass ? 1 : 0; }

void ikm_result_free(ikm_result* result) { delete result; }

ikm_status ikm_survival_exponential(double rate, ikm_survival** out) {
  return guarded([&] {
    check_out(out);
    *out = new ikm_survival{SurvivalModel::exponential(rate)};
  });
}

ikm_status ikm_survival_exponential_median(double median, ikm_survival** out) {
  return guarded([&] {
    check_out(out);
    *out = new ikm_survival{SurvivalModel::exponential_median(median)};
  });
}

ikm_status ikm_survival_weibull(double shape, double scale, ikm_survival** out) {
  return guarded([&] {
    check_out(out);
    *out = new ikm_survival{SurvivalModel::weibull(shape, scale)};
  });
}

ikm_status ikm_survival_scaled(const ikm_survival* base, double hazard_ratio, ikm_survival** out) {
  return guarded([&] {
    check_out(out);
    require(base != nullptr, "base model is null");
    *out = new ikm_survival{base->model.scaled_hazard(hazard_ratio)};
  });
}

ikm_status ikm_survival_eval(const ikm_survival* model, double t, double* survival) {
  return guarded([&] {
    check_out(survival);
    require(model != nullptr, "model is null");
    *survival = model->model.survival(t);
  });
}

void ikm_survival_free(ikm_survival* model) { delete model; }

ikm_status ikm_accrual_uniform(double duration, ikm_accrual** out) {
  return guarded([&] {
    check_out(out);
    *out = new ikm_accrual{AccrualModel::uniform(duration)};
  });
}

ikm_status ikm_accrual_truncated(double duration, double at, ikm_accrual** out) {
  return guarded([&] {
    check_out(out);
    *out = new ikm_accrual{AccrualModel::truncated(duration, at)};
  });
}

void ikm_accrual_free(ikm_accrual* accrual) { delete accrual; }

ikm_status ikm_schoenfeld_events(double hazard_ratio, double alpha, double power, double q_a,
                                 double q_b, int* out) {
  return guarded([&] {
    check_out(out);
    *out = schoenfeld_events(hazard_ratio, alpha, power, q_a, q_b);
  });
}

ikm_status ikm_solve_tp(const ikm_survival* const* arms, const double* weights, size_t n_arms,
                        const ikm_accrual* accrual, double p, double* out) {
  return guarded([&] {
    check_out(out);
    require(accrual != nullptr, "accrual is null");
    const auto specs = gather_arms(arms, weights, n_arms);
    *out = solve_tp(specs, accrual->model, p);
  });
}

ikm_status ikm_sigma2_two_arm(const ikm_survival* const* arms, const double* weights,
                              size_t n_arms, const ikm_accrual* accrual, size_t arm, double p,
                              double t_p, double delta, ikm_variance* out) {
  return guarded([&] {
    check_out(out);
    require(accrual != nullptr, "accrual is null");
    const CalendarDistributions cd(gather_arms(arms, weights, n_arms), accrual->model, t_p);
    const auto v = sigma2_two_arm(cd, arm, p, t_p, delta);
    *out = {v.term_estimation, v.term_timing, v.term_cross, v.total};
  });
}

ikm_status ikm_prediction_interval(double center, double sigma, double n_arm, double alpha,
                                   ikm_interval* out) {
  return guarded([&] {
    check_out(out);
    const auto pi = prediction_interval(center, sigma, n_arm, alpha);
    *out = {pi.center, pi.sigma, pi.lower, pi.upper, pi.clipped_lower, pi.clipped_upper};
  });
}

}  // extern "C"
