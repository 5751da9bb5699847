#ifndef INTERIMKM_H
#define INTERIMKM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IKM_API __declspec(dllexport)
#else
#define IKM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ikm_status {
  IKM_OK = 0,
  IKM_ERR_INVALID_ARGUMENT = 1,
  IKM_ERR_INVALID_CONFIG = 2,
  IKM_ERR_DOMAIN = 3,
  IKM_ERR_SIMULATION = 4,
  IKM_ERR_INTERNAL = 5
} ikm_status;

typedef struct ikm_survival ikm_survival;
typedef struct ikm_accrual ikm_accrual;
typedef struct ikm_result ikm_result;

typedef struct ikm_variance {
  double term_estimation;
  double term_timing;
  double term_cross;
  double total;
} ikm_variance;

typedef struct ikm_interval {
  double center;
  double sigma;
  double lower;
  double upper;
  double clipped_lower;
  double clipped_upper;
} ikm_interval;

typedef struct ikm_run_options {
  int has_seed;
  uint64_t seed;
  int replicates;      /* 0 keeps the configured count */
  double tolerance;    /* Monte Carlo vs asymptotic endpoint tolerance */
  int clip_bounds;
  int threads;         /* 0 picks the hardware concurrency */
  int dump;            /* keep per-replicate values */
  int max_replicates;  /* 0 means unlimited */
} ikm_run_options;

typedef void (*ikm_progress_fn)(int done, int total, void* user);

IKM_API const char* ikm_version(void);

/* Message of the last failed call on this thread, or "" */
IKM_API const char* ikm_last_error(void);
/* Same failure as a JSON object {"status", "error", "message", "diagnostics"} */
IKM_API const char* ikm_last_error_json(void);

IKM_API void ikm_run_options_init(ikm_run_options* options);

/* Config-driven entry points; JSON in, result handle out. */
IKM_API ikm_status ikm_design_json(const char* config_json, ikm_result** out);
IKM_API ikm_status ikm_plan_json(const char* config_json, const ikm_run_options* options,
                                 ikm_result** out);
IKM_API ikm_status ikm_simulate_json(const char* config_json, const ikm_run_options* options,
                                     ikm_progress_fn progress, void* user, ikm_result** out);
/* Total replicates a simulate call would run, without running it. */
IKM_API ikm_status ikm_requested_replicates(const char* config_json,
                                            const ikm_run_options* options, long long* out);

IKM_API const char* ikm_result_json(const ikm_result* result);
IKM_API const char* ikm_result_csv(const ikm_result* result);
IKM_API const char* ikm_result_dump_csv(const ikm_result* result);
/* 1 when every Monte Carlo comparison is within tolerance */
IKM_API int ikm_result_passed(const ikm_result* result);
IKM_API void ikm_result_free(ikm_result* result);

/* Model handles */
IKM_API ikm_status ikm_survival_exponential(double rate, ikm_survival** out);
IKM_API ikm_status ikm_survival_exponential_median(double median, ikm_survival** out);
IKM_API ikm_status ikm_survival_weibull(double shape, double scale, ikm_survival** out);
IKM_API ikm_status ikm_survival_scaled(const ikm_survival* base, double hazard_ratio,
                                       ikm_survival** out);
IKM_API ikm_status ikm_survival_eval(const ikm_survival* model, double t, double* survival);
IKM_API void ikm_survival_free(ikm_survival* model);

IKM_API ikm_status ikm_accrual_uniform(double duration, ikm_accrual** out);
IKM_API ikm_status ikm_accrual_truncated(double duration, double at, ikm_accrual** out);
IKM_API void ikm_accrual_free(ikm_accrual* accrual);

/* Building blocks */
IKM_API ikm_status ikm_schoenfeld_events(double hazard_ratio, double alpha, double power,
                                         double q_a, double q_b, int* out);
IKM_API ikm_status ikm_solve_tp(const ikm_survival* const* arms, const double* weights,
                                size_t n_arms, const ikm_accrual* accrual, double p,
                                double* out);
IKM_API ikm_status ikm_sigma2_two_arm(const ikm_survival* const* arms, const double* weights,
                                      size_t n_arms, const ikm_accrual* accrual, size_t arm,
                                      double p, double t_p, double delta, ikm_variance* out);
IKM_API ikm_status ikm_prediction_interval(double center, double sigma, double n_arm,
                                           double alpha, ikm_interval* out);

#ifdef __cplusplus
}
#endif

#endif
