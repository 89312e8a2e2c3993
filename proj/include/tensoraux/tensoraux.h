#ifndef TENSORAUX_H
#define TENSORAUX_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TA_API __declspec(dllexport)
#else
#define TA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ta_status {
  TA_OK = 0,
  TA_ERR_USAGE = 1,
  TA_ERR_CHECK_FAILED = 2,  /* an asserted inequality did not hold */
  TA_ERR_INVALID_ARGUMENT = 3,
  TA_ERR_IO = 4,            /* unreadable file or malformed input */
  TA_ERR_NUMERICAL = 5,     /* solver failure: singular shift, stalled line search, budget */
  TA_ERR_INTERNAL = 6
} ta_status;

typedef struct ta_oracle ta_oracle;
typedef struct ta_result ta_result;

/* Negative values of nu, H_f and R0 mean "unset". H <= 0 selects 2 H_f
 * (or 1 when H_f = 0). */
typedef struct ta_config {
  double H;
  double theta;
  double eps;
  double L0;
  double R0;
  double nu;
  double H_f;
  uint64_t seed;
  size_t max_outer;
  size_t max_inner;
} ta_config;

TA_API void ta_config_default(ta_config* cfg);

/* name: quadratic, separable_quartic (quartic), log_sum_exp (lse), logistic,
 * or csv:<path>. n is ignored for csv: oracles. */
TA_API ta_status ta_oracle_create(const char* name, size_t n, ta_oracle** out);
TA_API void ta_oracle_destroy(ta_oracle* oracle);
TA_API size_t ta_oracle_dim(const ta_oracle* oracle);
TA_API const char* ta_oracle_name(const ta_oracle* oracle);
TA_API ta_status ta_oracle_holder(const ta_oracle* oracle, double* nu, double* H_f);
/* Writes the default starting point (dim entries) to x. */
TA_API ta_status ta_oracle_default_center(const ta_oracle* oracle, double* x);
/* f(x) and, when grad is non-null, the gradient (dim entries). */
TA_API ta_status ta_oracle_eval(const ta_oracle* oracle, const double* x, double* f, double* grad);

/* Every run function takes x = NULL to mean the default center. The result
 * is returned even when a certificate or invariant check fails; see
 * ta_result_passed. */
TA_API ta_status ta_run_check(const ta_oracle* oracle, const double* x, const ta_config* cfg, ta_result** out);
/* ball_radius > 0 solves the composite model with the indicator of a ball
 * around x. */
TA_API ta_status ta_solve_model(const ta_oracle* oracle, const double* x, const ta_config* cfg, double ball_radius,
                                ta_result** out);
TA_API ta_status ta_minimize(const ta_oracle* oracle, const double* x, const ta_config* cfg, ta_result** out);
TA_API ta_status ta_bench_regimes(const ta_oracle* oracle, const double* x, const double* H_list, size_t n_H,
                                  const ta_config* cfg, ta_result** out);
TA_API ta_status ta_report(const char* csv_text, const char* json_text, ta_result** out);

/* Owned by the result; empty string when the command produces no CSV. */
TA_API const char* ta_result_csv(const ta_result* result);
TA_API const char* ta_result_json(const ta_result* result);
TA_API int ta_result_passed(const ta_result* result);
TA_API void ta_result_destroy(ta_result* result);

/* Message of the last failed call on this thread. */
TA_API const char* ta_last_error(void);
TA_API const char* ta_status_string(ta_status status);

#ifdef __cplusplus
}
#endif

#endif
