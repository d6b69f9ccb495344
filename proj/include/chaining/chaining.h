/* SPDX-License-Identifier: Apache-2.0 */
#ifndef CHAINING_H
#define CHAINING_H

#include <stddef.h>
#include <stdint.h>

#if defined(CHAINING_BUILDING_LIBRARY)
#define CHN_API __attribute__((visibility("default")))
#else
#define CHN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum chn_status {
  CHN_OK = 0,
  CHN_INVALID_ARGUMENT = 1,
  CHN_VALIDATION_ERROR = 2,
  CHN_DOMAIN_ERROR = 3,
  CHN_RESOURCE_ERROR = 4,
  CHN_PRECONDITION_ERROR = 5,
  CHN_IO_ERROR = 6,
  CHN_INTERNAL_ERROR = 7
} chn_status;

typedef enum chn_mode { CHN_MODE_DEFAULT = 0, CHN_MODE_EXACT = 1, CHN_MODE_GREEDY = 2 } chn_mode;

typedef struct chn_config chn_config;
typedef struct chn_report chn_report;

typedef struct chn_overrides {
  int has_samples;
  uint64_t samples;
  int has_seed;
  uint64_t seed;
  chn_mode mode;
} chn_overrides;

CHN_API const char* chn_version(void);
CHN_API const char* chn_status_name(chn_status status);

/* Message of the last failed call on this thread; "" if none. */
CHN_API const char* chn_last_error(void);

/* 0 restores the CHAINING_THREADS / hardware default. */
CHN_API chn_status chn_set_threads(size_t workers);
CHN_API size_t chn_threads(void);

CHN_API size_t chn_experiment_count(void);
CHN_API const char* chn_experiment_name(size_t index);

CHN_API chn_status chn_config_from_file(const char* path, chn_config** out);
CHN_API chn_status chn_config_from_string(const char* json, chn_config** out);
/* output.dir of the config, or NULL. Owned by the config. */
CHN_API const char* chn_config_output_dir(const chn_config* config);
CHN_API void chn_config_free(chn_config* config);

/* overrides may be NULL. Errors leave *out untouched. */
CHN_API chn_status chn_run(const char* experiment, const chn_config* config, const chn_overrides* overrides,
                           chn_report** out);

CHN_API int chn_report_pass(const chn_report* report);
/* Report text as written to report.json. Owned by the report. */
CHN_API const char* chn_report_json(const chn_report* report);
CHN_API const char* chn_report_config_hash(const chn_report* report);
CHN_API size_t chn_report_table_count(const chn_report* report);
CHN_API const char* chn_report_table_name(const chn_report* report, size_t index);
CHN_API const char* chn_report_table_csv(const chn_report* report, size_t index);
CHN_API chn_status chn_report_write(const chn_report* report, const char* dir);
CHN_API void chn_report_free(chn_report* report);

/* ||sum_i a_i X_i||_p for i.i.d. X_i described by a JSON model descriptor. */
CHN_API chn_status chn_combination_norm(const char* model_json, const double* coeffs, size_t count, double p,
                                        double* value, double* error_bound);

/* gamma_X of the basis {e_1..e_m} under an i.i.d. model (uniform space). */
CHN_API chn_status chn_basis_gamma(const char* model_json, size_t m, double* value);

#ifdef __cplusplus
}
#endif

#endif
