/* C API smoke test, compiled as C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "chaining/chaining.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static const char* kTwoPoint =
    "{\"process\": {\"family\": \"gaussian\"},"
    " \"index_set\": {\"points\": [[0.0], [1.0]]},"
    " \"params\": {\"mode\": \"exact\", \"functional\": \"gamma2\", \"expect\": 1.0}}";

static const char* kSupremum =
    "{\"process\": {\"family\": \"rademacher\"},"
    " \"index_set\": {\"generator\": \"basis\", \"n\": 8},"
    " \"params\": {\"samples\": 20000, \"seed\": 5},"
    " \"output\": {\"dir\": \"unused\"}}";

int main(void) {
  EXPECT(strcmp(chn_status_name(CHN_OK), "ok") == 0);
  EXPECT(strlen(chn_version()) > 0);
  EXPECT(chn_experiment_count() == 8);
  EXPECT(chn_experiment_name(8) == NULL);

  chn_config* cfg = NULL;
  EXPECT(chn_config_from_string(kTwoPoint, &cfg) == CHN_OK);
  EXPECT(chn_config_output_dir(cfg) == NULL);
  chn_report* rep = NULL;
  EXPECT(chn_run("gamma", cfg, NULL, &rep) == CHN_OK);
  EXPECT(chn_report_pass(rep) == 1);
  EXPECT(strstr(chn_report_json(rep), "\"value\": 1.0") != NULL);
  EXPECT(strlen(chn_report_config_hash(rep)) == 16);
  EXPECT(chn_report_table_count(rep) == 1);
  EXPECT(strcmp(chn_report_table_name(rep, 0), "distance_matrix.csv") == 0);
  chn_report_free(rep);

  /* unknown experiment */
  rep = NULL;
  EXPECT(chn_run("no-such", cfg, NULL, &rep) == CHN_VALIDATION_ERROR);
  EXPECT(rep == NULL);
  EXPECT(strlen(chn_last_error()) > 0);
  chn_config_free(cfg);

  EXPECT(chn_config_from_string("{not json", &cfg) == CHN_VALIDATION_ERROR);
  EXPECT(chn_config_from_file("/nonexistent/config.json", &cfg) == CHN_IO_ERROR);
  EXPECT(chn_run(NULL, NULL, NULL, NULL) == CHN_INVALID_ARGUMENT);

  EXPECT(chn_config_from_string(kSupremum, &cfg) == CHN_OK);
  EXPECT(strcmp(chn_config_output_dir(cfg), "unused") == 0);
  chn_report* a = NULL;
  chn_report* b = NULL;
  chn_overrides ov = {0, 0, 0, 0, CHN_MODE_DEFAULT};
  EXPECT(chn_set_threads(1) == CHN_OK);
  EXPECT(chn_threads() == 1);
  EXPECT(chn_run("supremum", cfg, &ov, &a) == CHN_OK);
  EXPECT(chn_set_threads(8) == CHN_OK);
  EXPECT(chn_run("supremum", cfg, &ov, &b) == CHN_OK);
  EXPECT(strcmp(chn_report_json(a), chn_report_json(b)) == 0);
  chn_report_free(b);
  ov.has_seed = 1;
  ov.seed = 6;
  EXPECT(chn_run("supremum", cfg, &ov, &b) == CHN_OK);
  EXPECT(strcmp(chn_report_config_hash(a), chn_report_config_hash(b)) != 0);
  chn_report_free(a);
  chn_report_free(b);
  EXPECT(chn_set_threads(0) == CHN_OK);

  /* sampled experiments need a seed */
  ov.has_seed = 0;
  chn_config_free(cfg);
  EXPECT(chn_config_from_string("{\"process\": {\"family\": \"gaussian\"}, \"index_set\": {\"points\": [[1]]}}",
                                &cfg) == CHN_OK);
  EXPECT(chn_run("supremum", cfg, &ov, &a) == CHN_VALIDATION_ERROR);
  EXPECT(strstr(chn_last_error(), "params.seed") != NULL);
  chn_config_free(cfg);

  double v = 0.0;
  double err = -1.0;
  const double coeffs[2] = {1.0, 1.0};
  EXPECT(chn_combination_norm("{\"family\": \"rademacher\"}", coeffs, 2, 4.0, &v, &err) == CHN_OK);
  EXPECT(fabs(v - pow(8.0, 0.25)) < 1e-12); /* E|e1 + e2|^4 = 8 */
  EXPECT(err == 0.0);
  EXPECT(chn_combination_norm("{\"family\": \"nope\"}", coeffs, 2, 4.0, &v, &err) == CHN_VALIDATION_ERROR);
  EXPECT(chn_combination_norm("{\"family\": \"gaussian\"}", coeffs, 2, 0.5, &v, &err) == CHN_DOMAIN_ERROR);

  EXPECT(chn_basis_gamma("{\"family\": \"rademacher\"}", 257, &v) == CHN_OK);
  EXPECT(fabs(v - (1.0 + sqrt(2.0) + pow(8.0, 0.25) + pow(128.0, 0.125))) < 1e-12);

  if (failures == 0) printf("capi_test: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
