#ifndef RIDGEFIND_H
#define RIDGEFIND_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rf_status {
  RF_OK = 0,
  RF_ERR_INPUT = 1,
  RF_ERR_CONFIG = 2,
  RF_ERR_BUDGET = 3,
  RF_ERR_NUMERICAL = 4,
  RF_ERR_GENERATION = 5,
  RF_ERR_UNSUPPORTED = 6,
  RF_ERR_IO = 7,
  RF_ERR_INTERNAL = 8
} rf_status;

typedef enum rf_scope {
  RF_SCOPE_FULL = 0,
  RF_SCOPE_SEARCH = 1,  /* stop after directions.json */
  RF_SCOPE_RECOVER = 2  /* read directions.json from the run directory */
} rf_scope;

typedef struct rf_instance rf_instance;
typedef struct rf_oracle rf_oracle;
typedef struct rf_report rf_report;

/* Message of the last failing call on this thread; never NULL. */
const char* rf_last_error_message(void);
const char* rf_status_name(rf_status status);

/* Strings returned through char** out-parameters are owned by the caller. */
void rf_string_free(char* s);

/* Reads an experiment config file, resolving a relative instance_file against
   the config's directory, and returns it as JSON text. */
rf_status rf_config_load(const char* path, char** out_json);

/* Builds the instance an experiment config names (inline spec or file). */
rf_status rf_instance_from_config(const char* config_json, rf_instance** out);
rf_status rf_instance_load(const char* path, rf_instance** out);
rf_status rf_instance_save(const rf_instance* inst, const char* path);
rf_status rf_instance_json(const rf_instance* inst, char** out_json);
rf_status rf_instance_dim(const rf_instance* inst, size_t* out);
rf_status rf_instance_size(const rf_instance* inst, size_t* out);
/* Noise-free f(x). */
rf_status rf_instance_evaluate(const rf_instance* inst, const double* x, size_t dim, double* out);
void rf_instance_free(rf_instance* inst);

/* Query oracle carrying the instance's noise. Safe for concurrent queries. */
rf_status rf_oracle_create(const rf_instance* inst, rf_oracle** out);
rf_status rf_oracle_query(rf_oracle* oracle, const double* x, size_t dim, double* out);
rf_status rf_oracle_count(const rf_oracle* oracle, uint64_t* out);
void rf_oracle_free(rf_oracle* oracle);

/* Runs the pipeline the config describes. out_dir may be NULL (no artifacts).
   Stage failures are reported inside the report, not through the status. */
rf_status rf_run_experiment(const char* config_json, const char* out_dir, rf_scope scope, rf_report** out);
/* Recomputes metrics from a run directory's artifacts. */
rf_status rf_render_report(const char* run_dir, rf_report** out);

/* stable != 0 drops wall-clock fields. */
rf_status rf_report_json(const rf_report* report, int stable, char** out_json);
rf_status rf_report_passed(const rf_report* report, int* out);
/* RF_OK when every stage succeeded, otherwise the failing stage's error kind. */
rf_status rf_report_failure(const rf_report* report, rf_status* out);
void rf_report_free(rf_report* report);

#ifdef __cplusplus
}
#endif

#endif
