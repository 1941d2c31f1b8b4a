#ifndef MECW_MECW_H
#define MECW_MECW_H

#include <stddef.h>
#include <stdint.h>

#if defined(MECW_BUILDING_LIBRARY)
#define MECW_API __attribute__((visibility("default")))
#else
#define MECW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure a message describing the
 * last error on the calling thread is available from mecw_last_error(). */
typedef enum mecw_status {
  MECW_OK = 0,
  MECW_E_INVALID_ARGUMENT = 1,
  MECW_E_CAPACITY = 2,
  MECW_E_PARSE = 3,
  MECW_E_NOT_FOUND = 4,
  MECW_E_IO = 5,
  MECW_E_CORRUPT = 6,
  MECW_E_DEGENERATE_INPUT = 7,
  MECW_E_INSUFFICIENT_DATA = 8,
  MECW_E_TRANSPORT = 9,
  MECW_E_ORACLE_INTEGRITY = 10,
  MECW_E_NOT_ANALYZED = 11,
  MECW_E_ALREADY_EXISTS = 12,
  MECW_E_CREDENTIALS = 13,
  MECW_E_INTERNAL = 100
} mecw_status;

MECW_API const char* mecw_version(void);
MECW_API const char* mecw_status_name(mecw_status status);
/* Valid until the next failing call on the same thread. Never NULL. */
MECW_API const char* mecw_last_error(void);
/* Releases any string returned through a char** out-parameter. */
MECW_API void mecw_string_free(char* s);
/* Routes diagnostics to a file (appending). NULL or "" disables logging. */
MECW_API mecw_status mecw_set_log_file(const char* path);
/* Current log file path, or "" when logging is off. */
MECW_API mecw_status mecw_log_file(char** out);

/* ---- lexicons and datasets ---- */

typedef struct mecw_lexicons mecw_lexicons;
typedef struct mecw_dataset mecw_dataset;

MECW_API mecw_status mecw_lexicons_default(mecw_lexicons** out);
MECW_API mecw_status mecw_lexicons_load(const char* path, mecw_lexicons** out);
MECW_API void mecw_lexicons_free(mecw_lexicons* lex);
/* "sha256:<hex>" over the canonical lexicon content. */
MECW_API mecw_status mecw_lexicons_id(const mecw_lexicons* lex, char** out);

MECW_API mecw_status mecw_dataset_generate(const mecw_lexicons* lex, size_t rows, uint64_t seed,
                                           mecw_dataset** out);
MECW_API void mecw_dataset_free(mecw_dataset* ds);
MECW_API size_t mecw_dataset_size(const mecw_dataset* ds);
MECW_API mecw_status mecw_dataset_row(const mecw_dataset* ds, size_t index, char** sentence);
/* Writes one sentence per line. */
MECW_API mecw_status mecw_dataset_write(const mecw_dataset* ds, const char* path);

MECW_API mecw_status mecw_render_row(const mecw_lexicons* lex, const char* person, int count, const char* color,
                                     const char* item_singular, char** sentence);
/* Fields as a JSON object {"person_name","count","color","item"}. */
MECW_API mecw_status mecw_parse_row(const mecw_lexicons* lex, const char* sentence, char** fields_json);

/* ---- grading and arithmetic ---- */

/* expected_json is a JSON number (numeric tasks) or string (Sorted).
 * reason receives "", "unparseable", "wrong_value" or "empty". */
MECW_API mecw_status mecw_grade(const char* raw_response, const char* expected_json, int* correct, char** reason);
/* reported < 0 means no provider count is available. */
MECW_API int64_t mecw_count_tokens(const char* text, int64_t reported);
MECW_API mecw_status mecw_cascade_success(double per_agent_success, int64_t n_agents, double* out);
MECW_API mecw_status mecw_binomial_log10_p(int64_t n, int64_t k, double p0, double* out);
MECW_API mecw_status mecw_point_biserial(const int64_t* tokens, const int* correct, size_t n, double* r_pb,
                                         double* log10_p);
MECW_API mecw_status mecw_t_two_sided_log10_p(double t, double df, double* out);
/* log10 p-value in the report's scientific notation, e.g. "4.05E-244". */
MECW_API mecw_status mecw_format_log10_p(double log10_p, char** out);
/* Normalizes a "[task:]t0=..,w=..,ph=..,pl=.." profile string. */
MECW_API mecw_status mecw_profile_normalize(const char* spec, char** out);

/* ---- plans ---- */

typedef struct mecw_plan mecw_plan;

/* "default" for the built-in plan, otherwise a JSON file path. */
MECW_API mecw_status mecw_plan_load(const char* name_or_path, mecw_plan** out);
MECW_API void mecw_plan_free(mecw_plan* plan);
/* Sets both the dataset seed and the sweep seed. */
MECW_API mecw_status mecw_plan_set_seed(mecw_plan* plan, uint64_t seed);
MECW_API mecw_status mecw_plan_set_run_id(mecw_plan* plan, const char* run_id);
/* Replaces the plan's endpoints with those of a provider config file. */
MECW_API mecw_status mecw_plan_use_endpoint_config(mecw_plan* plan, const char* path);
/* Adds a simulated endpoint; each profile is "[task:]t0=..,w=..,ph=..,pl=..". */
MECW_API mecw_status mecw_plan_add_simulated(mecw_plan* plan, const char* model_id, const char* const* profiles,
                                             size_t n_profiles);
MECW_API mecw_status mecw_plan_to_json(const mecw_plan* plan, char** out);
/* Comma-separated names of unset credential variables, "" when complete. */
MECW_API mecw_status mecw_plan_missing_credentials(const mecw_plan* plan, char** out);

/* Summarizes a provider config file (one line per endpoint). */
MECW_API mecw_status mecw_validate_endpoint_config(const char* path, char** summary);

/* ---- runs ---- */

typedef struct mecw_sweep_options {
  /* 0 = run every cell. */
  uint64_t stop_after_trials;
  int sync_each_record;
  int max_retries;
  int64_t initial_backoff_ms;
} mecw_sweep_options;

MECW_API void mecw_sweep_options_default(mecw_sweep_options* options);

/* Runs the plan into <store_root>/<run id>/. lexicon_path may be NULL for the
 * built-in lexicon. outcome_json (optional) receives counters. */
MECW_API mecw_status mecw_sweep_run(const mecw_plan* plan, const char* store_root, const char* lexicon_path,
                                    const mecw_sweep_options* options, char** run_id, char** outcome_json);
MECW_API mecw_status mecw_sweep_resume(const char* store_root, const char* run_id, const mecw_sweep_options* options,
                                       char** outcome_json);

typedef enum mecw_method { MECW_METHOD_THRESHOLD_SUSTAINED = 0, MECW_METHOD_CHANGEPOINT_BERNOULLI = 1 } mecw_method;

typedef struct mecw_analysis_config {
  int64_t bucket_width;        /* non-Needle tasks */
  int64_t needle_bucket_width; /* Needle */
  double p0;
  mecw_method method;
  double delta;
  int k_sustain;
  int baseline_buckets;
  double min_gain;
} mecw_analysis_config;

MECW_API void mecw_analysis_config_default(mecw_analysis_config* config);

/* Stores <run>/analysis/analysis.json; summary receives a text overview. */
MECW_API mecw_status mecw_analyze(const char* store_root, const char* run_id, const mecw_analysis_config* config,
                                  char** summary);
/* Re-estimates stored bucket statistics with the estimator fields of config
 * (bucket widths and p0 are ignored). table receives one line per series. */
MECW_API mecw_status mecw_estimate(const char* store_root, const char* run_id, const mecw_analysis_config* config,
                                   char** table);
/* tasks_csv: comma-separated task names, NULL for all, "" for none.
 * listing receives written paths and notices, one per line. */
MECW_API mecw_status mecw_report(const char* store_root, const char* run_id, const char* tasks_csv, char** listing);

#ifdef __cplusplus
}
#endif

#endif
