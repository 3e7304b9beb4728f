/*
 * chainwatch C API.
 *
 * Every function returns a cw_status. On failure a human-readable message is
 * available from cw_last_error() on the calling thread until the next call.
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function. Strings returned through char** out-parameters are
 * heap-allocated and must be released with cw_string_free.
 */
#ifndef CHAINWATCH_H
#define CHAINWATCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CHAINWATCH_BUILD)
#    define CW_API __declspec(dllexport)
#  else
#    define CW_API __declspec(dllimport)
#  endif
#else
#  define CW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cw_status {
  CW_OK = 0,
  CW_ERR_MALFORMED_JSON = 1,
  CW_ERR_MISSING_FIELD = 2,
  CW_ERR_BAD_TIMESTAMP = 3,
  CW_ERR_IO = 4,
  CW_ERR_FORMAT_VERSION = 5,
  CW_ERR_EMPTY_TRAINING_SET = 6,
  CW_ERR_NO_MODEL_FOR_LENGTH = 7,
  CW_ERR_EMPTY_PREFIX_TABLE = 8,
  CW_ERR_TOO_FEW_SESSIONS = 9,
  CW_ERR_INSUFFICIENT_DATA = 10,
  CW_ERR_INVALID_SPEC = 11,
  CW_ERR_INVALID_ARGUMENT = 12,
  CW_ERR_INTERNAL = 13
} cw_status;

typedef struct cw_corpus cw_corpus;
typedef struct cw_model cw_model;
typedef struct cw_report cw_report;

CW_API const char* cw_version(void);
CW_API const char* cw_status_name(cw_status status);
CW_API const char* cw_last_error(void);
CW_API void cw_string_free(char* str);

/* ---- ingest / corpus ---------------------------------------------------- */

typedef struct cw_ingest_stats {
  uint64_t lines;
  uint64_t events;         /* parsed records of any type */
  uint64_t command_events; /* records kept in the corpus */
  uint64_t sessions;
  uint64_t errors;         /* malformed lines, skipped */
} cw_ingest_stats;

/* Called once per skipped line with a "file:line: reason" diagnostic. */
typedef void (*cw_diagnostic_fn)(const char* diagnostic, void* user);

/* Parses Cowrie JSON-lines files ("-" is standard input; gzip is detected),
 * keeps command events and groups them into sessions. Succeeds even with
 * zero events; callers decide whether that is an error. */
CW_API cw_status cw_ingest(const char* const* paths, size_t n_paths,
                           cw_diagnostic_fn on_diagnostic, void* user,
                           cw_corpus** out, cw_ingest_stats* stats);

CW_API cw_status cw_corpus_load(const char* path, cw_corpus** out);
CW_API cw_status cw_corpus_save(const cw_corpus* corpus, const char* path);
CW_API size_t cw_corpus_session_count(const cw_corpus* corpus);
CW_API size_t cw_corpus_event_count(const cw_corpus* corpus);
CW_API void cw_corpus_free(cw_corpus* corpus);

/* ---- synthetic corpora -------------------------------------------------- */

CW_API cw_status cw_spec_default_json(uint64_t seed, char** out_json);
/* Generates a corpus from a generator spec in JSON form. When has_seed is
 * non-zero, `seed` replaces the spec's seed. */
CW_API cw_status cw_generate(const char* spec_json, int has_seed, uint64_t seed,
                             cw_corpus** out);

/* ---- model -------------------------------------------------------------- */

CW_API cw_status cw_model_train(const cw_corpus* corpus, int k_min, int k_max,
                                cw_model** out);
CW_API cw_status cw_model_load(const char* path, cw_model** out);
CW_API cw_status cw_model_save(const cw_model* model, const char* path);
/* Number of training windows of length k (0 when the model has no table). */
CW_API uint64_t cw_model_window_count(const cw_model* model, int k);
/* Smallest / largest window length with a table; 0 for an empty model. */
CW_API int cw_model_k_min(const cw_model* model);
CW_API int cw_model_k_max(const cw_model* model);
CW_API size_t cw_model_vocab_size(const cw_model* model);
CW_API void cw_model_free(cw_model* model);

/* Predicts the command following `commands` using the table for
 * k = n_commands + 1. The result is a JSON object with predicted_command,
 * predicted, matched_prefix, matched_commands, distance, distance_edits,
 * distance_total, match_frequency, label_count, distance_ties and exact. */
CW_API cw_status cw_model_predict(const cw_model* model,
                                  const char* const* commands,
                                  size_t n_commands, char** out_json);

/* ---- evaluation --------------------------------------------------------- */

typedef struct cw_eval_options {
  int k_min;
  int k_max;
  double split_ratio;
  uint64_t seed;
  uint64_t sample_limit; /* 0 = no limit */
  int sample_by_sessions; /* non-zero: limit counts sessions, else windows */
  unsigned jobs;
  int timing_repeats;
} cw_eval_options;

/* Defaults: k 3..11, ratio 0.8, seed 0, no limit, 1 job, 3 timing repeats. */
CW_API void cw_eval_options_init(cw_eval_options* options);

CW_API cw_status cw_evaluate(const cw_corpus* corpus,
                             const cw_eval_options* options, cw_report** out);
CW_API cw_status cw_report_json(const cw_report* report, int with_timing,
                                char** out);
CW_API cw_status cw_report_csv(const cw_report* report, int with_timing,
                               char** out);
CW_API cw_status cw_report_table(const cw_report* report, char** out);
CW_API void cw_report_free(cw_report* report);

/* JSON array of {"commands":[...],"frequency":n}. */
CW_API cw_status cw_top_sequences(const cw_corpus* corpus, int k, size_t n,
                                  char** out_json);

/* JSON array of {"size","n_test","train_time_s","test_time_s","accuracy"}. */
CW_API cw_status cw_scaling(const cw_corpus* corpus, const uint64_t* sizes,
                            size_t n_sizes, int k, uint64_t seed,
                            char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* CHAINWATCH_H */
