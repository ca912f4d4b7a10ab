/*
    Copyright 2026 The stepcorr Authors

    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/
#ifndef STEPCORR_STEPCORR_H
#define STEPCORR_STEPCORR_H

/*
 * C interface to the stepcorr engine: Shewhart change detection, stepwise
 * Markov event correlation, the partial-matching baseline, the evaluation
 * harness and the self-similarity diagnostics.
 *
 * Every function returns an sc_status. On failure, sc_last_error() holds a
 * message for the calling thread until the next failing call. Handles are
 * opaque and owned by the caller; release them with the matching *_destroy.
 * Strings returned through char** out-parameters are released with
 * sc_string_free.
 *
 * Event sets cross the boundary as arrays of 1-based stream indices.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define STEPCORR_API __declspec(dllexport)
#else
#define STEPCORR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sc_status {
    SC_OK = 0,
    SC_ERR_INVALID_ARGUMENT = 1,
    SC_ERR_PARSE = 2,
    SC_ERR_IO = 3,
    SC_ERR_UNDEFINED_MODEL = 4,
    SC_ERR_UNDEFINED_CONDITIONAL = 5,
    SC_ERR_NUMERIC = 6,
    SC_ERR_OVERFLOW = 7,
    SC_ERR_BUFFER_TOO_SMALL = 8,
    SC_ERR_INTERNAL = 9
} sc_status;

typedef enum sc_compare_mode { SC_COMPARE_BEFORE_UPDATE = 0, SC_COMPARE_UPDATE_FIRST = 1 } sc_compare_mode;
typedef enum sc_forecast_mode { SC_FORECAST_MARGINAL = 0, SC_FORECAST_FROM_CURRENT = 1 } sc_forecast_mode;
typedef enum sc_bound_policy { SC_BOUND_RANDOM = 0, SC_BOUND_LOWEST_INDEX = 1 } sc_bound_policy;
typedef enum sc_engine { SC_ENGINE_STEPWISE = 0, SC_ENGINE_PM = 1 } sc_engine;

STEPCORR_API const char* sc_version(void);
STEPCORR_API const char* sc_last_error(void);
STEPCORR_API const char* sc_status_name(sc_status status);
STEPCORR_API void sc_string_free(char* text);

/* ---- change detection ------------------------------------------------- */

typedef struct sc_detector_bank sc_detector_bank;

STEPCORR_API sc_status sc_detector_bank_create(size_t n, double tightness, uint64_t warmup, sc_compare_mode mode,
                                               sc_detector_bank** out);
STEPCORR_API void sc_detector_bank_destroy(sc_detector_bank* bank);
/* Feeds one context vector of n values; writes n bits (0/1) to bits_out. */
STEPCORR_API sc_status sc_detector_bank_step(sc_detector_bank* bank, const double* values, size_t n,
                                             uint8_t* bits_out);
/* Running mean/std and current control limits of stream i (0-based). */
STEPCORR_API sc_status sc_detector_bank_stats(const sc_detector_bank* bank, size_t stream, uint64_t* count,
                                              double* mean, double* stddev, double* ucl, double* lcl);

/* ---- event model ------------------------------------------------------ */

/* Sum of C(n, i) for i = 0..k. */
STEPCORR_API sc_status sc_count_bounded_states(size_t n, size_t max_combo_k, uint64_t* out);
/* Reduces a state to at most max_combo_k members; out_members needs max_combo_k slots. */
STEPCORR_API sc_status sc_bound_state(const uint16_t* members, size_t len, size_t max_combo_k, sc_bound_policy policy,
                                      uint64_t seed, uint64_t step, uint16_t* out_members, size_t* out_len);

/* ---- stepwise correlation graph ---------------------------------------- */

typedef struct sc_graph sc_graph;

/* n = number of event types, or 0 to skip range checks. */
STEPCORR_API sc_status sc_graph_create(size_t n, sc_graph** out);
STEPCORR_API void sc_graph_destroy(sc_graph* graph);
STEPCORR_API sc_status sc_graph_observe(sc_graph* graph, const uint16_t* members, size_t len);
STEPCORR_API sc_status sc_graph_steps(const sc_graph* graph, uint64_t* out);
STEPCORR_API sc_status sc_graph_prior(const sc_graph* graph, const uint16_t* members, size_t len, double* out);
/* SC_ERR_UNDEFINED_CONDITIONAL when `from` has no observed successor. */
STEPCORR_API sc_status sc_graph_conditional(const sc_graph* graph, const uint16_t* from, size_t from_len,
                                            const uint16_t* to, size_t to_len, double* out);
STEPCORR_API sc_status sc_graph_predict_event_set(const sc_graph* graph, const uint16_t* members, size_t len,
                                                  sc_forecast_mode mode, double* out);
STEPCORR_API sc_status sc_graph_nstep(const sc_graph* graph, const uint16_t* from, size_t from_len,
                                      const uint16_t* to, size_t to_len, uint64_t steps, double* out);
/* Writes the recommended state into out_members (capacity slots). *out_defined
   is 0 when the model cannot forecast yet. */
STEPCORR_API sc_status sc_graph_recommend(const sc_graph* graph, sc_forecast_mode mode, uint16_t* out_members,
                                          size_t capacity, size_t* out_len, int* out_defined);
/* Model document as JSON text. */
STEPCORR_API sc_status sc_graph_to_json(const sc_graph* graph, char** out_json);
STEPCORR_API sc_status sc_graph_from_json(const char* json, sc_graph** out);

/* ---- partial-matching baseline ---------------------------------------- */

typedef struct sc_pm sc_pm;

STEPCORR_API sc_status sc_pm_create(size_t max_order, size_t lookahead, double p_thr, sc_pm** out);
STEPCORR_API void sc_pm_destroy(sc_pm* pm);
STEPCORR_API sc_status sc_pm_observe(sc_pm* pm, const uint16_t* members, size_t len);
STEPCORR_API sc_status sc_pm_recommend(const sc_pm* pm, uint16_t* out_members, size_t capacity, size_t* out_len,
                                       int* out_defined);
STEPCORR_API sc_status sc_pm_to_json(const sc_pm* pm, char** out_json);

/* ---- evaluation ------------------------------------------------------- */

/* Precision/recall from counts; *has_* is 0 when the denominator is zero. */
STEPCORR_API sc_status sc_precision_recall(uint64_t tp, uint64_t fp, uint64_t fn, double* precision,
                                           int* has_precision, double* recall, int* has_recall);

/* ---- diagnostics ------------------------------------------------------ */

STEPCORR_API sc_status sc_hurst_rs(const double* series, size_t len, double* hurst, int* clamped,
                                   size_t* window_count);
/* Writes max_lag + 1 values (lags 0..max_lag). */
STEPCORR_API sc_status sc_acf(const double* series, size_t len, size_t max_lag, double* out);
/* Writes max_lag values (lags 1..max_lag). */
STEPCORR_API sc_status sc_pacf(const double* series, size_t len, size_t max_lag, double* out);

/* ---- file-level commands ---------------------------------------------- */

/* seed_override applies when has_seed is non-zero: the seed in the generator file is
   replaced by the generate-stage seed derived from that root seed.
   truth_csv may be NULL. */
STEPCORR_API sc_status sc_cmd_generate(const char* spec_json_path, const char* out_csv, const char* truth_csv,
                                       int has_seed, uint64_t seed_override);

typedef struct sc_detect_options {
    const char* input_path;
    const char* output_path;
    const char* format;       /* "csv" | "ndjson" */
    const char* align;        /* "strict" | "hold" */
    const char* on_error;     /* "skip" | "abort" */
    const char* streams;      /* comma-separated names, or NULL to read the header */
    double tightness;
    uint64_t warmup;
    sc_compare_mode mode;
} sc_detect_options;

/* Writes a one-line summary (rows, skipped, dropped) to *out_summary. */
STEPCORR_API sc_status sc_cmd_detect(const sc_detect_options* options, char** out_summary);

typedef struct sc_correlate_options {
    const char* events_path;
    const char* model_path;
    int update;               /* continue from an existing model file */
    sc_engine engine;
    size_t max_combo_k;       /* 0 = unbounded */
    sc_bound_policy bound;
    uint64_t seed;            /* root seed */
    size_t order;
    size_t lookahead;
    double p_thr;
} sc_correlate_options;

STEPCORR_API sc_status sc_cmd_correlate(const sc_correlate_options* options);

typedef struct sc_predict_options {
    const char* model_path;
    const char* query;        /* "next" | "event-set" | "nstep" | "recommend" */
    sc_forecast_mode mode;
    const char* state;        /* e.g. "{1,3}" */
    const char* target;
    uint64_t steps;
} sc_predict_options;

STEPCORR_API sc_status sc_cmd_predict(const sc_predict_options* options, char** out_csv);

typedef struct sc_evaluate_options {
    const char* events_path;
    const char* report_path;
    const char* trace_path;   /* NULL for no trace */
    sc_engine engine;
    const size_t* k_values;
    size_t k_count;
    const uint64_t* h_values;
    size_t h_count;
    const size_t* m_values;
    size_t m_count;
    sc_bound_policy bound;
    sc_forecast_mode forecast;
    size_t lookahead;
    double p_thr;
    uint64_t seed;            /* root seed */
} sc_evaluate_options;

STEPCORR_API sc_status sc_cmd_evaluate(const sc_evaluate_options* options);

STEPCORR_API sc_status sc_cmd_diagnose(const char* input_csv, const char* output_csv, size_t max_lag);

/* stages: comma-separated subset, or NULL for the config's selection.
   out_dir: overrides the config's output_dir when non-NULL. */
STEPCORR_API sc_status sc_cmd_pipeline(const char* config_path, const char* stages, const char* out_dir,
                                       char** out_manifest);

#ifdef __cplusplus
}
#endif

#endif /* STEPCORR_STEPCORR_H */
