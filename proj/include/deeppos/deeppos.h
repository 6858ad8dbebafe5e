/*
 * C interface to the deeppos localization library.
 *
 * All objects are opaque handles created by the library and released with
 * the matching *_free function (free functions accept NULL). Every fallible
 * call returns a dp_status; on failure dp_last_error() describes the most
 * recent error raised on the calling thread.
 */
#ifndef DEEPPOS_DEEPPOS_H
#define DEEPPOS_DEEPPOS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DEEPPOS_BUILDING_LIBRARY)
#    define DP_API __declspec(dllexport)
#  else
#    define DP_API __declspec(dllimport)
#  endif
#else
#  define DP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dp_status {
  DP_OK = 0,
  DP_ERR_INVALID_ARGUMENT = 1,
  DP_ERR_PARSE = 2,
  DP_ERR_IO = 3,
  DP_ERR_DEGENERATE_SCALE = 4,
  DP_ERR_SINGULAR_GEOMETRY = 5,
  DP_ERR_DIMENSION_MISMATCH = 6,
  DP_ERR_DIVERGENCE = 7,
  DP_ERR_OUT_OF_RANGE = 8,
  DP_ERR_INTERNAL = 9
} dp_status;

typedef struct dp_scenario dp_scenario;
typedef struct dp_dataset dp_dataset;
typedef struct dp_train_config dp_train_config;
typedef struct dp_train_report dp_train_report;
typedef struct dp_model dp_model;
typedef struct dp_localization dp_localization;

/* Library and model-file versions. */
DP_API const char* dp_version(void);
DP_API int dp_model_format_version(void);

DP_API const char* dp_status_string(dp_status status);
/* Message of the last failure on this thread; "" if none. */
DP_API const char* dp_last_error(void);

/* ---- scenario / synthetic generation ---------------------------------- */

DP_API dp_status dp_scenario_load(const char* path, dp_scenario** out);
DP_API void dp_scenario_free(dp_scenario* scenario);
DP_API dp_status dp_scenario_set_seed(dp_scenario* scenario, uint64_t seed);
/* Overrides; pass a value <= 0 to keep the scenario's setting. */
DP_API dp_status dp_scenario_set_grid(dp_scenario* scenario, double spacing, int packets_per_sp);
/* Training settings embedded in the scenario (defaults if it has none). */
DP_API dp_status dp_scenario_train_config(const dp_scenario* scenario, dp_train_config** out);

DP_API dp_status dp_generate(const dp_scenario* scenario, dp_dataset** out);

/* ---- datasets ----------------------------------------------------------- */

/* CSV plus "<stem>.meta.json" sidecar, both written atomically. */
DP_API dp_status dp_dataset_load(const char* csv_path, dp_dataset** out);
DP_API dp_status dp_dataset_save(const dp_dataset* dataset, const char* csv_path);
DP_API void dp_dataset_free(dp_dataset* dataset);
DP_API size_t dp_dataset_sp_count(const dp_dataset* dataset);
DP_API size_t dp_dataset_packet_count(const dp_dataset* dataset, size_t sp);
DP_API int dp_dataset_is_normalized(const dp_dataset* dataset);
/* Number of invariant violations; 0 means valid. */
DP_API size_t dp_dataset_validate(const dp_dataset* dataset);
/* Subset of sample points re-labelled 0..count-1. */
DP_API dp_status dp_dataset_select(const dp_dataset* dataset, const int* sp_ids, size_t count,
                                   dp_dataset** out);

/* ---- training ----------------------------------------------------------- */

DP_API dp_status dp_train_config_default(dp_train_config** out);
/* Accepts a scenario file (uses its "train" block) or a bare training block. */
DP_API dp_status dp_train_config_load(const char* path, dp_train_config** out);
DP_API void dp_train_config_free(dp_train_config* config);
DP_API dp_status dp_train_config_set_seed(dp_train_config* config, uint64_t seed);
DP_API dp_status dp_train_config_set_max_epoch(dp_train_config* config, int max_epoch);
DP_API dp_status dp_train_config_set_dims(dp_train_config* config, int k1, int k2, int k3, int k4);

DP_API dp_status dp_train(const dp_dataset* dataset, const dp_train_config* config,
                          dp_model** model_out, dp_train_report** report_out);

DP_API size_t dp_train_report_epoch_count(const dp_train_report* report);
DP_API dp_status dp_train_report_loss(const dp_train_report* report, size_t epoch_index,
                                      double* loss);
DP_API double dp_train_report_wall_seconds(const dp_train_report* report);
DP_API size_t dp_train_report_peak_memory(const dp_train_report* report);
/* "epoch,loss" rows. */
DP_API dp_status dp_train_report_write_csv(const dp_train_report* report, const char* path);
/* Copies a one-line summary into buf (truncated, NUL-terminated); *needed
 * receives the full length excluding the terminator. Either may be NULL. */
DP_API dp_status dp_train_report_summary(const dp_train_report* report, char* buf, size_t len,
                                         size_t* needed);
DP_API void dp_train_report_free(dp_train_report* report);

/* ---- models ------------------------------------------------------------- */

DP_API dp_status dp_model_load(const char* path, dp_model** out);
DP_API dp_status dp_model_save(const dp_model* model, const char* path);
DP_API void dp_model_free(dp_model* model);
DP_API int dp_model_label_count(const dp_model* model);
/* Reconstruction of one normalized 90-value packet under `label`. */
DP_API dp_status dp_model_forward(const dp_model* model, const double* packet, size_t length,
                                  int label, double* out, size_t out_length);

/* ---- localization ------------------------------------------------------- */

/* packets: count rows of 90 values. If normalized == 0 they are scaled with
 * the model's normalization record first. */
DP_API dp_status dp_localize(const dp_model* model, const double* packets, size_t count,
                             int normalized, int candidates, dp_localization** out);
/* Reads a packet CSV (dataset layout, or a header "a0,...,a89" with one packet
 * per row). Packets count as normalized when a sidecar says so. */
DP_API dp_status dp_localize_file(const dp_model* model, const char* packets_csv, int candidates,
                                  dp_localization** out);
DP_API dp_status dp_localization_estimate(const dp_localization* loc, double* x, double* y);
DP_API size_t dp_localization_label_count(const dp_localization* loc);
DP_API dp_status dp_localization_label_error(const dp_localization* loc, size_t label,
                                             double* error);
/* JSON document with estimate, candidates and all per-label errors. */
DP_API dp_status dp_localization_to_json(const dp_localization* loc, char* buf, size_t len,
                                         size_t* needed);
DP_API void dp_localization_free(dp_localization* loc);

/* ---- evaluation --------------------------------------------------------- */

typedef struct dp_eval_options {
  int candidates;                /* R */
  int packets;                   /* p */
  uint64_t seed;
  unsigned threads;              /* 0 = all cores */
  const int* overhead_sizes;     /* optional subset sizes for overhead tables */
  size_t overhead_size_count;
  size_t overhead_cap;           /* combinations per subset size */
} dp_eval_options;

DP_API void dp_eval_options_init(dp_eval_options* options);

/* Full leave-one-out run; writes folds.csv, cdf.csv, timing.csv, summary.txt
 * and, when overhead sizes are given, training_overhead.csv and
 * online_overhead.csv into out_dir. Optional outputs may be NULL. */
DP_API dp_status dp_evaluate(const dp_dataset* dataset, const dp_train_config* config,
                             const dp_eval_options* options, const char* out_dir,
                             double* mean_error, double* baseline_mean_error);

#ifdef __cplusplus
}
#endif

#endif /* DEEPPOS_DEEPPOS_H */
