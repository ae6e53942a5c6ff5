/* featgate: genetic search over feature windows and boosted-tree settings
 * for paired Baseline/Augmented forecasting experiments.
 *
 * All functions return an fg_status. On failure a message is available from
 * fg_last_error() on the calling thread until the next failing call.
 * Handles are opaque; free each with its matching *_free function.
 * Strings returned through char** are owned by the caller and released with
 * fg_string_free. */
#ifndef FEATGATE_H
#define FEATGATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(FEATGATE_BUILDING)
#define FG_API __declspec(dllexport)
#else
#define FG_API __declspec(dllimport)
#endif
#else
#define FG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fg_status {
  FG_OK = 0,
  FG_ERR_INTERNAL = 1,
  FG_ERR_CONFIG = 2,
  FG_ERR_DATA = 3,
  FG_ERR_IO = 4
} fg_status;

typedef enum fg_arms {
  FG_ARM_BASELINE = 1,
  FG_ARM_AUGMENTED = 2,
  FG_ARM_BOTH = 3
} fg_arms;

typedef enum fg_rows {
  FG_ROWS_TEST = 0,
  FG_ROWS_ALL = 1
} fg_rows;

typedef struct fg_config fg_config;
typedef struct fg_dataset fg_dataset;
typedef struct fg_model fg_model;
typedef struct fg_pfi_result fg_pfi_result;

FG_API const char* fg_version(void);
FG_API const char* fg_last_error(void);
FG_API void fg_string_free(char* s);

/* Configuration. Relative data paths in a file resolve against its folder. */
FG_API fg_status fg_config_default(fg_config** out);
FG_API fg_status fg_config_load(const char* path, fg_config** out);
FG_API fg_status fg_config_set_runs(fg_config* cfg, size_t runs);
FG_API fg_status fg_config_set_seed(fg_config* cfg, uint64_t seed);
FG_API fg_status fg_config_set_threads(fg_config* cfg, size_t threads);
FG_API fg_status fg_config_set_generations(fg_config* cfg, size_t generations);
FG_API fg_status fg_config_set_holdout(fg_config* cfg, size_t holdout);
FG_API fg_status fg_config_set_prices(fg_config* cfg, const char* path);
/* NULL or "" removes the indicator source. */
FG_API fg_status fg_config_set_indicators(fg_config* cfg, const char* path);
FG_API fg_status fg_config_set_aligned(fg_config* cfg, const char* path);
/* Result-affecting settings as JSON. */
FG_API fg_status fg_config_to_json(const fg_config* cfg, char** out_json);
FG_API void fg_config_free(fg_config* cfg);

/* Datasets. */
FG_API fg_status fg_dataset_ingest(const fg_config* cfg, fg_dataset** out);
FG_API fg_status fg_dataset_load(const char* path, fg_dataset** out);
FG_API fg_status fg_dataset_synthetic(size_t rows, uint64_t seed, fg_dataset** out);
FG_API fg_status fg_dataset_save(const fg_dataset* ds, const char* path);
FG_API size_t fg_dataset_rows(const fg_dataset* ds);
FG_API size_t fg_dataset_series_count(const fg_dataset* ds);
FG_API void fg_dataset_free(fg_dataset* ds);

/* Experiment. The callback fires once per finished or resumed run. */
typedef void (*fg_progress_fn)(const char* arm, size_t run_index, double test_r2, int resumed,
                               void* user);
FG_API fg_status fg_experiment_run(const fg_dataset* ds, const fg_config* cfg, int arms,
                                   const char* out_dir, fg_progress_fn progress, void* user);
/* Rebuilds report.json and plots from a results directory. out_summary may
 * be NULL; otherwise it receives the report JSON. */
FG_API fg_status fg_report_build(const char* results_dir, const char* out_dir, char** out_summary);

/* Models. */
FG_API fg_status fg_model_load(const char* path, fg_model** out);
FG_API size_t fg_model_feature_count(const fg_model* model);
FG_API size_t fg_model_tree_count(const fg_model* model);
/* x is row-major rows x cols; out receives rows predictions. */
FG_API fg_status fg_model_predict(const fg_model* model, const double* x, size_t rows, size_t cols,
                                  double* out);
FG_API void fg_model_free(fg_model* model);

/* Permutation importance of a saved champion on a dataset. seed NULL and
 * repeats 0 reuse the values recorded with the model. */
FG_API fg_status fg_pfi_compute(const fg_model* model, const fg_dataset* ds, int rows,
                                size_t repeats, const uint64_t* seed, fg_pfi_result** out);
FG_API size_t fg_pfi_count(const fg_pfi_result* res);
FG_API const char* fg_pfi_feature(const fg_pfi_result* res, size_t i);
FG_API size_t fg_pfi_column(const fg_pfi_result* res, size_t i);
FG_API double fg_pfi_r2_drop(const fg_pfi_result* res, size_t i);
FG_API double fg_pfi_baseline_r2(const fg_pfi_result* res);
FG_API fg_status fg_pfi_to_json(const fg_pfi_result* res, char** out_json);
FG_API void fg_pfi_free(fg_pfi_result* res);

#ifdef __cplusplus
}
#endif

#endif
