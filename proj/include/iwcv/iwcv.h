/*
 * C interface to the iwcv library: lambda selection for ridge classifiers
 * under covariate shift.
 *
 * Objects are opaque handles created by *_create / *_load / run functions and
 * released by the matching *_destroy. Every function that can fail returns an
 * iwcv_status; the message of the last failure on the calling thread is
 * available from iwcv_last_error().
 *
 * Strings are returned through caller buffers: pass `buf`/`cap`, and `needed`
 * (optional) receives the size including the terminating NUL. A buffer that is
 * too small yields IWCV_ERR_INSUFFICIENT_BUFFER and is left untouched.
 *
 * Matrices are row-major doubles.
 */
#ifndef IWCV_IWCV_H
#define IWCV_IWCV_H

#include <stddef.h>
#include <stdint.h>

#if defined(IWCV_BUILDING_LIBRARY)
#define IWCV_API __attribute__((visibility("default")))
#else
#define IWCV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum iwcv_status {
    IWCV_OK = 0,
    IWCV_ERR_CONFIG = 1,
    IWCV_ERR_DATA = 2,
    IWCV_ERR_ESTIMATION = 3,
    IWCV_ERR_SINGULAR = 4,
    IWCV_ERR_ARGUMENT = 5,
    IWCV_ERR_IO = 6,
    IWCV_ERR_NULL_POINTER = 7,
    IWCV_ERR_INSUFFICIENT_BUFFER = 8,
    IWCV_ERR_UNKNOWN = 9
} iwcv_status;

typedef struct iwcv_config iwcv_config;
typedef struct iwcv_table iwcv_table;
typedef struct iwcv_dataset iwcv_dataset;

typedef struct iwcv_cell {
    double mean;
    double std_error;
    size_t successes;
    size_t failures;
    size_t boundary_hits;
    int boundary;
} iwcv_cell;

IWCV_API const char* iwcv_version(void);
IWCV_API const char* iwcv_status_string(iwcv_status status);
/* Message of the last failed call on this thread; "" if none. */
IWCV_API const char* iwcv_last_error(void);

/* --- configuration ------------------------------------------------------ */

IWCV_API iwcv_status iwcv_config_create(iwcv_config** out);
IWCV_API void iwcv_config_destroy(iwcv_config* cfg);
/* key=value lines, '#' comments. */
IWCV_API iwcv_status iwcv_config_load_file(iwcv_config* cfg, const char* path);
IWCV_API iwcv_status iwcv_config_load_string(iwcv_config* cfg, const char* text);
IWCV_API iwcv_status iwcv_config_set(iwcv_config* cfg, const char* key, const char* value);
IWCV_API iwcv_status iwcv_config_get(const iwcv_config* cfg, const char* key, char* buf, size_t cap, size_t* needed);
IWCV_API iwcv_status iwcv_config_validate(const iwcv_config* cfg);
/* 16 hex digits. */
IWCV_API iwcv_status iwcv_config_hash(const iwcv_config* cfg, char* buf, size_t cap, size_t* needed);

/* --- experiments -------------------------------------------------------- */

IWCV_API iwcv_status iwcv_run_artificial(const iwcv_config* cfg, iwcv_table** out);
/* data_dir may be NULL to use the configured directory. */
IWCV_API iwcv_status iwcv_run_heart(const iwcv_config* cfg, const char* data_dir, iwcv_table** out);
/* Tab-delimited population MSE curves. */
IWCV_API iwcv_status iwcv_emit_curves(const iwcv_config* cfg, const char* path);

/* --- result tables ------------------------------------------------------ */

IWCV_API void iwcv_table_destroy(iwcv_table* table);
IWCV_API iwcv_status iwcv_table_shape(const iwcv_table* table, size_t* rows, size_t* cols);
IWCV_API iwcv_status iwcv_table_row_label(const iwcv_table* table, size_t row, char* buf, size_t cap,
                                          size_t* needed);
IWCV_API iwcv_status iwcv_table_column_label(const iwcv_table* table, size_t col, char* buf, size_t cap,
                                             size_t* needed);
IWCV_API iwcv_status iwcv_table_cell(const iwcv_table* table, size_t row, size_t col, iwcv_cell* out);
IWCV_API iwcv_status iwcv_table_failures(const iwcv_table* table, size_t* failed, size_t* total);
IWCV_API iwcv_status iwcv_table_metadata(const iwcv_table* table, const char* key, char* buf, size_t cap,
                                         size_t* needed);
/* format: "csv", "markdown", "repeats" or "manifest". */
IWCV_API iwcv_status iwcv_table_format(const iwcv_table* table, const char* format, char* buf, size_t cap,
                                       size_t* needed);
IWCV_API iwcv_status iwcv_table_write(const iwcv_table* table, const char* format, const char* path);

/* --- datasets and primitives -------------------------------------------- */

/* labels must be +1 or -1. */
IWCV_API iwcv_status iwcv_dataset_create(const double* features, const double* labels, size_t n, size_t d,
                                         iwcv_dataset** out);
IWCV_API iwcv_status iwcv_dataset_load_uci_heart(const char* path, const char* domain, iwcv_dataset** out);
IWCV_API void iwcv_dataset_destroy(iwcv_dataset* data);
IWCV_API iwcv_status iwcv_dataset_shape(const iwcv_dataset* data, size_t* n, size_t* d);
/* Copies n*d features (row-major) and n labels; either pointer may be NULL. */
IWCV_API iwcv_status iwcv_dataset_copy(const iwcv_dataset* data, double* features, double* labels);
/* Removes sparse features, z-scores, zero-fills missing cells. */
IWCV_API iwcv_status iwcv_dataset_preprocess(const iwcv_dataset* data, double missing_threshold,
                                             iwcv_dataset** out);

/* weights_out receives d coefficients. */
IWCV_API iwcv_status iwcv_fit_ridge(const iwcv_dataset* data, double lambda, double* weights_out);

/* estimator: "rg", "kliep", "kmm" or "nn". cfg may be NULL for defaults.
 * weights_out receives n_source values. */
IWCV_API iwcv_status iwcv_estimate_weights(const char* estimator, const double* source, size_t n_source,
                                           const double* target, size_t n_target, size_t d,
                                           const iwcv_config* cfg, uint64_t seed, double* weights_out);

/* K-fold selection over the configured grid; weights may be NULL.
 * The split plan is drawn from `seed`. */
IWCV_API iwcv_status iwcv_cv_select(const iwcv_dataset* data, const iwcv_config* cfg, const double* weights,
                                    uint64_t seed, double* lambda_hat);

#ifdef __cplusplus
}
#endif

#endif
