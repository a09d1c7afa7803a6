#ifndef SMOOTHKM_H
#define SMOOTHKM_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SkmSmoother {
  /**
   * Hard minimum (HKM).
   */
  SKM_SMOOTHER_HARD = 0,
  /**
   * LogSumExp with sharpness `param` (MEFC).
   */
  SKM_SMOOTHER_LOG_SUM_EXP = 1,
  /**
   * p-Norm with exponent `param` (FKM with m = 1 + 1/p).
   */
  SKM_SMOOTHER_P_NORM = 2,
  /**
   * Boltzmann operator with `param` = alpha (EKM).
   */
  SKM_SMOOTHER_BOLTZMANN = 3,
} SkmSmoother;

typedef enum SkmStatus {
  SKM_STATUS_OK = 0,
  SKM_STATUS_NULL_POINTER = 1,
  SKM_STATUS_INVALID_ARGUMENT = 2,
  SKM_STATUS_DIMENSION_MISMATCH = 3,
  SKM_STATUS_NUMERICAL = 4,
  SKM_STATUS_PANIC = 5,
} SkmStatus;

/**
 * Row-major data matrix.
 */
typedef struct SkmData SkmData;

/**
 * Outcome of a clustering run.
 */
typedef struct SkmResult SkmResult;

/**
 * Run settings. Obtain defaults from [`skm_config_default`].
 */
typedef struct SkmConfig {
  enum SkmSmoother smoother;
  double param;
  size_t max_iter;
  double tol;
  size_t restarts;
  uint64_t seed;
} SkmConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *skm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *skm_version(void);

/**
 * Defaults: 500 iterations, tolerance 1e-3, one restart, seed 0.
 */
struct SkmConfig skm_config_default(enum SkmSmoother smoother, double param);

/**
 * Copies `rows × cols` row-major values into a new data handle.
 */
enum SkmStatus skm_data_new(const double *values, size_t rows, size_t cols, struct SkmData **out);

void skm_data_free(struct SkmData *data);

size_t skm_data_rows(const struct SkmData *data);

size_t skm_data_cols(const struct SkmData *data);

/**
 * Z-scores every column in place.
 */
enum SkmStatus skm_data_zscore(struct SkmData *data);

/**
 * `2 / mean(½‖x‖²)`, the default EKM alpha for `data`.
 */
enum SkmStatus skm_auto_alpha(const struct SkmData *data, double *out);

/**
 * Clusters `data` into `k` groups with k-means++ restarts and keeps the
 * lowest-objective run.
 */
enum SkmStatus skm_run(const struct SkmData *data,
                       size_t k,
                       const struct SkmConfig *config,
                       struct SkmResult **out);

void skm_result_free(struct SkmResult *result);

size_t skm_result_clusters(const struct SkmResult *result);

size_t skm_result_cols(const struct SkmResult *result);

size_t skm_result_points(const struct SkmResult *result);

/**
 * Objective value, or NaN for a null handle.
 */
double skm_result_objective(const struct SkmResult *result);

size_t skm_result_iterations(const struct SkmResult *result);

bool skm_result_converged(const struct SkmResult *result);

/**
 * Copies the `clusters × cols` centroids (row-major) into `out`, which
 * must hold at least `len` values.
 */
enum SkmStatus skm_result_centroids(const struct SkmResult *result, double *out, size_t len);

/**
 * Copies one label per data row into `out` (capacity `len`).
 */
enum SkmStatus skm_result_labels(const struct SkmResult *result, size_t *out, size_t len);

/**
 * Normalized mutual information (arithmetic-mean normalization).
 */
enum SkmStatus skm_nmi(const size_t *reference, const size_t *predicted, size_t n, double *out);

/**
 * Adjusted Rand index.
 */
enum SkmStatus skm_ari(const size_t *reference, const size_t *predicted, size_t n, double *out);

/**
 * Accuracy under the best one-to-one cluster-to-class matching.
 */
enum SkmStatus skm_acc(const size_t *reference, const size_t *predicted, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMOOTHKM_H */
