#ifndef SAE_PROBE_H
#define SAE_PROBE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_ARGUMENT = 2,
  SP_STATUS_FORMAT = 3,
  SP_STATUS_VALIDATION = 4,
  SP_STATUS_DIMENSION_MISMATCH = 5,
  SP_STATUS_NON_CONVERGENCE = 6,
  SP_STATUS_IO = 7,
  SP_STATUS_CONFIG = 8,
  SP_STATUS_PANIC = 9,
} SpStatus;

/**
 * A validated activation dump.
 */
typedef struct SpDataset SpDataset;

/**
 * Pooled feature rows with labels.
 */
typedef struct SpMatrix SpMatrix;

/**
 * A trained logistic probe.
 */
typedef struct SpModel SpModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next `sp_*` call on the same thread.
 */
const char *sp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sp_version(void);

/**
 * Reads and validates a binary dump.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SpStatus sp_dataset_read(const char *path, struct SpDataset **out);

/**
 * # Safety
 * `dataset` must be a live handle; `path` a NUL-terminated string.
 */
enum SpStatus sp_dataset_write(const struct SpDataset *dataset, const char *path);

/**
 * Generates a synthetic dataset from a JSON spec.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out` must be writable.
 */
enum SpStatus sp_dataset_synthetic(const char *spec_json, struct SpDataset **out);

/**
 * Number of records, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t sp_dataset_len(const struct SpDataset *dataset);

/**
 * SAE width, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t sp_dataset_width(const struct SpDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a handle not yet freed.
 */
void sp_dataset_free(struct SpDataset *dataset);

/**
 * Pools every record: optional per-token top-`top_n` mask (0 = none), sum,
 * then optional binarization at `threshold`.
 *
 * # Safety
 * `dataset` must be a live handle; `out` must be writable.
 */
enum SpStatus sp_pool(const struct SpDataset *dataset,
                      size_t top_n,
                      bool binarize,
                      double threshold,
                      struct SpMatrix **out);

/**
 * # Safety
 * `matrix` must be null or a live handle.
 */
size_t sp_matrix_rows(const struct SpMatrix *matrix);

/**
 * # Safety
 * `matrix` must be null or a live handle.
 */
size_t sp_matrix_width(const struct SpMatrix *matrix);

/**
 * # Safety
 * `matrix` must be null or a handle not yet freed.
 */
void sp_matrix_free(struct SpMatrix *matrix);

/**
 * Trains an L2-regularized multinomial logistic probe.
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum SpStatus sp_train(const struct SpMatrix *matrix,
                       double l2_strength,
                       size_t max_iterations,
                       double gradient_tolerance,
                       struct SpModel **out);

/**
 * Writes one predicted class per row into `labels`, which must hold
 * `capacity >= rows` entries.
 *
 * # Safety
 * Handles must be live; `labels` must point to `capacity` writable values.
 */
enum SpStatus sp_predict(const struct SpModel *model,
                         const struct SpMatrix *matrix,
                         size_t *labels,
                         size_t capacity);

/**
 * Serializes a model to JSON. Free the string with [`sp_string_free`].
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum SpStatus sp_model_to_json(const struct SpModel *model, char **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SpStatus sp_model_from_json(const char *json, struct SpModel **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void sp_model_free(struct SpModel *model);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void sp_string_free(char *s);

/**
 * Stratified `k`-fold CV of the pooled probe with default regularization.
 * Writes the mean and population standard deviation of fold macro-F1.
 *
 * # Safety
 * `dataset` must be a live handle; `mean` and `std` must be writable.
 */
enum SpStatus sp_cross_validate(const struct SpDataset *dataset,
                                size_t top_n,
                                bool binarize,
                                double threshold,
                                size_t k,
                                uint64_t seed,
                                double *mean,
                                double *std);

/**
 * Macro-F1 over `class_count` classes of `n` true/predicted label pairs.
 *
 * # Safety
 * `y_true` and `y_pred` must each point to `n` readable values.
 */
enum SpStatus sp_macro_f1(const size_t *y_true,
                          const size_t *y_pred,
                          size_t n,
                          size_t class_count,
                          double *out);

/**
 * Jaccard overlap of two index sets (duplicates ignored; two empty sets
 * give 1). Returns a negative value if a non-empty set is null.
 *
 * # Safety
 * `a` and `b` must point to `na` and `nb` readable values.
 */
double sp_jaccard(const uint32_t *a, size_t na, const uint32_t *b, size_t nb);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SAE_PROBE_H */
