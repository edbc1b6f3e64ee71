#ifndef UNILOC_H
#define UNILOC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UnilocStatus {
  UNILOC_STATUS_OK = 0,
  UNILOC_STATUS_NULL_POINTER = 1,
  UNILOC_STATUS_INVALID_UTF8 = 2,
  UNILOC_STATUS_VALIDATION = 3,
  UNILOC_STATUS_INVALID_PARAMETER = 4,
  UNILOC_STATUS_DIMENSION_MISMATCH = 5,
  UNILOC_STATUS_ON_UNIT_CIRCLE = 6,
  UNILOC_STATUS_SINGULAR = 7,
  UNILOC_STATUS_EXCEPTIONAL = 8,
  UNILOC_STATUS_DENSE_LIMIT = 9,
  UNILOC_STATUS_BOUNDARY_CONTAMINATION = 10,
  UNILOC_STATUS_IO = 11,
  UNILOC_STATUS_OTHER = 12,
  UNILOC_STATUS_PANIC = 13,
} UnilocStatus;

/**
 * A finite unitary band matrix.
 */
typedef struct UnilocMatrix UnilocMatrix;

typedef struct UnilocComplex {
  double re;
  double im;
} UnilocComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *uniloc_version(void);

/**
 * Message of the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next library call on this thread.
 */
const char *uniloc_last_error(void);

/**
 * Builds realization `realization` of the model described by `model_json`
 * (the `model` object of an experiment config).
 *
 * # Safety
 * `model_json` must be a NUL-terminated string and `out` a valid pointer.
 * On success `*out` owns a handle to be released with
 * [`uniloc_matrix_free`].
 */
enum UnilocStatus uniloc_model_build(const char *model_json,
                                     uint64_t seed,
                                     uint64_t realization,
                                     struct UnilocMatrix **out);

/**
 * # Safety
 * `m` must be NULL or a handle from [`uniloc_model_build`] not yet freed.
 */
void uniloc_matrix_free(struct UnilocMatrix *m);

/**
 * Dimension of the matrix, 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t uniloc_matrix_dim(const struct UnilocMatrix *m);

/**
 * `max |(M* M - 1)_{ij}|`.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
enum UnilocStatus uniloc_matrix_unitarity_residual(const struct UnilocMatrix *m, double *out);

/**
 * `y = M x` for vectors of length `len`, which must equal the dimension.
 *
 * # Safety
 * `x` and `y` must point to `len` elements each and must not overlap.
 */
enum UnilocStatus uniloc_matrix_matvec(const struct UnilocMatrix *m,
                                       const struct UnilocComplex *x,
                                       struct UnilocComplex *y,
                                       size_t len);

/**
 * Column `l` of `(M - z)^{-1}` written to `out` (length `len`, equal to the
 * dimension). Fails with `UNILOC_STATUS_ON_UNIT_CIRCLE` when `|z| = 1`.
 *
 * # Safety
 * `out` must point to `len` writable elements.
 */
enum UnilocStatus uniloc_matrix_resolvent_column(const struct UnilocMatrix *m,
                                                 struct UnilocComplex z,
                                                 size_t l,
                                                 struct UnilocComplex *out,
                                                 size_t len);

/**
 * The matrix in the library's JSON form: `dim`, `lower_bw`, `upper_bw`,
 * `periodic`, one `[re, im]` array per stored diagonal and the site labels.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer. The string written
 * to `*out` is released with [`uniloc_string_free`].
 */
enum UnilocStatus uniloc_matrix_to_json(const struct UnilocMatrix *m, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void uniloc_string_free(char *s);

/**
 * Parses and range-checks an experiment config given as JSON text.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string.
 */
enum UnilocStatus uniloc_config_validate(const char *config_json);

/**
 * Runs an experiment and writes its artifacts into `out_dir`. `threads`
 * of 0 uses the default pool. On success the run summary (JSON) is written
 * to `*summary` unless `summary` is NULL.
 *
 * # Safety
 * `config_json` and `out_dir` must be NUL-terminated strings; `summary`
 * must be NULL or a valid pointer.
 */
enum UnilocStatus uniloc_run(const char *config_json,
                             const char *out_dir,
                             size_t threads,
                             char **summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNILOC_H */
