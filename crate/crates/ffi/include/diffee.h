#ifndef DIFFEE_H
#define DIFFEE_H

/* Generated from the diffee-ffi crate by cbindgen; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define DIFFEE_OK 0

/**
 * A caller-supplied value violates a documented precondition.
 */
#define DIFFEE_ERR_INVALID_INPUT 1

/**
 * Two arguments that must agree in shape do not.
 */
#define DIFFEE_ERR_DIMENSION_MISMATCH 2

/**
 * A thresholded covariance failed the positive-definiteness guard.
 */
#define DIFFEE_ERR_NOT_INVERTIBLE 3

/**
 * No value in the threshold grid produced invertible inputs.
 */
#define DIFFEE_ERR_SELECTION_FAILED 4

/**
 * File input or output failed (unused by this surface, reserved).
 */
#define DIFFEE_ERR_IO 5

/**
 * A required pointer argument was null.
 */
#define DIFFEE_ERR_NULL_ARGUMENT 6

/**
 * An internal invariant failed; the library state is still consistent.
 */
#define DIFFEE_ERR_PANIC 7

/**
 * Length of the benchmark sparsity grid written by `diffee_lambda_grid`.
 */
#define DIFFEE_LAMBDA_GRID_LEN 30

/**
 * Opaque fitted estimate: the sparse differential matrix plus the
 * hyperparameters it was fitted at.
 */
typedef struct DiffeeEstimate DiffeeEstimate;

/**
 * Opaque list of estimates, one per lambda of a path fit.
 */
typedef struct DiffeeEstimateList DiffeeEstimateList;

/**
 * Opaque observation block: n samples of p variables for one condition.
 */
typedef struct DiffeeSampleMatrix DiffeeSampleMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Explanation of the most recent failure on this thread, NUL-terminated.
 * Empty until a call fails. Valid until the next failing call here.
 */
const char *diffee_last_error_message(void);

/**
 * Builds an observation block from a dense row-major buffer of
 * `n_samples * p` doubles. `condition` is `'c'` or `'d'`. On success writes
 * a handle to `out`; release it with `diffee_sample_matrix_free`.
 *
 * # Safety
 * `data` must point to `n_samples * p` readable doubles and `out` to a
 * writable pointer slot.
 */
int32_t diffee_sample_matrix_new(const double *data,
                                 size_t n_samples,
                                 size_t p,
                                 char condition,
                                 struct DiffeeSampleMatrix **out);

/**
 * Releases a sample matrix handle.
 *
 * # Safety
 * `m` must be null or a pointer returned by `diffee_sample_matrix_new` that
 * has not been freed yet.
 */
void diffee_sample_matrix_free(struct DiffeeSampleMatrix *m);

/**
 * Picks the smallest covariance threshold in the standard grid
 * (0.001 ..= 1.000 by 0.001) whose thresholded sample covariances are both
 * safely invertible, and writes it to `out_v`.
 *
 * # Safety
 * `xc` and `xd` must be live sample-matrix handles and `out_v` writable.
 */
int32_t diffee_select_v(const struct DiffeeSampleMatrix *xc,
                        const struct DiffeeSampleMatrix *xd,
                        double *out_v);

/**
 * Writes the 30-point benchmark sparsity grid for the given dimensions into
 * `out`, which must hold `DIFFEE_LAMBDA_GRID_LEN` doubles.
 *
 * # Safety
 * `out` must point to `DIFFEE_LAMBDA_GRID_LEN` writable doubles.
 */
int32_t diffee_lambda_grid(size_t p, size_t n_c, size_t n_d, double *out);

/**
 * Fits the sparse differential estimate at a single lambda. On success
 * writes a handle to `out`; release it with `diffee_estimate_free`.
 *
 * # Safety
 * `xc` and `xd` must be live sample-matrix handles and `out` writable.
 */
int32_t diffee_fit(const struct DiffeeSampleMatrix *xc,
                   const struct DiffeeSampleMatrix *xd,
                   double v,
                   double lambda,
                   struct DiffeeEstimate **out);

/**
 * Fits one estimate per lambda of a strictly ascending grid while computing
 * the expensive thresholded-inverse step once. On success writes a list
 * handle to `out`; release it with `diffee_estimate_list_free`.
 *
 * # Safety
 * `xc` and `xd` must be live handles, `lambdas` must point to `n_lambdas`
 * readable doubles, and `out` must be writable.
 */
int32_t diffee_path(const struct DiffeeSampleMatrix *xc,
                    const struct DiffeeSampleMatrix *xd,
                    double v,
                    const double *lambdas,
                    size_t n_lambdas,
                    struct DiffeeEstimateList **out);

/**
 * Releases an estimate handle.
 *
 * # Safety
 * `est` must be null or an unfreed pointer returned by `diffee_fit`.
 */
void diffee_estimate_free(struct DiffeeEstimate *est);

/**
 * Releases a path-fit list and every estimate in it.
 *
 * # Safety
 * `list` must be null or an unfreed pointer returned by `diffee_path`.
 */
void diffee_estimate_list_free(struct DiffeeEstimateList *list);

/**
 * Number of estimates in a path-fit list; 0 for null.
 *
 * # Safety
 * `list` must be null or a live list handle.
 */
size_t diffee_estimate_list_len(const struct DiffeeEstimateList *list);

/**
 * Borrows the estimate at `index` from a path-fit list, or null when the
 * index is out of range. The pointer is owned by the list: do not free it,
 * and do not use it after freeing the list.
 *
 * # Safety
 * `list` must be null or a live list handle.
 */
const struct DiffeeEstimate *diffee_estimate_list_get(const struct DiffeeEstimateList *list,
                                                      size_t index);

/**
 * Matrix dimension p of a fitted estimate; 0 for null.
 *
 * # Safety
 * `est` must be null or a live estimate handle.
 */
size_t diffee_estimate_dim(const struct DiffeeEstimate *est);

/**
 * Sparsity level the estimate was fitted at; NaN for null.
 *
 * # Safety
 * `est` must be null or a live estimate handle.
 */
double diffee_estimate_lambda(const struct DiffeeEstimate *est);

/**
 * Covariance threshold the estimate was fitted at; NaN for null.
 *
 * # Safety
 * `est` must be null or a live estimate handle.
 */
double diffee_estimate_v(const struct DiffeeEstimate *est);

/**
 * Count of strictly nonzero off-diagonal entries (both triangles); 0 for
 * null.
 *
 * # Safety
 * `est` must be null or a live estimate handle.
 */
size_t diffee_estimate_support_size(const struct DiffeeEstimate *est);

/**
 * Copies the fitted p-by-p differential matrix into `out` in row-major
 * order. `len` must be exactly p * p.
 *
 * # Safety
 * `est` must be a live estimate handle and `out` must point to `len`
 * writable doubles.
 */
int32_t diffee_estimate_copy_delta(const struct DiffeeEstimate *est, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIFFEE_H */
