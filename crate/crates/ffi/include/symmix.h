/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SYMMIX_H
#define SYMMIX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SymmixStatus {
  SYMMIX_STATUS_OK = 0,
  SYMMIX_STATUS_NULL_POINTER = 1,
  SYMMIX_STATUS_INVALID_ARGUMENT = 2,
  SYMMIX_STATUS_FIT_FAILED = 3,
  /**
   * The mixing weight is too close to 1/2 to recover the component distribution.
   */
  SYMMIX_STATUS_SINGULAR = 4,
  SYMMIX_STATUS_PANIC = 5,
} SymmixStatus;

/**
 * Identifiability verdict tags.
 */
typedef enum SymmixReason {
  SYMMIX_REASON_OK = 0,
  SYMMIX_REASON_ZERO_WEIGHT = 1,
  SYMMIX_REASON_SYMMETRIC = 2,
  SYMMIX_REASON_LAMBDA_HALF = 3,
  SYMMIX_REASON_CASE_A2 = 4,
  SYMMIX_REASON_CASE_A3 = 5,
  SYMMIX_REASON_CASE_A4 = 6,
  SYMMIX_REASON_CASE_A5 = 7,
  SYMMIX_REASON_REFLECTED_CASE = 8,
  SYMMIX_REASON_UNSUPPORTED_K = 9,
} SymmixReason;

/**
 * A fitted mixture.
 */
typedef struct SymmixFit SymmixFit;

/**
 * A sorted sample of observations.
 */
typedef struct SymmixSample SymmixSample;

/**
 * A right-continuous step function.
 */
typedef struct SymmixStepFn SymmixStepFn;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *symmix_last_error(void);

/**
 * Creates a sample from `len` finite values.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum SymmixStatus symmix_sample_new(const double *values, size_t len, struct SymmixSample **out);

/**
 * The bundled Old Faithful waiting times.
 *
 * # Safety
 * `out` must be writable.
 */
enum SymmixStatus symmix_sample_faithful(struct SymmixSample **out);

/**
 * Number of observations, or 0 for a null handle.
 *
 * # Safety
 * `sample` must be null or a live handle.
 */
size_t symmix_sample_len(const struct SymmixSample *sample);

/**
 * # Safety
 * `sample` must be null or a handle not yet freed.
 */
void symmix_sample_free(struct SymmixSample *sample);

/**
 * Asymmetry distance of `sample` at the given parameters; `p` may be `INFINITY`.
 *
 * # Safety
 * `weights` and `locations` must point to `k` doubles; `out` must be writable.
 */
enum SymmixStatus symmix_dn(const struct SymmixSample *sample,
                            const double *weights,
                            const double *locations,
                            size_t k,
                            double p,
                            double *out);

/**
 * Semiparametric `k`-component fit in `L_p` with the default start protocol.
 *
 * # Safety
 * `sample` must be a live handle; `out` must be writable.
 */
enum SymmixStatus symmix_fit(const struct SymmixSample *sample,
                             size_t k,
                             double p,
                             struct SymmixFit **out);

/**
 * Number of components, or 0 for a null handle.
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
size_t symmix_fit_k(const struct SymmixFit *fit);

/**
 * Copies the fitted weights and increasing locations into arrays of length `k`.
 *
 * # Safety
 * `weights` and `locations` must point to `k` writable doubles.
 */
enum SymmixStatus symmix_fit_params(const struct SymmixFit *fit,
                                    double *weights,
                                    double *locations,
                                    size_t k);

/**
 * Distance at the optimum, or NaN for a null handle.
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
double symmix_fit_objective(const struct SymmixFit *fit);

/**
 * Component variance estimate, or NaN when unavailable.
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
double symmix_fit_sigma2(const struct SymmixFit *fit);

/**
 * # Safety
 * `fit` must be null or a handle not yet freed.
 */
void symmix_fit_free(struct SymmixFit *fit);

/**
 * Normal-mixture maximum likelihood; writes `(mu1, mu2, lambda1, sigma2)` to `row`.
 *
 * # Safety
 * `sample` must be a live handle; `row` must point to 4 writable doubles.
 */
enum SymmixStatus symmix_fit_nmle(const struct SymmixSample *sample, double *row);

/**
 * Component CDF estimate for a two-component fit.
 *
 * # Safety
 * `sample` and `fit` must be live handles; `out` must be writable.
 */
enum SymmixStatus symmix_g0(const struct SymmixSample *sample,
                            const struct SymmixFit *fit,
                            struct SymmixStepFn **out);

/**
 * Value at `t`, or NaN for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
double symmix_stepfn_eval(const struct SymmixStepFn *f, double t);

/**
 * Number of breakpoints; there is one more level than breakpoints.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t symmix_stepfn_len(const struct SymmixStepFn *f);

/**
 * Copies breakpoints (`len` values) and levels (`len + 1` values).
 *
 * # Safety
 * `breakpoints` must hold `len` and `levels` `len + 1` writable doubles.
 */
enum SymmixStatus symmix_stepfn_copy(const struct SymmixStepFn *f,
                                     double *breakpoints,
                                     double *levels,
                                     size_t len);

/**
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void symmix_stepfn_free(struct SymmixStepFn *f);

/**
 * Identifiability of `(weights, locations)`; weights are normalized first.
 * Writes 1 to `member` for an identifiable point and 0 otherwise.
 *
 * # Safety
 * `weights` and `locations` must point to `k` doubles; outputs must be writable.
 */
enum SymmixStatus symmix_identifiable(const double *weights,
                                      const double *locations,
                                      size_t k,
                                      int32_t *member,
                                      enum SymmixReason *reason);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMMIX_H */
