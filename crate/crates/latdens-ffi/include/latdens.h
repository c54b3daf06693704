#ifndef LATDENS_H
#define LATDENS_H

/* Generated by cbindgen from latdens-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a library call.
 */
typedef enum LatdensStatus {
  /**
   * The call succeeded.
   */
  LATDENS_STATUS_OK = 0,
  /**
   * An argument was rejected (bad dimension, unsupported alpha,
   * non-positive lambda, malformed file contents, ...).
   */
  LATDENS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The call failed at runtime (I/O failure, singular system, panic).
   */
  LATDENS_STATUS_RUNTIME_FAILURE = 2,
  /**
   * A required pointer was null.
   */
  LATDENS_STATUS_NULL_POINTER = 3,
} LatdensStatus;

/**
 * Opaque fitted-estimator handle.
 */
typedef struct LatdensEstimator LatdensEstimator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *latdens_version(void);

/**
 * Message for the most recent failure on this thread. Empty after a
 * successful call. The pointer is invalidated by the next library call
 * on the same thread.
 */
const char *latdens_last_error(void);

/**
 * Builds the generating vector for a rank-1 lattice with prime modulus `n`
 * in dimension `dim` and writes it to `z_out` (capacity `dim`). Weights are
 * the polynomial-decay preset matching `alpha`.
 */
enum LatdensStatus latdens_cbc(uint64_t n, size_t dim, uint32_t alpha, uint64_t *z_out);

/**
 * Draws `count` points from the benchmark density in dimension `dim` into
 * the row-major buffer `out` (capacity `count * dim`).
 */
enum LatdensStatus latdens_sample(size_t dim, size_t count, uint64_t seed, double *out);

/**
 * Fits an estimator to `count` observations stored row-major in `sample`
 * (`count * dim` doubles). The lattice vector comes from the CBC search.
 * On success `*out` owns the new handle.
 */
enum LatdensStatus latdens_fit(size_t dim,
                               uint32_t alpha,
                               uint64_t n,
                               double lambda,
                               const double *sample,
                               size_t count,
                               struct LatdensEstimator **out);

/**
 * Loads an estimator from a text artifact written by `latdens_save` or the
 * CLI. On success `*out` owns the new handle.
 */
enum LatdensStatus latdens_load(const char *path, struct LatdensEstimator **out);

/**
 * Writes the estimator's text artifact to `path`.
 */
enum LatdensStatus latdens_save(const struct LatdensEstimator *est, const char *path);

/**
 * Evaluates the fitted density at one point of `dim` coordinates.
 */
enum LatdensStatus latdens_evaluate(const struct LatdensEstimator *est,
                                    const double *point,
                                    size_t dim,
                                    double *out);

/**
 * Integral of the fitted density over the unit cube.
 */
enum LatdensStatus latdens_integral(const struct LatdensEstimator *est, double *out);

/**
 * Dimension of the fitted estimator, or 0 for a null handle.
 */
size_t latdens_dimension(const struct LatdensEstimator *est);

/**
 * Number of lattice points (coefficients) in the estimator, or 0 for a
 * null handle.
 */
size_t latdens_coefficient_count(const struct LatdensEstimator *est);

/**
 * Releases a handle. Passing null is a no-op.
 */
void latdens_free(struct LatdensEstimator *est);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LATDENS_H */
