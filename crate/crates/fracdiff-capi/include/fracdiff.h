/* C interface to the fracdiff library. Generated by cbindgen; do not edit. */

#ifndef FRACDIFF_H
#define FRACDIFF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which ray the one-sided operators read from.
 */
typedef enum FdSide {
  FD_SIDE_RIGHT = 0,
  FD_SIDE_LEFT = 1,
} FdSide;

/**
 * Why a call returned without a result. `fd_last_error` has the detail.
 */
typedef enum FdStatus {
  FD_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FD_STATUS_NULL_POINTER = 1,
  /**
   * Arguments were rejected before any computation ran.
   */
  FD_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Validation passed but the computation could not reach its tolerance.
   */
  FD_STATUS_NUMERICAL_FAILURE = 3,
} FdStatus;

typedef enum FdTailKind {
  /**
   * Identically zero beyond the window.
   */
  FD_TAIL_KIND_ZERO = 0,
  /**
   * Equal to `value` beyond the window.
   */
  FD_TAIL_KIND_CONSTANT = 1,
} FdTailKind;

/**
 * Truncated kernel coefficients of one fractional order.
 */
typedef struct FdCoeffTable FdCoeffTable;

/**
 * Values on a finite uniform window plus declared tail behavior.
 */
typedef struct FdGridFunction FdGridFunction;

/**
 * Behavior of a grid function beyond its stored window. `value` is read
 * only for the `Constant` kind.
 */
typedef struct FdTail {
  enum FdTailKind kind;
  double value;
} FdTail;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the message for the most recent failure on this thread into `buf`,
 * NUL-terminated and truncated to `cap` bytes. Returns the full message
 * length in bytes, excluding the NUL.
 */
size_t fd_last_error(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fd_version(void);

/**
 * Build the kernel table of order `alpha` in (0, 1), indices 0..=truncation.
 */
enum FdStatus fd_coeff_table_new(double alpha, size_t truncation, struct FdCoeffTable **out);

void fd_coeff_table_free(struct FdCoeffTable *table);

/**
 * Number of stored coefficients (truncation + 1), or 0 for a null handle.
 */
size_t fd_coeff_table_len(const struct FdCoeffTable *table);

/**
 * Copy all coefficients into `buf`, which must hold exactly
 * `fd_coeff_table_len` values.
 */
enum FdStatus fd_coeff_table_copy(const struct FdCoeffTable *table, double *buf, size_t len);

/**
 * Build a grid function from `len` values at sites n_lo, n_lo+1, ... with
 * step `h` and the declared tails.
 */
enum FdStatus fd_grid_function_new(double h,
                                   int64_t n_lo,
                                   const double *values,
                                   size_t len,
                                   struct FdTail left,
                                   struct FdTail right,
                                   struct FdGridFunction **out);

void fd_grid_function_free(struct FdGridFunction *u);

/**
 * One-sided fractional difference of `u` at site `n`, with a rigorous
 * truncation bound on the reported value.
 */
enum FdStatus fd_frac_apply(const struct FdGridFunction *u,
                            const struct FdCoeffTable *table,
                            int64_t n,
                            enum FdSide side,
                            double *value,
                            double *bound);

/**
 * Heat-semigroup action on `u` at time `t > 0` and site `n`, within
 * `tolerance` in (0, 1).
 */
enum FdStatus fd_heat_point(const struct FdGridFunction *u,
                            double t,
                            int64_t n,
                            enum FdSide side,
                            double tolerance,
                            double *value);

/**
 * Poisson-semigroup action of order `gamma` in (0, 1) on `u` at time
 * `t > 0` and site `n`, within `tolerance` in (0, 1).
 */
enum FdStatus fd_poisson_point(const struct FdGridFunction *u,
                               double gamma,
                               double t,
                               int64_t n,
                               enum FdSide side,
                               double tolerance,
                               double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACDIFF_H */
