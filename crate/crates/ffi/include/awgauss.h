#ifndef AWGAUSS_H
#define AWGAUSS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AwStatus {
  AW_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  AW_STATUS_NULL_POINTER = 1,
  /**
   * Input rejected (domain, dimension, parse errors).
   */
  AW_STATUS_INVALID_INPUT = 2,
  /**
   * The computation failed numerically.
   */
  AW_STATUS_NUMERICAL = 3,
  /**
   * Output buffer too small; the required size was still reported.
   */
  AW_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  AW_STATUS_PANIC = 5,
} AwStatus;

typedef enum AwScheme {
  AW_SCHEME_MIDPOINT = 0,
  AW_SCHEME_GAUSS_LEGENDRE = 1,
} AwScheme;

/**
 * Symmetric positive semidefinite covariance matrix.
 */
typedef struct AwCovariance AwCovariance;

/**
 * Quadrature resolution for the continuous formulas.
 */
typedef struct AwGrid AwGrid;

/**
 * Result of the martingale approximation.
 */
typedef struct AwMartingale AwMartingale;

/**
 * Gaussian Volterra process description.
 */
typedef struct AwProcess AwProcess;

/**
 * Result of a distance computation.
 */
typedef struct AwReport AwReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *aw_version(void);

/**
 * Copies the last error message of this thread into `buf`.
 */
enum AwStatus aw_last_error_message(char *buf, size_t len, size_t *needed);

/**
 * Builds an `n x n` covariance from row-major `data`.
 */
enum AwStatus aw_covariance_new(const double *data, size_t n, struct AwCovariance **out);

void aw_covariance_free(struct AwCovariance *cov);

/**
 * Parses a process description from JSON.
 */
enum AwStatus aw_process_from_json(const char *json, struct AwProcess **out);

/**
 * Fractional Brownian motion with the Molchan-Golosov kernel.
 */
enum AwStatus aw_process_fbm(double hurst, double horizon, struct AwProcess **out);

void aw_process_free(struct AwProcess *p);

enum AwStatus aw_grid_new(size_t nodes, enum AwScheme scheme, struct AwGrid **out);

/**
 * Fails the continuous computations when the other scheme disagrees by more
 * than `tol` (relative). A negative value switches the check off.
 */
enum AwStatus aw_grid_set_crosscheck(struct AwGrid *grid, double tol);

void aw_grid_free(struct AwGrid *g);

enum AwStatus aw_discrete(const struct AwCovariance *a,
                          const struct AwCovariance *b,
                          struct AwReport **out);

enum AwStatus aw_fbm(double h1,
                     double h2,
                     double horizon,
                     const struct AwGrid *grid,
                     struct AwReport **out);

/**
 * Unit-multiplicity formula.
 */
enum AwStatus aw_unit(const struct AwProcess *a,
                      const struct AwProcess *b,
                      const struct AwGrid *grid,
                      struct AwReport **out);

/**
 * Higher-multiplicity formula.
 */
enum AwStatus aw_multi(const struct AwProcess *a,
                       const struct AwProcess *b,
                       const struct AwGrid *grid,
                       struct AwReport **out);

enum AwStatus aw_report_distance_squared(const struct AwReport *r, double *out);

enum AwStatus aw_report_trace_term(const struct AwReport *r, double *out);

enum AwStatus aw_report_cross_term(const struct AwReport *r, double *out);

/**
 * Correlations of the optimal coupling; `*needed` receives their count.
 * Empty for higher-multiplicity reports.
 */
enum AwStatus aw_report_correlation(const struct AwReport *r,
                                    double *buf,
                                    size_t len,
                                    size_t *needed);

/**
 * Full report as JSON.
 */
enum AwStatus aw_report_to_json(const struct AwReport *r, char *buf, size_t len, size_t *needed);

void aw_report_free(struct AwReport *r);

enum AwStatus aw_mart_approx(double hurst,
                             double horizon,
                             const struct AwGrid *grid,
                             struct AwMartingale **out);

enum AwStatus aw_martingale_distance_squared(const struct AwMartingale *m, double *out);

/**
 * Optimal volatility interpolated at `r`.
 */
enum AwStatus aw_martingale_rho_at(const struct AwMartingale *m, double r, double *out);

void aw_martingale_free(struct AwMartingale *m);

/**
 * Runs an fSDE coupling scenario given as JSON and writes the cost estimates
 * as a JSON array.
 */
enum AwStatus aw_simulate_json(const char *scenario, char *buf, size_t len, size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AWGAUSS_H */
