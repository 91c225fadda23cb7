#ifndef CURVKIT_H
#define CURVKIT_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CurvkitStatus {
  CURVKIT_STATUS_OK = 0,
  CURVKIT_STATUS_NULL_POINTER = 1,
  CURVKIT_STATUS_INVALID_ARGUMENT = 2,
  CURVKIT_STATUS_IO = 3,
  CURVKIT_STATUS_PARSE = 4,
  CURVKIT_STATUS_INVALID_DATA = 5,
  CURVKIT_STATUS_DISCONNECTED = 6,
  CURVKIT_STATUS_ZERO_DENSITY = 7,
  CURVKIT_STATUS_PANIC = 8,
} CurvkitStatus;

typedef enum CurvkitKernel {
  CURVKIT_KERNEL_GAUSSIAN = 0,
  CURVKIT_KERNEL_BIWEIGHT = 1,
} CurvkitKernel;

/**
 * Per-point density values.
 */
typedef struct CurvkitDensity CurvkitDensity;

/**
 * Symmetric distance matrix.
 */
typedef struct CurvkitDistances CurvkitDistances;

/**
 * Curvature estimates in evaluation order.
 */
typedef struct CurvkitReports CurvkitReports;

/**
 * Radius schedule. `grid_step <= 0` selects nearest-neighbor radii.
 */
typedef struct CurvkitRadii {
  double r_min;
  double r_max;
  double grid_step;
} CurvkitRadii;

typedef struct CurvkitReport {
  size_t index;
  size_t n_hat;
  double c_hat;
  double s_hat;
  /**
   * Largest radius actually used.
   */
  double r_max;
} CurvkitReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *curvkit_last_error(void);

void curvkit_clear_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *curvkit_version(void);

/**
 * Matrix from its strict lower triangle, row by row: `d(1,0), d(2,0), d(2,1), ...`.
 *
 * # Safety
 * `entries` must point to `len` readable doubles and `out` must be writable.
 */
enum CurvkitStatus curvkit_distances_from_lower_triangle(size_t n_points,
                                                         const double *entries,
                                                         size_t len,
                                                         struct CurvkitDistances **out);

/**
 * Matrix from a row-major `n_points × n_points` array, which must be symmetric.
 *
 * # Safety
 * `values` must point to `n_points * n_points` readable doubles and `out` must be writable.
 */
enum CurvkitStatus curvkit_distances_from_square(size_t n_points,
                                                 const double *values,
                                                 struct CurvkitDistances **out);

/**
 * Matrix read from a file; `.csv` is parsed as text, anything else as binary.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be writable.
 */
enum CurvkitStatus curvkit_distances_load(const char *path, struct CurvkitDistances **out);

/**
 * Distances between `n_points` points of dimension `ambient_dim`, stored row-major.
 * `k == 0` gives Euclidean distances; otherwise shortest paths in the k-nearest-neighbor graph.
 *
 * # Safety
 * `coords` must point to `n_points * ambient_dim` readable doubles and `out` must be writable.
 */
enum CurvkitStatus curvkit_distances_from_points(size_t n_points,
                                                 size_t ambient_dim,
                                                 const double *coords,
                                                 size_t k,
                                                 struct CurvkitDistances **out);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
size_t curvkit_distances_len(const struct CurvkitDistances *d);

/**
 * # Safety
 * `d` must be a live handle, `i` and `j` in range, and `out` writable.
 */
enum CurvkitStatus curvkit_distances_get(const struct CurvkitDistances *d,
                                         size_t i,
                                         size_t j,
                                         double *out);

/**
 * # Safety
 * `d` must be null or a handle not yet freed.
 */
void curvkit_distances_free(struct CurvkitDistances *d);

/**
 * Levina-Bickel dimension averaged over `k1..=k2`. `raw_mean` may be null.
 *
 * # Safety
 * `d` must be a live handle and `n_hat` writable.
 */
enum CurvkitStatus curvkit_estimate_dimension(const struct CurvkitDistances *d,
                                              size_t k1,
                                              size_t k2,
                                              size_t *n_hat,
                                              double *raw_mean);

/**
 * Default kernel bandwidth: mean distance to the `⌈√N⌉`-th nearest neighbor.
 *
 * # Safety
 * `d` must be a live handle and `out` writable.
 */
enum CurvkitStatus curvkit_default_bandwidth(const struct CurvkitDistances *d,
                                             size_t n_hat,
                                             double *out);

/**
 * Kernel density estimate over the given distances. `bandwidth <= 0` uses the default rule.
 *
 * # Safety
 * `d` must be a live handle and `out` writable.
 */
enum CurvkitStatus curvkit_density_kde(const struct CurvkitDistances *d,
                                       size_t n_hat,
                                       enum CurvkitKernel kernel,
                                       double bandwidth,
                                       struct CurvkitDensity **out);

/**
 * Density field from known values, one per point.
 *
 * # Safety
 * `values` must point to `len` readable doubles and `out` must be writable.
 */
enum CurvkitStatus curvkit_density_from_values(const double *values,
                                               size_t len,
                                               size_t n_hat,
                                               struct CurvkitDensity **out);

/**
 * Number of values, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t curvkit_density_len(const struct CurvkitDensity *f);

/**
 * Copies the density values into `out`, which must hold exactly `len` doubles.
 *
 * # Safety
 * `f` must be a live handle and `out` must point to `len` writable doubles.
 */
enum CurvkitStatus curvkit_density_values(const struct CurvkitDensity *f, double *out, size_t len);

/**
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void curvkit_density_free(struct CurvkitDensity *f);

/**
 * Scalar curvature at `points` (all points when `points` is null), in ascending index order.
 *
 * # Safety
 * Handles must be live, `points` null or pointing to `n_eval` indices, and `out` writable.
 */
enum CurvkitStatus curvkit_estimate(const struct CurvkitDistances *d,
                                    const struct CurvkitDensity *density,
                                    size_t n_hat,
                                    struct CurvkitRadii radii,
                                    const size_t *points,
                                    size_t n_eval,
                                    struct CurvkitReports **out);

/**
 * Number of reports, or 0 for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t curvkit_reports_len(const struct CurvkitReports *r);

/**
 * # Safety
 * `r` must be a live handle and `out` writable.
 */
enum CurvkitStatus curvkit_reports_get(const struct CurvkitReports *r,
                                       size_t i,
                                       struct CurvkitReport *out);

/**
 * Copies every `Ŝ` into `out`, which must hold exactly `len` doubles.
 *
 * # Safety
 * `r` must be a live handle and `out` must point to `len` writable doubles.
 */
enum CurvkitStatus curvkit_reports_scalar(const struct CurvkitReports *r, double *out, size_t len);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void curvkit_reports_free(struct CurvkitReports *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVKIT_H */
