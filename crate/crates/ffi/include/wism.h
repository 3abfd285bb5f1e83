#ifndef WISM_H
#define WISM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum wism_status {
  WISM_OK = 0,
  /**
   * A parameter violated a documented precondition.
   */
  WISM_INVALID_ARGUMENT = 1,
  WISM_IO_ERROR = 2,
  /**
   * A file exists but its contents are malformed.
   */
  WISM_FORMAT_ERROR = 3,
  /**
   * A computation failed to produce a finite result.
   */
  WISM_NUMERIC_ERROR = 4,
  /**
   * An internal invariant broke; the library state is still usable.
   */
  WISM_PANIC = 5,
} wism_status;

/**
 * Maneuver family of a shortest path.
 */
typedef enum wism_path_kind {
  WISM_LSL = 0,
  WISM_RSR = 1,
  WISM_LSR = 2,
  WISM_RSL = 3,
  WISM_RLR = 4,
  WISM_LRL = 5,
} wism_path_kind;

/**
 * Opaque handle to a window-cost memo table.
 */
typedef struct wism_cache wism_cache;

/**
 * Opaque handle to a loaded window-cost model.
 */
typedef struct wism_model wism_model;

/**
 * A shortest maneuver between two oriented poses.
 */
typedef struct wism_path {
  enum wism_path_kind kind;
  /**
   * Turn angles in radians, straight length in world units.
   */
  double params[3];
  double rho;
  double length;
} wism_path;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *wism_last_error_message(void);

/**
 * Length of the shortest curvature-bounded path between two poses.
 *
 * # Safety
 * `out_length` must point to a writable f64.
 */
enum wism_status wism_dubins_length(double x0,
                                    double y0,
                                    double theta0,
                                    double x1,
                                    double y1,
                                    double theta1,
                                    double rho,
                                    double *out_length);

/**
 * Shortest curvature-bounded path between two poses.
 *
 * # Safety
 * `out_path` must point to a writable `wism_path`.
 */
enum wism_status wism_dubins_shortest_path(double x0,
                                           double y0,
                                           double theta0,
                                           double x1,
                                           double y1,
                                           double theta1,
                                           double rho,
                                           struct wism_path *out_path);

/**
 * Optimizes headings for visiting `n` locations in the given order.
 * Writes the tour cost to `out_cost` and, when `out_headings` is non-null,
 * one heading per location (radians) into it.
 *
 * # Safety
 * `xs`, `ys` must hold `n` doubles; `out_headings`, if non-null, must hold
 * space for `n` doubles.
 */
enum wism_status wism_dtp_solve(const double *xs,
                                const double *ys,
                                uintptr_t n,
                                double rho,
                                uintptr_t k_max,
                                bool closed,
                                double *out_cost,
                                double *out_headings);

/**
 * Loads a model file and hands ownership to the caller.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out_model` must be writable.
 */
enum wism_status wism_model_load(const char *path, struct wism_model **out_model);

/**
 * Releases a model handle. A null handle is ignored.
 *
 * # Safety
 * `model` must have come from `wism_model_load` and not been freed.
 */
void wism_model_free(struct wism_model *model);

/**
 * Window size the model was trained for; 0 for a null handle.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
uintptr_t wism_model_window_size(const struct wism_model *model);

/**
 * Number of coordinates per prediction row; 0 for a null handle.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
uintptr_t wism_model_input_dim(const struct wism_model *model);

/**
 * Predicts the open subtour cost of one window of `coord_count` values
 * laid out as (x0, y0, x1, y1, ...).
 *
 * # Safety
 * `coords` must hold `coord_count` doubles; `out_cost` must be writable.
 */
enum wism_status wism_model_predict(const struct wism_model *model,
                                    const double *coords,
                                    uintptr_t coord_count,
                                    double *out_cost);

/**
 * Predicts `row_count` windows from a row-major coordinate matrix with
 * `wism_model_input_dim` columns, writing one cost per row.
 *
 * # Safety
 * `coords` must hold `row_count * input_dim` doubles and `out_costs` space
 * for `row_count` doubles.
 */
enum wism_status wism_model_predict_batch(const struct wism_model *model,
                                          const double *coords,
                                          uintptr_t row_count,
                                          double *out_costs);

/**
 * Creates an empty window-cost memo table.
 */
struct wism_cache *wism_cache_new(void);

/**
 * Releases a cache handle. A null handle is ignored.
 *
 * # Safety
 * `cache` must have come from `wism_cache_new` and not been freed.
 */
void wism_cache_free(struct wism_cache *cache);

/**
 * Reports lookup counters since creation or the last clear.
 *
 * # Safety
 * `cache` must be a live handle; out pointers, if non-null, writable.
 */
enum wism_status wism_cache_stats(const struct wism_cache *cache,
                                  uint64_t *out_hits,
                                  uint64_t *out_misses);

/**
 * Drops all memoized entries and resets the counters.
 *
 * # Safety
 * `cache` must be a live handle.
 */
enum wism_status wism_cache_clear(const struct wism_cache *cache);

/**
 * Windowed estimate of the closed tour cost of visiting the `n` targets
 * in the order given by `sequence`, using exact window costs solved at
 * resolution `k_max`. `cache` may be null.
 *
 * # Safety
 * `xs`, `ys` must hold `n` doubles and `sequence` `n` indices; `out_cost`
 * must be writable; `cache`, if non-null, must be a live handle.
 */
enum wism_status wism_window_cost_estimate_exact(const double *xs,
                                                 const double *ys,
                                                 uintptr_t n,
                                                 double rho,
                                                 const uint32_t *sequence,
                                                 uintptr_t w,
                                                 uintptr_t k_max,
                                                 const struct wism_cache *cache,
                                                 double *out_cost);

/**
 * Windowed estimate of the closed tour cost using model predictions for
 * the window costs. The model's window size must equal `w`.
 *
 * # Safety
 * As for `wism_window_cost_estimate_exact`, plus `model` must be live.
 */
enum wism_status wism_window_cost_estimate_model(const struct wism_model *model,
                                                 const double *xs,
                                                 const double *ys,
                                                 uintptr_t n,
                                                 const uint32_t *sequence,
                                                 uintptr_t w,
                                                 const struct wism_cache *cache,
                                                 double *out_cost);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WISM_H */
