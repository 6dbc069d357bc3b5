#ifndef GVDX_H
#define GVDX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GvdxStatus {
  GVDX_STATUS_OK = 0,
  GVDX_STATUS_NULL_POINTER = 1,
  GVDX_STATUS_INVALID_ARGUMENT = 2,
  GVDX_STATUS_IO = 3,
  GVDX_STATUS_PARSE = 4,
  // The map has no obstacle or unknown cell to measure clearance from.
  GVDX_STATUS_NO_OBSTACLE = 5,
  GVDX_STATUS_UNREACHABLE = 6,
  GVDX_STATUS_INTERNAL = 7,
} GvdxStatus;

// Occupancy grid handle.
typedef struct GvdxGrid GvdxGrid;

// Built GVD handle; keeps a copy of the grid it was built from.
typedef struct GvdxGvd GvdxGvd;

typedef struct GvdxGvdParams {
  double ridge_threshold;
  double min_clearance;
  bool closed_world;
  bool bridge_gaps;
} GvdxGvdParams;

typedef struct GvdxNode {
  size_t col;
  size_t row;
  double x;
  double y;
  // Clearance in meters.
  double radius;
  size_t component;
} GvdxNode;

typedef struct GvdxRunSummary {
  uint64_t steps;
  double total_time;
  double total_path;
  double explored_fraction;
  // 0 done, 1 explored, 2 timeout.
  int32_t termination;
  uint64_t decisions;
} GvdxRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *gvdx_version(void);

// Copies the last error message of this thread into `buf` (truncated and
// NUL-terminated) and returns the full length excluding the terminator.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t gvdx_last_error_message(char *buf, size_t len);

// Creates a grid from `width * height` row-major cell codes.
//
// # Safety
// `cells` must be valid for `width * height` reads; `out` must be writable.
enum GvdxStatus gvdx_grid_new(size_t width,
                              size_t height,
                              double resolution,
                              double origin_x,
                              double origin_y,
                              const int8_t *cells,
                              struct GvdxGrid **out);

// Loads a PGM (with `.cfg` sidecar) or ASCII map.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum GvdxStatus gvdx_grid_load(const char *path, struct GvdxGrid **out);

// # Safety
// `grid` must be null or a live handle.
size_t gvdx_grid_width(const struct GvdxGrid *grid);

// # Safety
// `grid` must be null or a live handle.
size_t gvdx_grid_height(const struct GvdxGrid *grid);

// # Safety
// `grid` must be a live handle; `out` must be writable.
enum GvdxStatus gvdx_grid_get(const struct GvdxGrid *grid, size_t col, size_t row, int8_t *out);

// # Safety
// `grid` must be a live handle.
enum GvdxStatus gvdx_grid_set(struct GvdxGrid *grid, size_t col, size_t row, int8_t code);

// Map entropy: the number of unknown cells.
//
// # Safety
// `grid` must be a live handle; `out` must be writable.
enum GvdxStatus gvdx_grid_entropy(const struct GvdxGrid *grid, double *out);

// # Safety
// `grid` must be null or a handle not yet freed.
void gvdx_grid_free(struct GvdxGrid *grid);

struct GvdxGvdParams gvdx_gvd_params_default(void);

// Builds the GVD of `grid`; `params` may be null for the defaults.
//
// # Safety
// `grid` must be a live handle, `params` null or readable, `out` writable.
enum GvdxStatus gvdx_gvd_build(const struct GvdxGrid *grid,
                               const struct GvdxGvdParams *params,
                               struct GvdxGvd **out);

// # Safety
// `gvd` must be null or a live handle.
size_t gvdx_gvd_node_count(const struct GvdxGvd *gvd);

// # Safety
// `gvd` must be a live handle; `out` must be writable.
enum GvdxStatus gvdx_gvd_node(const struct GvdxGvd *gvd, size_t index, struct GvdxNode *out);

// Path cost in meters between two world points along the GVD.
//
// # Safety
// `gvd` must be a live handle; `out` must be writable.
enum GvdxStatus gvdx_gvd_path_cost(const struct GvdxGvd *gvd,
                                   double from_x,
                                   double from_y,
                                   double to_x,
                                   double to_y,
                                   double *out);

// # Safety
// `gvd` must be null or a handle not yet freed.
void gvdx_gvd_free(struct GvdxGvd *gvd);

// Runs one exploration with default parameters. `world` is a map path or
// `gen:<kind>:<N|WxH>:<seed>`; `strategy` is `gvd`, `nearest` or `greedy`;
// `max_steps == 0` keeps the default cap.
//
// # Safety
// `world` and `strategy` must be NUL-terminated strings; `out` writable.
enum GvdxStatus gvdx_explore(const char *world,
                             const char *strategy,
                             uint64_t seed,
                             uint64_t max_steps,
                             struct GvdxRunSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GVDX_H */
