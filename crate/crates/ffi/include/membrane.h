#ifndef MEMBRANE_H
#define MEMBRANE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MembraneStatus {
  MEMBRANE_STATUS_OK = 0,
  // A required pointer argument was null.
  MEMBRANE_STATUS_NULL_POINTER = 1,
  // Bad argument value, including non-UTF-8 strings and short buffers.
  MEMBRANE_STATUS_INVALID_ARGUMENT = 2,
  // Configuration or material parameter error.
  MEMBRANE_STATUS_CONFIG = 3,
  // File I/O or parse error.
  MEMBRANE_STATUS_IO = 4,
  // Failure while computing (non-convergence, singular system, ...).
  MEMBRANE_STATUS_SOLVER = 5,
  MEMBRANE_STATUS_PANIC = 6,
} MembraneStatus;

// Scenario configuration.
typedef struct MembraneConfig MembraneConfig;

// Surface mesh.
typedef struct MembraneMesh MembraneMesh;

// Outcome of a solve or form-finding run.
typedef struct MembraneResult MembraneResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into this library.
const char *membrane_last_error(void);

// Library version as a static NUL-terminated string.
const char *membrane_version(void);

// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum MembraneStatus membrane_mesh_read_off(const char *path, struct MembraneMesh **out);

// Open cylinder about the z-axis, `0 <= z <= height`, with geometry order 1
// or 2.
//
// # Safety
// `out` must be a valid pointer.
enum MembraneStatus membrane_mesh_cylinder(double radius,
                                           double height,
                                           uintptr_t axial,
                                           uintptr_t circumferential,
                                           uintptr_t order,
                                           struct MembraneMesh **out);

// # Safety
// `mesh` and `path` must be valid.
enum MembraneStatus membrane_mesh_write_off(const struct MembraneMesh *mesh, const char *path);

// Node count, 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
uintptr_t membrane_mesh_num_nodes(const struct MembraneMesh *mesh);

// Element count, 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
uintptr_t membrane_mesh_num_elements(const struct MembraneMesh *mesh);

// Copies node coordinates as `x0 y0 z0 x1 ...` into `buf` (`3 * nodes`
// values).
//
// # Safety
// `buf` must hold `len` doubles.
enum MembraneStatus membrane_mesh_nodes(const struct MembraneMesh *mesh,
                                        double *buf,
                                        uintptr_t len);

// Sum of the quadrature weights: the area of the interpolated surface.
//
// # Safety
// `mesh` and `out` must be valid.
enum MembraneStatus membrane_mesh_area(const struct MembraneMesh *mesh, double *out);

// # Safety
// `mesh` must be null or a handle not yet freed.
void membrane_mesh_free(struct MembraneMesh *mesh);

// Parses a TOML scenario file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum MembraneStatus membrane_config_read(const char *path, struct MembraneConfig **out);

// Parses TOML scenario text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum MembraneStatus membrane_config_parse(const char *text, struct MembraneConfig **out);

// Defaults of a named scenario such as `"formfind-catenoid"`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum MembraneStatus membrane_config_named(const char *name, struct MembraneConfig **out);

// # Safety
// `config` must be null or a handle not yet freed.
void membrane_config_free(struct MembraneConfig *config);

// Runs a solve scenario. A run that stops without converging still yields
// a result (with `converged` false) and returns `MEMBRANE_STATUS_OK`.
//
// # Safety
// `config` and `out` must be valid.
enum MembraneStatus membrane_solve(const struct MembraneConfig *config,
                                   struct MembraneResult **out);

// Runs a form-finding scenario. Exhausting the iteration budget yields a
// result with `converged` false.
//
// # Safety
// `config` and `out` must be valid.
enum MembraneStatus membrane_formfind(const struct MembraneConfig *config,
                                      struct MembraneResult **out);

// # Safety
// `result` must be null or a live handle.
bool membrane_result_converged(const struct MembraneResult *result);

// Newton iterations over all load steps, or fixed-point iterations.
//
// # Safety
// `result` must be null or a live handle.
uintptr_t membrane_result_iterations(const struct MembraneResult *result);

// Area of the deformed surface, NaN for a null handle.
//
// # Safety
// `result` must be null or a live handle.
double membrane_result_area(const struct MembraneResult *result);

// # Safety
// `result` must be null or a live handle.
uintptr_t membrane_result_num_nodes(const struct MembraneResult *result);

// Copies nodal displacements as `ux0 uy0 uz0 ux1 ...` into `buf`.
//
// # Safety
// `buf` must hold `len` doubles.
enum MembraneStatus membrane_result_displacements(const struct MembraneResult *result,
                                                  double *buf,
                                                  uintptr_t len);

// Deformed surface as a new mesh handle owned by the caller.
//
// # Safety
// `result` and `out` must be valid.
enum MembraneStatus membrane_result_mesh(const struct MembraneResult *result,
                                         struct MembraneMesh **out);

// # Safety
// `result` must be null or a handle not yet freed.
void membrane_result_free(struct MembraneResult *result);

// Area of the catenoid spanning rings of `radius` at `+-half_height`.
//
// # Safety
// `out` must be valid.
enum MembraneStatus membrane_catenoid_area(double radius, double half_height, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEMBRANE_H */
