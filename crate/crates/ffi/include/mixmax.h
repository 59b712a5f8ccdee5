#ifndef MIXMAX_H
#define MIXMAX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MxStatus {
  MX_STATUS_OK = 0,
  MX_STATUS_NULL_POINTER = 1,
  MX_STATUS_INVALID_ARGUMENT = 2,
  MX_STATUS_DOMAIN = 3,
  MX_STATUS_PARSE = 4,
  MX_STATUS_PANIC = 5,
} MxStatus;

/**
 * A piecewise-constant function on a dyadic mesh.
 */
typedef struct MxMesh MxMesh;

/**
 * A Young function.
 */
typedef struct MxYoung MxYoung;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON descriptor such as `{"kind":"llogl","r":1,"delta":1}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum MxStatus mx_young_from_json(const char *json, struct MxYoung **out);

/**
 * # Safety
 * `phi` must come from [`mx_young_from_json`] and not be used afterwards.
 */
void mx_young_free(struct MxYoung *phi);

/**
 * # Safety
 * `phi` must be a live handle and `out` writable.
 */
enum MxStatus mx_young_eval(const struct MxYoung *phi, double t, double *out);

/**
 * # Safety
 * `phi` must be a live handle and `out` writable.
 */
enum MxStatus mx_young_gen_inverse(const struct MxYoung *phi, double t, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MxStatus mx_ratio_lemma_f(double x, double *out);

/**
 * Builds a mesh function on the box `origin + [0, 2^k)^n` with `2^mesh_level`
 * cells per side. `values` holds one value per cell in row-major order.
 *
 * # Safety
 * `origin` must point to `n` doubles, `values` to `len` doubles, `out` writable.
 */
enum MxStatus mx_mesh_new(size_t n,
                          const double *origin,
                          int32_t k,
                          uint32_t mesh_level,
                          const double *values,
                          size_t len,
                          struct MxMesh **out);

/**
 * # Safety
 * `f` must come from this library and not be used afterwards.
 */
void mx_mesh_free(struct MxMesh *f);

/**
 * # Safety
 * `f` must be a live handle and `out` writable.
 */
enum MxStatus mx_mesh_len(const struct MxMesh *f, size_t *out);

/**
 * Copies the cell values into `buf`, which must hold exactly `mx_mesh_len` doubles.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum MxStatus mx_mesh_values(const struct MxMesh *f, double *buf, size_t len);

/**
 * Luxemburg norm of `f` over the dyadic cube `(grid_id, level, coords)`.
 *
 * # Safety
 * Handles must be live, `coords` must point to two integers, `out` writable.
 */
enum MxStatus mx_lux_norm(const struct MxMesh *f,
                          const struct MxYoung *phi,
                          uint32_t grid_id,
                          int32_t level,
                          const int64_t *coords,
                          double *out);

/**
 * Fractional Orlicz maximal function. A negative `grid` means all shifted grids.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum MxStatus mx_maximal_field(const struct MxMesh *f,
                               const struct MxYoung *phi,
                               double gamma,
                               int32_t grid,
                               struct MxMesh **out);

/**
 * Copies the last error message of this thread, NUL-terminated and truncated
 * to `len` bytes. Returns the full message length without the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t mx_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIXMAX_H */
