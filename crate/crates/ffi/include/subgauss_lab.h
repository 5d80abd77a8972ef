/* C interface for the subgauss-lab numerical laboratory. */

#ifndef SUBGAUSS_LAB_H
#define SUBGAUSS_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum SlabStatus {
  SlabStatus_Ok = 0,
  SlabStatus_InvalidArgument = 1,
  SlabStatus_ParseError = 2,
  SlabStatus_ComputeError = 3,
  SlabStatus_InternalPanic = 4,
} SlabStatus;

/**
 * Opaque handle to a validated distribution spec.
 */
typedef struct SlabSpec SlabSpec;

/**
 * Library version as a static string (never freed).
 */
const char *slab_version(void);

/**
 * Message describing the most recent failure on this thread.
 */
const char *slab_last_error(void);

/**
 * Parse and validate a spec document (same JSON schema as the CLI).
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be non-null.
 */
enum SlabStatus slab_spec_from_json(const char *json, struct SlabSpec **out);

/**
 * Release a spec handle.
 *
 * # Safety
 * `spec` must come from `slab_spec_from_json` and not be used afterwards.
 */
void slab_spec_free(struct SlabSpec *spec);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from a slab_* call that documents this deallocator.
 */
void slab_string_free(char *s);

/**
 * Full diagnostics report as a JSON string.
 *
 * # Safety
 * `spec` must be a live handle; `out_json` must be non-null.
 */
enum SlabStatus slab_diagnose_json(const struct SlabSpec *spec, char **out_json);

/**
 * Divergence report for Z_n over the default alpha ladder, as JSON.
 *
 * # Safety
 * `spec` must be a live handle; `out_json` must be non-null.
 */
enum SlabStatus slab_divergence_json(const struct SlabSpec *spec, uint32_t n, char **out_json);

/**
 * T_inf(p_n || phi) and its maximizer.
 *
 * # Safety
 * `spec` must be a live handle; `out_t_inf` and `out_argmax` non-null.
 */
enum SlabStatus slab_t_inf(const struct SlabSpec *spec,
                           uint32_t n,
                           double *out_t_inf,
                           double *out_argmax);

/**
 * Rate sweep over an n ladder, as the sweep-summary JSON.
 *
 * # Safety
 * `spec` must be a live handle; `n_list` must point to `n_len` entries;
 * `out_json` must be non-null.
 */
enum SlabStatus slab_sweep_json(const struct SlabSpec *spec,
                                const uint32_t *n_list,
                                uintptr_t n_len,
                                char **out_json);

/**
 * Density of Z_n tabulated on its natural grid, written as parallel arrays.
 * Returns the number of points through `out_len` after filling at most
 * `cap` entries of `xs`/`ps` (call with cap = 0 to query the size).
 *
 * # Safety
 * `spec` must be a live handle; `xs`/`ps` must hold `cap` entries.
 */
enum SlabStatus slab_density_grid(const struct SlabSpec *spec,
                                  uint32_t n,
                                  double *xs,
                                  double *ps,
                                  uintptr_t cap,
                                  uintptr_t *out_len);

#endif  /* SUBGAUSS_LAB_H */
