/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef FRACDEV_H
#define FRACDEV_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  FRACDEV_STATUS_OK = 0,
  FRACDEV_STATUS_INVALID_PARAMETER = 1,
  FRACDEV_STATUS_EMPTY_SAMPLE = 2,
  FRACDEV_STATUS_GAUSSIAN_TAIL = 3,
  FRACDEV_STATUS_OFF_GRID = 4,
  FRACDEV_STATUS_EMPTY_INTERVAL = 5,
  FRACDEV_STATUS_NON_DYADIC = 6,
  FRACDEV_STATUS_QUADRATURE = 7,
  FRACDEV_STATUS_NOT_APPLICABLE = 8,
  FRACDEV_STATUS_DEGENERATE = 9,
  FRACDEV_STATUS_FORMAT = 10,
  FRACDEV_STATUS_IO = 11,
  FRACDEV_STATUS_JSON = 12,
  FRACDEV_STATUS_NULL_POINTER = 13,
  FRACDEV_STATUS_PANIC = 14,
} FracdevStatus;

typedef enum {
  FRACDEV_PROCESS_KIND_RLP = 0,
  FRACDEV_PROCESS_KIND_LMP = 1,
  FRACDEV_PROCESS_KIND_LFSM = 2,
  FRACDEV_PROCESS_KIND_BALANCED = 3,
} FracdevProcessKind;

typedef enum {
  FRACDEV_NORM_KIND_SUP = 0,
  FRACDEV_NORM_KIND_LP = 1,
  FRACDEV_NORM_KIND_HOLDER = 2,
  FRACDEV_NORM_KIND_CALDERON_ZYGMUND = 3,
  FRACDEV_NORM_KIND_LIPSCHITZ = 4,
  FRACDEV_NORM_KIND_PVAR = 5,
  FRACDEV_NORM_KIND_SOBOLEV = 6,
  FRACDEV_NORM_KIND_BESOV = 7,
} FracdevNormKind;

/**
 * Opaque sampled path.
 */
typedef struct FracdevPath FracdevPath;

/**
 * Opaque process parameters.
 */
typedef struct FracdevProcess FracdevProcess;

/**
 * Opaque semi-norm.
 */
typedef struct FracdevSeminorm FracdevSeminorm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from this thread.
 */
const char *fracdev_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fracdev_version(void);

/**
 * Creates process parameters.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
FracdevStatus fracdev_process_new(FracdevProcessKind kind,
                                  double alpha,
                                  double hurst,
                                  bool normalize_gaussian,
                                  FracdevProcess **out);

/**
 * # Safety
 * `p` must be NULL or come from [`fracdev_process_new`], freed once.
 */
void fracdev_process_free(FracdevProcess *p);

/**
 * Creates a semi-norm; `eta`, `p`, `q` are NaN when not used.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
FracdevStatus fracdev_seminorm_new(FracdevNormKind kind,
                                   double eta,
                                   double p,
                                   double q,
                                   FracdevSeminorm **out);

/**
 * # Safety
 * `s` must be NULL or come from [`fracdev_seminorm_new`], freed once.
 */
void fracdev_seminorm_free(FracdevSeminorm *s);

/**
 * Small-deviation exponent `γ` of the semi-norm for self-similarity `hurst`.
 *
 * # Safety
 * `s` must be a live handle and `out` valid for writing.
 */
FracdevStatus fracdev_rate_gamma(const FracdevSeminorm *s, double hurst, double *out);

/**
 * Simulates path `index` of the stream family `seed` on `2^level` cells of
 * `[0, 1]`.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writing one pointer.
 */
FracdevStatus fracdev_simulate(const FracdevProcess *p,
                               uint32_t level,
                               uint64_t seed,
                               uint64_t index,
                               FracdevPath **out);

/**
 * Wraps `len` values on a uniform grid of `[0, horizon]`.
 *
 * # Safety
 * `values` must point to `len` readable doubles and `out` be writable.
 */
FracdevStatus fracdev_path_from_values(const double *values,
                                       size_t len,
                                       double horizon,
                                       FracdevPath **out);

/**
 * # Safety
 * `p` must be NULL or a path handle, freed once.
 */
void fracdev_path_free(FracdevPath *p);

/**
 * Number of grid values, 0 for NULL.
 *
 * # Safety
 * `p` must be NULL or a live handle.
 */
size_t fracdev_path_len(const FracdevPath *p);

/**
 * Borrowed pointer to the values, valid while the handle lives.
 *
 * # Safety
 * `p` must be NULL or a live handle.
 */
const double *fracdev_path_values(const FracdevPath *p);

/**
 * Grid step, NaN for NULL.
 *
 * # Safety
 * `p` must be NULL or a live handle.
 */
double fracdev_path_step(const FracdevPath *p);

/**
 * Semi-norm of the path on `[a, b]` (grid points).
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
FracdevStatus fracdev_seminorm_eval(const FracdevSeminorm *s,
                                    const FracdevPath *path,
                                    double a,
                                    double b,
                                    double *out);

/**
 * Monte-Carlo `P[‖X‖ ≤ ε]` for `n_eps` radii; each output array holds
 * `n_eps` entries.
 *
 * # Safety
 * Handles must be live, `eps` readable and the outputs writable for
 * `n_eps` elements.
 */
FracdevStatus fracdev_small_ball(const FracdevProcess *p,
                                 const FracdevSeminorm *s,
                                 const double *eps,
                                 size_t n_eps,
                                 uint64_t n_samples,
                                 uint32_t level,
                                 uint64_t seed,
                                 double *p_hat,
                                 double *stderr,
                                 uint64_t *hits);

/**
 * `P[sup_{[0,1]} |W| ≤ ε]` for standard Brownian motion.
 */
double fracdev_bm_sup_oracle(double epsilon);

/**
 * Small-ball constant from a Laplace exponent `−Ψ(h) ~ C h^{1/q}`.
 *
 * # Safety
 * `out` must be writable.
 */
FracdevStatus fracdev_tauberian_constant(double c, double q, double *out);

/**
 * Reads the process kind name into a static string (for diagnostics).
 *
 * # Safety
 * `p` must be NULL or a live handle.
 */
const char *fracdev_process_kind_name(const FracdevProcess *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACDEV_H */
