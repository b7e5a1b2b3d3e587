#ifndef SQW_H
#define SQW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SqwStatus {
  SQW_STATUS_OK = 0,
  SQW_STATUS_NULL_POINTER = 1,
  SQW_STATUS_INVALID_PARAMETER = 2,
  SQW_STATUS_KERNEL_NOT_NORMALIZABLE = 3,
  /**
   * Any other numerical failure (divergence, blow-up, non-convergence).
   */
  SQW_STATUS_NUMERICAL = 4,
  SQW_STATUS_BUFFER_TOO_SMALL = 5,
  SQW_STATUS_PANIC = 6,
} SqwStatus;

typedef enum SqwDriveKind {
  SQW_DRIVE_KIND_NONE = 0,
  SQW_DRIVE_KIND_CONSTANT = 1,
  SQW_DRIVE_KIND_COSINE = 2,
} SqwDriveKind;

/**
 * Truncated-Fock density matrix.
 */
typedef struct SqwDensity SqwDensity;

/**
 * Sampled phase-space function.
 */
typedef struct SqwGrid SqwGrid;

typedef struct SqwComplex {
  double re;
  double im;
} SqwComplex;

typedef struct SqwOrdering {
  struct SqwComplex r1;
  struct SqwComplex r2;
  struct SqwComplex r3;
} SqwOrdering;

typedef struct SqwBath {
  double kappa;
  double nbar;
  struct SqwComplex m;
  double omega;
} SqwBath;

/**
 * `f(t) = f0` or `f0 cos(omega t + phase)`.
 */
typedef struct SqwDrive {
  enum SqwDriveKind kind;
  double f0;
  double omega;
  double phase;
} SqwDrive;

typedef struct SqwCoefficients {
  double t;
  struct SqwComplex lambda1;
  struct SqwComplex lambda2;
  double big_t;
  double a;
  struct SqwOrdering ordering;
} SqwCoefficients;

/**
 * `weight · g_ordering(scale·α − mean)`.
 */
typedef struct SqwGaussian {
  struct SqwComplex mean;
  struct SqwOrdering ordering;
  double weight;
  double scale;
} SqwGaussian;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *sqw_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sqw_version(void);

/**
 * Kernel value `g_r(α)`.
 *
 * # Safety
 * `r` and `out` must be valid pointers.
 */
enum SqwStatus sqw_kernel_eval(const struct SqwOrdering *r,
                               struct SqwComplex alpha,
                               struct SqwComplex *out);

/**
 * Propagator coefficients at time `t`. `drive` may be null.
 *
 * # Safety
 * `bath` and `out` must be valid; `drive` null or valid.
 */
enum SqwStatus sqw_coefficients(const struct SqwBath *bath_params,
                                const struct SqwDrive *drive_spec,
                                double t,
                                struct SqwCoefficients *out);

/**
 * Rotating-frame evolution of a Gaussian Wigner function.
 *
 * # Safety
 * `initial`, `bath` and `out` must be valid; `drive` null or valid.
 */
enum SqwStatus sqw_propagate_gaussian(const struct SqwGaussian *initial,
                                      const struct SqwBath *bath_params,
                                      const struct SqwDrive *drive_spec,
                                      double t,
                                      struct SqwGaussian *out);

/**
 * # Safety
 * `f` and `out` must be valid.
 */
enum SqwStatus sqw_gaussian_eval(const struct SqwGaussian *f,
                                 struct SqwComplex alpha,
                                 struct SqwComplex *out);

/**
 * Samples `f` on an `n × n` grid over `[-half, half]²` around `center`.
 *
 * # Safety
 * `f` and `out` must be valid. The handle written to `out` is freed with [`sqw_grid_free`].
 */
enum SqwStatus sqw_grid_sample(const struct SqwGaussian *f,
                               size_t n,
                               double half,
                               struct SqwComplex center,
                               struct SqwGrid **out);

/**
 * Evolves a sampled Wigner function to time `t`, resampled on the input grid.
 *
 * # Safety
 * `grid`, `bath` and `out` must be valid; `drive` null or valid.
 */
enum SqwStatus sqw_grid_propagate(const struct SqwGrid *grid,
                                  const struct SqwBath *bath_params,
                                  const struct SqwDrive *drive_spec,
                                  double t,
                                  struct SqwGrid **out);

/**
 * Number of nodes along each axis.
 *
 * # Safety
 * `grid`, `nx` and `ny` must be valid.
 */
enum SqwStatus sqw_grid_dims(const struct SqwGrid *grid, size_t *nx, size_t *ny);

/**
 * Copies the node values, x-major (`values[ix * ny + iy]`), into `buf`.
 *
 * # Safety
 * `grid` must be valid; `buf` must hold `len` elements.
 */
enum SqwStatus sqw_grid_values(const struct SqwGrid *grid, struct SqwComplex *buf, size_t len);

/**
 * `∫ d²α/π` by the grid quadrature.
 *
 * # Safety
 * `grid` and `out` must be valid.
 */
enum SqwStatus sqw_grid_integral(const struct SqwGrid *grid, struct SqwComplex *out);

/**
 * # Safety
 * `grid` is null or a handle from this library not yet freed.
 */
void sqw_grid_free(struct SqwGrid *grid);

/**
 * Coherent state `|α0⟩` on `n` Fock levels.
 *
 * # Safety
 * `out` must be valid. The handle is freed with [`sqw_density_free`].
 */
enum SqwStatus sqw_density_coherent(struct SqwComplex alpha0, size_t n, struct SqwDensity **out);

/**
 * Thermal state with mean occupation `nbar` on `n` Fock levels.
 *
 * # Safety
 * `out` must be valid. The handle is freed with [`sqw_density_free`].
 */
enum SqwStatus sqw_density_thermal(double nbar, size_t n, struct SqwDensity **out);

/**
 * Master-equation evolution to time `t` in the rotating frame, RK4 with step `dt`.
 *
 * # Safety
 * `rho`, `bath` and `out` must be valid; `drive` null or valid.
 */
enum SqwStatus sqw_density_evolve(const struct SqwDensity *rho,
                                  const struct SqwBath *bath_params,
                                  const struct SqwDrive *drive_spec,
                                  double t,
                                  double dt,
                                  struct SqwDensity **out);

/**
 * `⟨a†^m a^n⟩`.
 *
 * # Safety
 * `rho` and `out` must be valid.
 */
enum SqwStatus sqw_density_moment(const struct SqwDensity *rho,
                                  size_t m,
                                  size_t n,
                                  struct SqwComplex *out);

/**
 * Wigner function at one point.
 *
 * # Safety
 * `rho` and `out` must be valid.
 */
enum SqwStatus sqw_density_wigner(const struct SqwDensity *rho,
                                  struct SqwComplex alpha,
                                  double *out);

/**
 * # Safety
 * `rho` is null or a handle from this library not yet freed.
 */
void sqw_density_free(struct SqwDensity *rho);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQW_H */
