#ifndef ZEROVAR_H
#define ZEROVAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum ZvStatus {
  ZV_STATUS_OK = 0,
  ZV_STATUS_NULL_POINTER = 1,
  ZV_STATUS_INVALID_UTF8 = 2,
  ZV_STATUS_MALFORMED_SPEC = 3,
  ZV_STATUS_UNKNOWN_CATALOG = 4,
  ZV_STATUS_PARAMETER_OUT_OF_RANGE = 5,
  ZV_STATUS_INVALID_MEASURE = 6,
  ZV_STATUS_DEGENERATE_KERNEL = 7,
  ZV_STATUS_IDENTITY_VIOLATION = 8,
  ZV_STATUS_BUDGET = 9,
  ZV_STATUS_SIZE_GUARD = 10,
  ZV_STATUS_UNSUPPORTED = 11,
  ZV_STATUS_IO = 12,
  ZV_STATUS_PANIC = 13,
} ZvStatus;

// Opaque covariance kernel.
typedef struct ZvKernel ZvKernel;

// First two moments of the zero count with their standard errors.
typedef struct ZvMoments {
  double mean;
  double mean_se;
  double var;
  double var_se;
} ZvMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *zv_version(void);

// Copies the message of the last failure on this thread into `buf` (NUL-terminated,
// truncated to `len − 1` bytes) and returns the full message length in bytes.
// Pass a null `buf` to query the length only.
//
// # Safety
// `buf` must be null or point to at least `len` writable bytes.
uintptr_t zv_last_error(char *buf, uintptr_t len);

// Builds a kernel from a JSON spec such as `{"catalog":"gaussian"}` and stores the handle in `out`.
//
// # Safety
// `json` must be null or a NUL-terminated string; `out` must be null or writable.
enum ZvStatus zv_kernel_from_json(const char *json, struct ZvKernel **out);

// Releases a kernel handle. Null is ignored.
//
// # Safety
// `kernel` must be null or a handle from [`zv_kernel_from_json`] that was not freed before.
void zv_kernel_free(struct ZvKernel *kernel);

// `σ = √(−r″(0))`.
//
// # Safety
// `kernel` must be null or a live handle; `out` must be null or writable.
enum ZvStatus zv_kernel_sigma(const struct ZvKernel *kernel, double *out);

// Covariance `r(t)`.
//
// # Safety
// `kernel` must be null or a live handle; `out` must be null or writable.
enum ZvStatus zv_kernel_covariance(const struct ZvKernel *kernel, double t, double *out);

// Key integral `I(T) = ∫₀^T (1 − t/T) μ̂(t)² dt` to relative tolerance `tol`.
//
// # Safety
// `kernel` must be null or a live handle; `out` must be null or writable.
enum ZvStatus zv_key_integral(const struct ZvKernel *kernel, double t, double tol, double *out);

// Chaos-series estimate of `var N(T)` with default options. `lower_bound` may be null.
//
// # Safety
// `kernel` must be null or a live handle; `total` must be null or writable; `lower_bound`
// must be null or writable.
enum ZvStatus zv_variance_chaos(const struct ZvKernel *kernel,
                                double t,
                                double *total,
                                double *lower_bound);

// Monte Carlo mean and variance of the zero count on `[0, T]` by spectral synthesis.
//
// # Safety
// `kernel` must be null or a live handle; `out` must be null or writable.
enum ZvStatus zv_simulate(const struct ZvKernel *kernel,
                          double t,
                          double dt,
                          uint64_t n_paths,
                          uint64_t seed,
                          struct ZvMoments *out);

// Runs every exact identity check up to order `q_max` and stores the number of failing reports.
//
// # Safety
// `failures` must be null or writable.
enum ZvStatus zv_verify_identities(uint32_t q_max, uint32_t *failures);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZEROVAR_H */
