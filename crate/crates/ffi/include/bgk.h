#ifndef BGK_H
#define BGK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum BgkStatus {
  BGK_STATUS_OK = 0,
  BGK_STATUS_NULL_POINTER = 1,
  BGK_STATUS_DOMAIN = 2,
  BGK_STATUS_INVALID_ARGUMENT = 3,
  BGK_STATUS_NUMERICAL = 4,
  BGK_STATUS_PANIC = 5,
} BgkStatus;

/*
 Opaque spectral slice handle.
 */
typedef struct BgkSlice BgkSlice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL terminated,
 truncated to `len`). Returns the full message length plus one, or 0 when
 there is no error.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
uintptr_t bgk_last_error_message(char *buf, uintptr_t len);

/*
 Dawson function D(v).
 */
double bgk_dawson(double v);

/*
 Ξ(η) = sign(η)·√π·erfcx(|η|).

 # Safety
 `out` must be null or valid for writes.
 */
enum BgkStatus bgk_xi_function(double eta, double *out);

/*
 Λ(ξ) on the real branch, |ξ| < √π.

 # Safety
 `out` must be null or valid for writes.
 */
enum BgkStatus bgk_lambda(double xi, double *out);

/*
 Winding number of G along the real line.

 # Safety
 `out` must be null or valid for writes.
 */
enum BgkStatus bgk_winding_index(double xi, int32_t *out);

/*
 Builds a slice from samples of f̂₀(ξ, ·) at increasing velocities `v`,
 interpolated by a natural cubic spline.

 # Safety
 `v`, `re`, `im` must each point to `n` readable doubles; `out` must be
 valid for writes.
 */
enum BgkStatus bgk_slice_new(double xi,
                             const double *v,
                             const double *re,
                             const double *im,
                             uintptr_t n,
                             struct BgkSlice **out);

/*
 Releases a slice; null is ignored.

 # Safety
 `slice` must come from `bgk_slice_new` and not be used afterwards.
 */
void bgk_slice_free(struct BgkSlice *slice);

/*
 Index χ of the slice, or `INT32_MIN` for a null handle.

 # Safety
 `slice` must be null or a live handle.
 */
int32_t bgk_slice_chi(const struct BgkSlice *slice);

/*
 Real-branch coefficient C₀.

 # Safety
 `slice` must be null or a live handle; `re`, `im` valid for writes.
 */
enum BgkStatus bgk_slice_c0(const struct BgkSlice *slice, double *re, double *im);

/*
 Λ(ξ) of the slice; `Domain` on the index-0 branch.

 # Safety
 `slice` must be null or a live handle; `out` valid for writes.
 */
enum BgkStatus bgk_slice_lambda(const struct BgkSlice *slice, double *out);

/*
 Number of velocity nodes on which `bgk_slice_evolve` reports.

 # Safety
 `slice` must be null or a live handle.
 */
uintptr_t bgk_slice_len(const struct BgkSlice *slice);

/*
 Copies the output velocity nodes into `out` (length `n`).

 # Safety
 `slice` must be null or a live handle; `out` must hold `n` doubles.
 */
enum BgkStatus bgk_slice_nodes(const struct BgkSlice *slice, double *out, uintptr_t n);

/*
 f̂(t, v) on the output nodes, split into real and imaginary parts.

 # Safety
 `slice` must be null or a live handle; `re`, `im` must hold `n` doubles.
 */
enum BgkStatus bgk_slice_evolve(const struct BgkSlice *slice,
                                double t,
                                double *re,
                                double *im,
                                uintptr_t n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BGK_H */
