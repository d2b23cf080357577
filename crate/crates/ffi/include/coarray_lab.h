#ifndef COARRAY_LAB_H
#define COARRAY_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum CoarrayStatus {
  COARRAY_STATUS_OK = 0,
  COARRAY_STATUS_NULL_POINTER = 1,
  COARRAY_STATUS_INVALID_ARGUMENT = 2,
  COARRAY_STATUS_GEOMETRY = 3,
  COARRAY_STATUS_SCENARIO = 4,
  COARRAY_STATUS_TOO_MANY_SOURCES = 5,
  COARRAY_STATUS_SINGULAR_COVARIANCE = 6,
  COARRAY_STATUS_CRB_UNDEFINED = 7,
  COARRAY_STATUS_BUFFER_TOO_SMALL = 8,
  // The spectrum had fewer peaks than sources.
  COARRAY_STATUS_UNRESOLVED = 9,
  COARRAY_STATUS_NUMERICAL = 10,
  COARRAY_STATUS_PANIC = 99,
} CoarrayStatus;

// Coarray augmentation used before MUSIC.
typedef enum CoarrayMethod {
  COARRAY_METHOD_DIRECT = 0,
  COARRAY_METHOD_SPATIAL_SMOOTHING = 1,
} CoarrayMethod;

// Opaque sensor array with its precomputed difference coarray.
typedef struct CoarrayArray CoarrayArray;

// Opaque source scenario.
typedef struct CoarrayScenario CoarrayScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL after a
// success. Valid until the next call into the library on the same thread.
const char *coarray_last_error(void);

// Library version as a static NUL-terminated string.
const char *coarray_version(void);

// Builds an array from a textual spec such as `"nested:5,5"`,
// `"coprime:3,5"`, `"mra:10"`, `"ula:8"` or `"custom:0,1,4"`.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum CoarrayStatus coarray_array_from_spec(const char *spec,
                                           double d0,
                                           double wavelength,
                                           struct CoarrayArray **out);

// Builds an array from integer sensor positions in units of `d0`.
//
// # Safety
// `positions` must hold `len` elements; `out` must be writable.
enum CoarrayStatus coarray_array_from_positions(const int64_t *positions,
                                                size_t len,
                                                double d0,
                                                double wavelength,
                                                struct CoarrayArray **out);

// # Safety
// `array` must come from a constructor above and not be freed twice.
void coarray_array_free(struct CoarrayArray *array);

// Number of physical sensors.
//
// # Safety
// `array` must be a live handle; `out` must be writable.
enum CoarrayStatus coarray_array_num_sensors(const struct CoarrayArray *array, size_t *out);

// Half-size `Mv` of the central virtual ULA.
//
// # Safety
// `array` must be a live handle; `out` must be writable.
enum CoarrayStatus coarray_array_virtual_size(const struct CoarrayArray *array, size_t *out);

// Copies the ascending sensor positions into `buf`.
//
// # Safety
// `buf` must hold `cap` elements.
enum CoarrayStatus coarray_array_positions(const struct CoarrayArray *array,
                                           int64_t *buf,
                                           size_t cap);

// Scenario with `k` sources at `doas` (radians) with `powers`, plus white
// noise of power `noise_power`.
//
// # Safety
// `doas` and `powers` must hold `k` elements; `out` must be writable.
enum CoarrayStatus coarray_scenario_new(const double *doas,
                                        const double *powers,
                                        size_t k,
                                        double noise_power,
                                        struct CoarrayScenario **out);

// # Safety
// `scenario` must come from [`coarray_scenario_new`] and not be freed twice.
void coarray_scenario_free(struct CoarrayScenario *scenario);

// Asymptotic per-source MSE (rad²) of coarray MUSIC with `n` snapshots.
// Writes `K` values to `out`.
//
// # Safety
// Handles must be live; `out` must hold `cap` doubles.
enum CoarrayStatus coarray_analytical_mse(const struct CoarrayArray *array,
                                          const struct CoarrayScenario *scenario,
                                          size_t n,
                                          double *out,
                                          size_t cap);

// Trace of the stochastic CRB on the DOAs (rad²) with `n` snapshots.
//
// # Safety
// Handles must be live; `out` must be writable.
enum CoarrayStatus coarray_crb_trace(const struct CoarrayArray *array,
                                     const struct CoarrayScenario *scenario,
                                     size_t n,
                                     double *out);

// Estimates `k` DOAs from `n` snapshots of the array.
//
// `snapshots` holds `2·M·n` doubles: interleaved real and imaginary
// parts, one snapshot after another, so sensor `i` of snapshot `t` sits at
// index `2·(t·M + i)`. A `grid_step_deg` of zero selects the default grid.
// Writes `k` ascending DOAs in radians, or returns
// `COARRAY_STATUS_UNRESOLVED` when the spectrum shows fewer than `k` peaks.
//
// # Safety
// `snapshots` must hold `2·M·n` doubles; `out` must hold `cap` doubles.
enum CoarrayStatus coarray_estimate(const struct CoarrayArray *array,
                                    const double *snapshots,
                                    size_t n,
                                    size_t k,
                                    enum CoarrayMethod method,
                                    double grid_step_deg,
                                    double *out,
                                    size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COARRAY_LAB_H */
