#ifndef TUBESEG_H
#define TUBESEG_H

/* Generated by cbindgen from tubeseg-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Segmentation mode.
 */
typedef enum TubesegMode {
  TUBESEG_MODE_TFA = 0,
  TUBESEG_MODE_TFAE = 1,
} TubesegMode;

/**
 * Status code returned by every fallible entry point.
 */
typedef enum TubesegStatus {
  TUBESEG_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TUBESEG_STATUS_NULL_ARGUMENT = 1,
  /**
   * A configuration value is out of domain.
   */
  TUBESEG_STATUS_INVALID_PARAMETER = 2,
  /**
   * Image dimensions are unusable (zero, overflowing, or too small for
   * the configured filters).
   */
  TUBESEG_STATUS_INVALID_DIMENSION = 3,
  /**
   * The pixel data could not be processed (e.g. non-finite values).
   */
  TUBESEG_STATUS_DATA_ERROR = 4,
  /**
   * A caller-supplied buffer is too small.
   */
  TUBESEG_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * An internal panic was caught; see `tubeseg_last_error_message`.
   */
  TUBESEG_STATUS_PANIC = 6,
} TubesegStatus;

/**
 * Source of the SURE threshold estimate.
 */
typedef enum TubesegSureMode {
  TUBESEG_SURE_MODE_COEFFICIENTS = 0,
  TUBESEG_SURE_MODE_IMAGE = 1,
} TubesegSureMode;

/**
 * Tight-frame family used by the denoising step.
 */
typedef enum TubesegTransform {
  TUBESEG_TRANSFORM_FRAMELET = 0,
  TUBESEG_TRANSFORM_CURVELET = 1,
} TubesegTransform;

/**
 * Opaque segmentation result; release with `tubeseg_result_free`.
 */
typedef struct TubesegResult TubesegResult;

/**
 * Segmentation settings; mirror of the library configuration.
 */
typedef struct TubesegConfig {
  /**
   * Gaussian derivative scale (> 0).
   */
  double sigma;
  /**
   * Gradient-magnitude seeding threshold (> 0).
   */
  double epsilon;
  enum TubesegMode mode;
  enum TubesegTransform transform;
  enum TubesegSureMode sure_mode;
  /**
   * Iteration cap (>= 1).
   */
  uint32_t max_iterations;
  /**
   * Consecutive no-shrink iterations tolerated before fallback (>= 1).
   */
  uint32_t stall_patience;
} TubesegConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the library defaults (sigma 2, epsilon 0.02, tfae, curvelet,
 * coefficient-domain SURE, 50 iterations, patience 3).
 */
struct TubesegConfig tubeseg_config_default(void);

/**
 * Segments a row-major `width * height` image of doubles in [0, 1]
 * (values are clamped into that range) and stores a result handle in
 * `out_result`.  On any failure `out_result` is left untouched.
 *
 * # Safety
 * `pixels` must point to at least `width * height` readable doubles and
 * `out_result` to a writable pointer slot; the usual aliasing rules apply.
 */
enum TubesegStatus tubeseg_segment(const double *pixels,
                                   size_t width,
                                   size_t height,
                                   const struct TubesegConfig *config,
                                   struct TubesegResult **out_result);

/**
 * Image width of the result, or 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle from `tubeseg_segment`.
 */
size_t tubeseg_result_width(const struct TubesegResult *result);

/**
 * Image height of the result, or 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle from `tubeseg_segment`.
 */
size_t tubeseg_result_height(const struct TubesegResult *result);

/**
 * Number of iterations the segmentation executed.
 *
 * # Safety
 * `result` must be null or a live handle from `tubeseg_segment`.
 */
size_t tubeseg_result_iterations(const struct TubesegResult *result);

/**
 * Number of vessel pixels in the mask.
 *
 * # Safety
 * `result` must be null or a live handle from `tubeseg_segment`.
 */
size_t tubeseg_result_vessel_count(const struct TubesegResult *result);

/**
 * Termination reason as a static NUL-terminated string ("empty_set",
 * "stall_fallback", or "max_iterations"); null for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle from `tubeseg_segment`.
 */
const char *tubeseg_result_reason(const struct TubesegResult *result);

/**
 * Copies the row-major 0/1 mask into `out` (`out_len` >= width * height).
 *
 * # Safety
 * `out` must point to `out_len` writable bytes.
 */
enum TubesegStatus tubeseg_result_copy_mask(const struct TubesegResult *result,
                                            uint8_t *out,
                                            size_t out_len);

/**
 * Iteration trace as JSON lines (one object per iteration; empty string
 * for zero-iteration runs).  The pointer stays valid until the handle is
 * freed.
 *
 * # Safety
 * `result` must be null or a live handle from `tubeseg_segment`.
 */
const char *tubeseg_result_trace_jsonl(const struct TubesegResult *result);

/**
 * Releases a result handle; null is a no-op.
 *
 * # Safety
 * `result` must be a pointer returned by `tubeseg_segment` that has not
 * been freed already.
 */
void tubeseg_result_free(struct TubesegResult *result);

/**
 * Message for the most recent failure on this thread, or null if the last
 * call succeeded.  The pointer is invalidated by the next failing call on
 * the same thread.
 */
const char *tubeseg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tubeseg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TUBESEG_H */
