#ifndef WEVBG_H
#define WEVBG_H

/* Generated by cbindgen from the wevbg-ffi Rust sources; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this ABI.
 */
typedef enum wevbg_status {
  /**
   * The call succeeded.
   */
  WEVBG_OK = 0,
  /**
   * A pointer was null, a buffer had the wrong size, or a parameter
   * (selection string, block size, threshold, ...) was rejected.
   */
  WEVBG_INVALID_ARGUMENT = 1,
  /**
   * A named file or directory does not exist or matched nothing.
   */
  WEVBG_NOT_FOUND = 2,
  /**
   * Data was found but could not be decoded (image, model container,
   * or label file).
   */
  WEVBG_FORMAT = 3,
  /**
   * A numerical routine could not produce a usable result.
   */
  WEVBG_NUMERIC = 4,
  /**
   * The operating system reported an I/O failure.
   */
  WEVBG_IO = 5,
  /**
   * An internal invariant broke; the library state is still valid.
   */
  WEVBG_PANIC = 6,
} wevbg_status;

/**
 * An owned, immutable frame sequence.
 */
typedef struct wevbg_frames wevbg_frames;

/**
 * A trained set of per-block background models.
 */
typedef struct wevbg_models wevbg_models;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *wevbg_version(void);

/**
 * Message describing this thread's most recent failure, or an empty
 * string when nothing failed yet. The pointer stays valid until the
 * next failing call on the same thread.
 */
const char *wevbg_last_error_message(void);

/**
 * Loads frames from a directory of PGM/PNG files whose names match
 * `pattern` (e.g. `"*.pgm"`), sorted by filename. On success stores a
 * new handle in `*out`.
 *
 * # Safety
 * `dir` and `pattern` must be NUL-terminated strings; `out` must be a
 * valid pointer to a handle slot.
 */
enum wevbg_status wevbg_frames_load(const char *dir,
                                    const char *pattern,
                                    struct wevbg_frames **out);

/**
 * Builds a frame sequence from a packed buffer of `n_frames`
 * consecutive row-major `height`×`width` images, values in `[0, 1]`.
 * The buffer is copied; the caller keeps ownership of `pixels`.
 *
 * # Safety
 * `pixels` must point to `n_frames * height * width` doubles; `out`
 * must be a valid pointer to a handle slot.
 */
enum wevbg_status wevbg_frames_from_buffer(size_t height,
                                           size_t width,
                                           size_t n_frames,
                                           const double *pixels,
                                           struct wevbg_frames **out);

/**
 * Number of frames behind a handle; zero for null.
 *
 * # Safety
 * `frames` must be null or a live handle from this library.
 */
size_t wevbg_frames_count(const struct wevbg_frames *frames);

/**
 * Stores the frame shape in `*out_height` and `*out_width`.
 *
 * # Safety
 * `frames` must be a live handle; the out pointers must be valid.
 */
enum wevbg_status wevbg_frames_shape(const struct wevbg_frames *frames,
                                     size_t *out_height,
                                     size_t *out_width);

/**
 * Releases a frames handle. Null is ignored.
 *
 * # Safety
 * `frames` must be null or a live handle, and must not be used again.
 */
void wevbg_frames_free(struct wevbg_frames *frames);

/**
 * Trains per-block background models on `frames`, tiling each frame
 * with `block_height`×`block_width` blocks and keeping the eigenvector
 * subset described by `selection` (`"strongest:k"`, `"weakest:k"`,
 * `"idx:1,3,5"`, or `"all"`). On success stores a new handle in `*out`.
 *
 * # Safety
 * `frames` must be a live handle; `selection` must be a NUL-terminated
 * string; `out` must be a valid pointer to a handle slot.
 */
enum wevbg_status wevbg_models_train(const struct wevbg_frames *frames,
                                     size_t block_height,
                                     size_t block_width,
                                     const char *selection,
                                     struct wevbg_models **out);

/**
 * Serializes a model set into `dir` (created if missing).
 *
 * # Safety
 * `models` must be a live handle; `dir` must be a NUL-terminated string.
 */
enum wevbg_status wevbg_models_save(const struct wevbg_models *models, const char *dir);

/**
 * Loads a model set serialized by [`wevbg_models_save`]. On success
 * stores a new handle in `*out`.
 *
 * # Safety
 * `dir` must be a NUL-terminated string; `out` must be a valid pointer
 * to a handle slot.
 */
enum wevbg_status wevbg_models_load(const char *dir, struct wevbg_models **out);

/**
 * Pixels per frame the models expect; zero for null.
 *
 * # Safety
 * `models` must be null or a live handle.
 */
size_t wevbg_models_pixel_count(const struct wevbg_models *models);

/**
 * Releases a models handle. Null is ignored.
 *
 * # Safety
 * `models` must be null or a live handle, and must not be used again.
 */
void wevbg_models_free(struct wevbg_models *models);

/**
 * Estimates the background of one frame into `out_background`, a
 * caller-owned buffer of `pixel_count` doubles.
 *
 * # Safety
 * `models` must be a live handle; `frame` and `out_background` must
 * point to `pixel_count` doubles each.
 */
enum wevbg_status wevbg_estimate_background(const struct wevbg_models *models,
                                            const double *frame,
                                            size_t pixel_count,
                                            double *out_background);

/**
 * Segments one frame: pixels whose absolute residual against the
 * estimated background exceeds `tau` are marked `1` in `out_mask`, a
 * caller-owned buffer of `pixel_count` bytes.
 *
 * # Safety
 * `models` must be a live handle; `frame` must point to `pixel_count`
 * doubles and `out_mask` to `pixel_count` bytes.
 */
enum wevbg_status wevbg_segment(const struct wevbg_models *models,
                                const double *frame,
                                size_t pixel_count,
                                double tau,
                                uint8_t *out_mask);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEVBG_H */
