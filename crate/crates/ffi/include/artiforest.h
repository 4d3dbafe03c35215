#ifndef ARTIFOREST_H
#define ARTIFOREST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of an FFI call. Values 1 to 3 match the CLI exit codes.
 */
typedef enum AfStatus {
  AF_STATUS_OK = 0,
  AF_STATUS_INVALID_ARGUMENT = 1,
  AF_STATUS_FORMAT = 2,
  AF_STATUS_CAPACITY = 3,
  AF_STATUS_IO = 4,
  AF_STATUS_NULL_POINTER = 5,
  AF_STATUS_BUFFER_TOO_SMALL = 6,
  AF_STATUS_PANIC = 7,
} AfStatus;

/**
 * Opaque model handle.
 */
typedef struct AfForest AfForest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` as a
 * NUL-terminated string, truncating to `len` bytes. Returns the length the
 * full message needs including the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` writable bytes.
 */
size_t af_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *af_version(void);

/**
 * Loads a `.ctf` model from a file path.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AfStatus af_forest_load(const char *path, struct AfForest **out);

/**
 * Loads a model from an in-memory `.ctf` image.
 *
 * # Safety
 * `data` must be valid for `len` bytes and `out` a valid pointer.
 */
enum AfStatus af_forest_from_bytes(const uint8_t *data, size_t len, struct AfForest **out);

/**
 * Writes the model's `.ctf` image into `buf`. `written` receives the image
 * size, also when the buffer is too small.
 *
 * # Safety
 * `forest` must come from this library, `buf` be valid for `len` bytes (or
 * null with `len` 0) and `written` a valid pointer.
 */
enum AfStatus af_forest_serialize(const struct AfForest *forest,
                                  uint8_t *buf,
                                  size_t len,
                                  size_t *written);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `forest` must be null or a handle from this library not yet freed.
 */
void af_forest_free(struct AfForest *forest);

/**
 * Feature vector length the model expects; 0 for a null handle.
 *
 * # Safety
 * `forest` must be null or a live handle.
 */
size_t af_forest_n_features(const struct AfForest *forest);

/**
 * Predicted labels per feature vector: 1 for BC, one per channel otherwise.
 *
 * # Safety
 * `forest` must be null or a live handle.
 */
size_t af_forest_n_outputs(const struct AfForest *forest);

/**
 * # Safety
 * `forest` must be null or a live handle.
 */
size_t af_forest_n_classes(const struct AfForest *forest);

/**
 * Label scheme code: 0 BC, 1 MC, 2 MMC; -1 for a null handle.
 *
 * # Safety
 * `forest` must be null or a live handle.
 */
int32_t af_forest_scheme(const struct AfForest *forest);

/**
 * # Safety
 * `forest` must be null or a live handle.
 */
size_t af_forest_tree_count(const struct AfForest *forest);

/**
 * # Safety
 * `forest` must be null or a live handle.
 */
size_t af_forest_node_count(const struct AfForest *forest);

/**
 * Classifies `n_rows` row-major feature vectors of `n_features` values each.
 * `out` receives `n_rows * n_outputs` labels, row-major.
 *
 * # Safety
 * `forest` must be a live handle, `features` valid for
 * `n_rows * n_features` reads and `out` for `out_len` writes.
 */
enum AfStatus af_forest_predict(const struct AfForest *forest,
                                const double *features,
                                size_t n_rows,
                                size_t n_features,
                                uint16_t *out,
                                size_t out_len);

/**
 * Features of one one-second window. `samples` holds `n_channels` runs of
 * `fs` samples each, channel after channel. `out` receives
 * `5 * n_channels` values: per channel the high-band FFT energy and the four
 * Haar detail energies.
 *
 * # Safety
 * `samples` must be valid for `n_channels * fs` reads and `out` for
 * `out_len` writes.
 */
enum AfStatus af_extract_features(const double *samples,
                                  size_t n_channels,
                                  uint32_t fs,
                                  double *out,
                                  size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARTIFOREST_H */
