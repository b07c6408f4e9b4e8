/* C interface for magforge: deterministic synthesis of motion-magnification training data. */

#ifndef MAGFORGE_H
#define MAGFORGE_H

/* Generated by cbindgen from the magforge-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible FFI call.
typedef enum MfStatus {
  // Success.
  MF_STATUS_OK = 0,
  // A required pointer argument was null.
  MF_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  MF_STATUS_INVALID_UTF8 = 2,
  // The configuration failed validation.
  MF_STATUS_INVALID_CONFIG = 3,
  // Image or feature data was rejected (non-finite values, dimension
  // mismatch, degenerate size, or an empty mask).
  MF_STATUS_INVALID_DATA = 4,
  // A required input file or directory does not exist.
  MF_STATUS_MISSING_INPUT = 5,
  // A sample index was outside the configured range.
  MF_STATUS_INDEX_OUT_OF_RANGE = 6,
  // The asset catalog has no usable backgrounds or foregrounds.
  MF_STATUS_EMPTY_CATALOG = 7,
  // No object could be placed in a scene.
  MF_STATUS_UNPLACEABLE_SCENE = 8,
  // An operating-system or image-codec I/O failure.
  MF_STATUS_IO = 9,
  // JSON parsing or serialization failed.
  MF_STATUS_JSON = 10,
  // An internal invariant was violated (a bug; please report it).
  MF_STATUS_INTERNAL = 11,
} MfStatus;

// Opaque generation-configuration handle.
typedef struct MfConfig MfConfig;

// Outcome counts of one generation run. `produced + skipped = requested`.
typedef struct MfGenerationReport {
  // Samples the configuration asked for.
  uint64_t requested;
  // Samples written to disk.
  uint64_t produced;
  // Samples abandoned after all retry attempts.
  uint64_t skipped;
} MfGenerationReport;

// Full-reference metrics for one image pair.
//
// `psnr` is `+INFINITY` when the images are identical (`rmse == 0`).
typedef struct MfMetricReport {
  // Root-mean-square error in 8-bit code units, over all channels.
  double rmse;
  // Peak signal-to-noise ratio in dB relative to code value 255.
  double psnr;
  // Pixels compared (width times height).
  uint64_t n_pixels;
} MfMetricReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; never null, never freed.
const char *mf_version(void);

// Message for the most recent error on the calling thread, or an empty
// string. The pointer stays valid until the next failing call on the same
// thread; do not free it.
const char *mf_last_error(void);

// New configuration with library defaults. Free with `mf_config_free`.
struct MfConfig *mf_config_default(void);

// Parse and validate a configuration from JSON (same schema as the CLI's
// `--config` file; all fields optional, unknown fields rejected). Returns
// null on failure — consult `mf_last_error`. Free with
// `mf_config_free`.
//
// # Safety
// `json` must be null or a NUL-terminated string valid for the call.
struct MfConfig *mf_config_from_json(const char *json);

// Serialize a configuration to pretty JSON. Returns null on failure. Free
// the returned string with `mf_string_free`.
//
// # Safety
// `cfg` must be null or a live handle from this library.
char *mf_config_to_json(const struct MfConfig *cfg);

// Free a string returned by `mf_config_to_json`. Null is a no-op.
//
// # Safety
// `s` must be null or exactly a pointer previously returned by this
// library's string-returning functions, freed at most once.
void mf_string_free(char *s);

// Destroy a configuration handle. Null is a no-op.
//
// # Safety
// `cfg` must be null or a live handle from this library, freed at most
// once.
void mf_config_free(struct MfConfig *cfg);

// Point the configuration's output at `dir`.
//
// # Safety
// `cfg` must be a live handle; `dir` a NUL-terminated string.
enum MfStatus mf_config_set_output_dir(struct MfConfig *cfg, const char *dir);

// Set the global seed.
//
// # Safety
// `cfg` must be a live handle.
enum MfStatus mf_config_set_seed(struct MfConfig *cfg, uint64_t seed);

// Set the number of samples to generate (must be at least 1 to validate).
//
// # Safety
// `cfg` must be a live handle.
enum MfStatus mf_config_set_sample_count(struct MfConfig *cfg, uint64_t sample_count);

// Set the worker-thread count (never changes output bytes).
//
// # Safety
// `cfg` must be a live handle.
enum MfStatus mf_config_set_workers(struct MfConfig *cfg, uint64_t workers);

// Generate a dataset per the configuration: PNG triplets plus one
// `manifest.json` in the output directory. `report` (optional) receives
// the outcome counts. A run whose scenes partly fail still returns
// `MF_STATUS_OK`; inspect `report->produced` against `report->requested`.
//
// # Safety
// `cfg` must be a live handle; `report` null or valid for writes.
enum MfStatus mf_generate(const struct MfConfig *cfg, struct MfGenerationReport *report);

// Compare two image files: RMSE over 8-bit codes and PSNR. Writes the
// result to `out`.
//
// # Safety
// `pred` and `gt` must be NUL-terminated paths; `out` valid for writes.
enum MfStatus mf_evaluate_pair(const char *pred, const char *gt, struct MfMetricReport *out);

// Run the identity magnification chain on a frame pair and write the
// fused image as PNG to `out_path`. At `alpha = 1` the output equals
// frame B exactly.
//
// # Safety
// All three paths must be NUL-terminated strings.
enum MfStatus mf_magnify_pair(const char *frame_a,
                              const char *frame_b,
                              double alpha,
                              const char *out_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAGFORGE_H */
