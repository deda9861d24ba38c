#ifndef RIM_H
#define RIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Values 2-4 match the `rim` CLI exit codes.
typedef enum RimStatus {
  RIM_STATUS_OK = 0,
  // A required pointer argument was null.
  RIM_STATUS_NULL_ARGUMENT = 1,
  // Bad configuration, preset name, UTF-8 or buffer length.
  RIM_STATUS_INVALID_ARGUMENT = 2,
  // Malformed input data or a degenerate signal.
  RIM_STATUS_DATA = 3,
  // Non-finite values.
  RIM_STATUS_NUMERIC = 4,
  // File system error.
  RIM_STATUS_IO = 5,
  // A Rust panic was caught at the boundary.
  RIM_STATUS_PANIC = 6,
} RimStatus;

// Selects one component of a synthesized scene.
typedef enum RimComponent {
  // The received mixture `y`.
  RIM_COMPONENT_MIXTURE = 0,
  RIM_COMPONENT_CLEAN = 1,
  RIM_COMPONENT_INTERFERENCE = 2,
  RIM_COMPONENT_NOISE = 3,
} RimComponent;

// A loaded checkpoint together with its pipeline settings.
typedef struct RimModel RimModel;

// One synthesized sweep.
typedef struct RimScene RimScene;

// Layout-compatible with `double[2]` as `{re, im}`.
typedef struct RimComplex {
  double re;
  double im;
} RimComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rim_version(void);

// Copies the calling thread's last error message into `buf` (truncated and
// always NUL-terminated when `cap > 0`). Returns the full message length in
// bytes, excluding the terminator; 0 when no error has been recorded.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
uintptr_t rim_last_error_message(char *buf, uintptr_t cap);

// SINR in dB of `recovered` against `reference`, both of length `len`.
//
// # Safety
// Both arrays must hold `len` elements; `out` must be writable.
enum RimStatus rim_sinr_db(const struct RimComplex *recovered,
                           const struct RimComplex *reference,
                           uintptr_t len,
                           double *out);

// Synthesizes scene `index` of the dataset with seed `dataset_seed`, the
// same scene `rim synth --seed <dataset_seed>` writes at that position.
// `config` is a preset name (`desk-64`, `paper-table1`) or a JSON file path.
//
// # Safety
// `config` must be a NUL-terminated string; `out` must be writable.
enum RimStatus rim_scene_synthesize(const char *config,
                                    uint64_t dataset_seed,
                                    uint64_t index,
                                    struct RimScene **out);

// Number of samples in the scene; 0 for a null handle.
//
// # Safety
// `scene` must be null or a live handle.
uintptr_t rim_scene_len(const struct RimScene *scene);

// Copies one component (a `RimComponent` value) into `out`, which must
// hold exactly `rim_scene_len(scene)` values.
//
// # Safety
// `scene` must be a live handle; `out` must hold `len` elements.
enum RimStatus rim_scene_copy(const struct RimScene *scene,
                              int32_t component,
                              struct RimComplex *out,
                              uintptr_t len);

// Realized input SINR of the scene in dB. Fails with `RIM_STATUS_DATA`
// for scenes without targets.
//
// # Safety
// `scene` must be a live handle; `out` must be writable.
enum RimStatus rim_scene_sinr_db(const struct RimScene *scene, double *out);

// Releases a scene. Null is ignored.
//
// # Safety
// `scene` must be null or a handle not yet freed.
void rim_scene_free(struct RimScene *scene);

// Loads a checkpoint written by `rim train`.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum RimStatus rim_model_load(const char *path, struct RimModel **out);

// Trainable real parameter count; 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
uintptr_t rim_model_parameter_count(const struct RimModel *model);

// Runs the full mitigation pipeline (STFT, chunking, network, integration,
// inverse STFT) on one sweep. `output` receives `len` samples.
//
// # Safety
// `model` must be a live handle; `input` and `output` must hold `len`
// elements each and may alias.
enum RimStatus rim_model_infer(const struct RimModel *model,
                               const struct RimComplex *input,
                               uintptr_t len,
                               struct RimComplex *output);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must be null or a handle not yet freed.
void rim_model_free(struct RimModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIM_H */
