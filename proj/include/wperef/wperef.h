// Copyright 2026 The wperef Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// C interface to the wperef dereverberation toolkit.
//
// Objects are opaque handles created by *_create/*_load/*_simulate calls and
// released with the matching *_destroy. Every fallible call returns a
// wperef_status; on failure a thread-local message is available from
// wperef_last_error() until the next failing call on the same thread.
// Microphone indices are zero-based.

#ifndef WPEREF_WPEREF_H_
#define WPEREF_WPEREF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(WPEREF_BUILDING_LIBRARY)
#    define WPEREF_API __declspec(dllexport)
#  else
#    define WPEREF_API __declspec(dllimport)
#  endif
#else
#  define WPEREF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wperef_status {
  WPEREF_OK = 0,
  WPEREF_ERR_INVALID_ARGUMENT = 1,
  WPEREF_ERR_SIGNAL_TOO_SHORT = 2,
  WPEREF_ERR_UTTERANCE_TOO_SHORT = 3,
  WPEREF_ERR_DEGENERATE_SYSTEM = 4,
  WPEREF_ERR_SILENT_CHANNEL = 5,
  WPEREF_ERR_ROOM_TOO_DEAD = 6,
  WPEREF_ERR_MISSING_ORACLE = 7,
  WPEREF_ERR_IO = 8,
  WPEREF_ERR_CLIPPING = 9,
  WPEREF_ERR_CONFIG = 10,
  WPEREF_ERR_INTERNAL = 11
} wperef_status;

typedef struct wperef_signal wperef_signal;
typedef struct wperef_scene wperef_scene;
typedef struct wperef_config wperef_config;

WPEREF_API const char* wperef_version(void);
WPEREF_API const char* wperef_status_string(wperef_status status);
WPEREF_API const char* wperef_last_error(void);

/* Multichannel signals ---------------------------------------------------- */

// data holds channels * length samples, channel after channel.
WPEREF_API wperef_status wperef_signal_create(size_t channels, size_t length, int sample_rate,
                                              const double* data, wperef_signal** out);
WPEREF_API wperef_status wperef_signal_read_wav(const char* path, wperef_signal** out);
// float32 != 0 writes 32-bit float, otherwise 16-bit PCM. Without clamp,
// PCM samples outside [-1, 1] fail with WPEREF_ERR_CLIPPING.
WPEREF_API wperef_status wperef_signal_write_wav(const wperef_signal* signal, const char* path,
                                                 int float32, int clamp);
WPEREF_API size_t wperef_signal_channels(const wperef_signal* signal);
WPEREF_API size_t wperef_signal_length(const wperef_signal* signal);
WPEREF_API int wperef_signal_sample_rate(const wperef_signal* signal);
// Copies min(capacity, length) samples of one channel.
WPEREF_API wperef_status wperef_signal_copy_channel(const wperef_signal* signal, size_t channel,
                                                    double* out, size_t capacity);
WPEREF_API void wperef_signal_destroy(wperef_signal* signal);

/* Dereverberation --------------------------------------------------------- */

typedef struct wperef_wpe_params {
  size_t frame_size;      // STFT frame, power of two (1024)
  size_t shift;           // STFT hop (256)
  size_t filter_length;   // prediction filter taps per channel (15)
  size_t iterations;      // reweighting iterations (10)
  double p;               // sparsity parameter in (0, 2] (0.5)
  double epsilon;         // weight floor (1e-7)
  size_t base_delay;      // prediction delay in frames (2)
  double ridge;           // fallback ridge for singular normal equations (1e-10)
  size_t threads;         // frequency-parallel workers, 0 = all cores (1)
  int uniform_delays;     // nonzero skips TDOA estimation (0)
  double max_lag_seconds; // GCC-PHAT search radius (0.05)
} wperef_wpe_params;

WPEREF_API void wperef_wpe_params_default(wperef_wpe_params* params);

// out_samples receives M * M arrival-time differences in samples, row-major;
// entry (m, r) is arrival at m minus arrival at r.
WPEREF_API wperef_status wperef_estimate_tdoa(const wperef_signal* mixture, size_t max_lag,
                                              double* out_samples);

// Runs WPE with the given reference and returns a single-channel signal of
// the mixture's length.
WPEREF_API wperef_status wperef_dereverb(const wperef_signal* mixture, size_t reference,
                                         const wperef_wpe_params* params, wperef_signal** out);

// criterion: "lp[:I]", "nlp[:I]", "maxpower" or "maxelr" (needs oracle).
// scores, if not NULL, receives one value per channel.
WPEREF_API wperef_status wperef_select_reference(const wperef_signal* mixture,
                                                 const char* criterion,
                                                 const wperef_wpe_params* params,
                                                 const wperef_scene* oracle, size_t* chosen,
                                                 double* scores);

/* Simulated scenes -------------------------------------------------------- */

// Image-source scene for one source of a layout file (NULL: built-in
// layout). The seed is the layout seed plus source_index.
WPEREF_API wperef_status wperef_scene_simulate(const char* layout_path, size_t source_index,
                                               wperef_scene** out);
WPEREF_API wperef_status wperef_layout_source_count(const char* layout_path, size_t* out);
// Scene from a multichannel RIR recording; direct paths at the absolute peaks.
WPEREF_API wperef_status wperef_scene_from_rirs(const wperef_signal* rirs, wperef_scene** out);
WPEREF_API size_t wperef_scene_mics(const wperef_scene* scene);
WPEREF_API wperef_status wperef_scene_rirs(const wperef_scene* scene, wperef_signal** out);
WPEREF_API wperef_status wperef_scene_direct_path(const wperef_scene* scene, size_t mic,
                                                  size_t* out);
// Full convolution of a mono dry signal with every RIR.
WPEREF_API wperef_status wperef_scene_render(const wperef_scene* scene, const wperef_signal* dry,
                                             wperef_signal** out);
// Dry signal convolved with the RIR up to early_ms past the direct path.
WPEREF_API wperef_status wperef_scene_target(const wperef_scene* scene, const wperef_signal* dry,
                                             size_t mic, double early_ms, wperef_signal** out);
// Early-to-late energy ratio in dB; +inf when there is no late energy.
WPEREF_API wperef_status wperef_scene_elr(const wperef_scene* scene, size_t mic, double early_ms,
                                          double* out_db);
WPEREF_API void wperef_scene_destroy(wperef_scene* scene);

// Seeded speech-like test signal, peak amplitude 0.5.
WPEREF_API wperef_status wperef_synthetic_speech(double seconds, int sample_rate, uint64_t seed,
                                                 wperef_signal** out);

/* Metrics ----------------------------------------------------------------- */

// Both scores use the first channel of each signal; the longer is truncated.
WPEREF_API wperef_status wperef_fwssnr(const wperef_signal* estimate, const wperef_signal* target,
                                       double* out_db);
WPEREF_API wperef_status wperef_segsnr(const wperef_signal* estimate, const wperef_signal* target,
                                       double* out_db);

/* Experiment configuration and batch runs --------------------------------- */

WPEREF_API wperef_status wperef_config_create(wperef_config** out);
WPEREF_API wperef_status wperef_config_load(const char* path, wperef_config** out);
// Applies a JSON merge patch, e.g. {"wpe": {"iterations": 5}}.
WPEREF_API wperef_status wperef_config_merge(wperef_config* config, const char* json_patch);
WPEREF_API wperef_status wperef_config_validate(const wperef_config* config);
// Writes a NUL-terminated string if it fits; *needed (if not NULL) receives
// the size including the terminator.
WPEREF_API wperef_status wperef_config_to_json(const wperef_config* config, char* buffer,
                                               size_t capacity, size_t* needed);
WPEREF_API wperef_status wperef_config_hash(const wperef_config* config, char* buffer,
                                            size_t capacity);
WPEREF_API size_t wperef_config_warning_count(const wperef_config* config);
WPEREF_API const char* wperef_config_warning(const wperef_config* config, size_t index);
WPEREF_API void wperef_config_destroy(wperef_config* config);

// Scenes the config describes (layout sources or WAV files), in run order.
WPEREF_API wperef_status wperef_config_scene_count(const wperef_config* config, size_t* out);
// Loads scene 'index' exactly as a run would. Every output may be NULL;
// *scene and *dry are set to NULL for plain mixture WAVs.
WPEREF_API wperef_status wperef_config_load_scene(const wperef_config* config, size_t index,
                                                  char* name, size_t name_capacity,
                                                  wperef_scene** scene, wperef_signal** dry,
                                                  wperef_signal** mixture);

typedef void (*wperef_log_fn)(const char* line, void* user);

typedef struct wperef_run_summary {
  size_t scenes_total;
  size_t scenes_failed;
} wperef_run_summary;

// Per-scene failures are logged and counted in the summary; the call itself
// fails only for configuration or output-directory errors.
WPEREF_API wperef_status wperef_run_dereverb(const wperef_config* config, wperef_log_fn log,
                                             void* user, wperef_run_summary* summary);
WPEREF_API wperef_status wperef_run_benchmark(const wperef_config* config, size_t n_seeds,
                                              wperef_log_fn log, void* user,
                                              wperef_run_summary* summary);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // WPEREF_WPEREF_H_
