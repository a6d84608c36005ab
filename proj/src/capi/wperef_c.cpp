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

#include "wperef/wperef.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/config.hpp"
#include "core/delay.hpp"
#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"
#include "core/room.hpp"
#include "core/selection.hpp"
#include "core/signal.hpp"
#include "core/speech.hpp"
#include "core/wav_io.hpp"
#include "core/wpe.hpp"

struct wperef_signal {
  wperef::MultichannelTimeSignal value;
};

struct wperef_scene {
  wperef::RoomScene value;
};

struct wperef_config {
  wperef::PipelineConfig value;
  std::vector<std::string> warnings;
};

namespace {

thread_local std::string g_last_error;

wperef_status set_error(wperef_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
wperef_status guarded(Fn&& fn) {
  try {
    fn();
    return WPEREF_OK;
  } catch (const wperef::Error& e) {
    return set_error(static_cast<wperef_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(WPEREF_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(WPEREF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(WPEREF_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(WPEREF_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* ptr, const char* what) {
  if (ptr == nullptr) {
    wperef::fail(wperef::ErrorCode::kInvalidArgument, std::string(what) + " is null");
  }
}

wperef::PipelineConfig pipeline_from_params(const wperef_wpe_params& p) {
  wperef::PipelineConfig cfg;
  cfg.stft.frame_size = p.frame_size;
  cfg.stft.shift = p.shift;
  cfg.wpe.filter_length = p.filter_length;
  cfg.wpe.iterations = p.iterations;
  cfg.wpe.p = p.p;
  cfg.wpe.epsilon = p.epsilon;
  cfg.wpe.base_delay = p.base_delay;
  cfg.wpe.ridge = p.ridge;
  cfg.wpe.threads = p.threads;
  cfg.uniform_delays = p.uniform_delays != 0;
  cfg.max_lag_seconds = p.max_lag_seconds;
  cfg.stft.validate();
  cfg.wpe.validate();
  return cfg;
}

wperef_wpe_params params_or_default(const wperef_wpe_params* params) {
  wperef_wpe_params p;
  if (params != nullptr) {
    p = *params;
  } else {
    wperef_wpe_params_default(&p);
  }
  return p;
}

const wperef::TimeSignal& first_channel(const wperef_signal* s, const char* what) {
  need(s, what);
  s->value.validate();
  return s->value.channels.front();
}

wperef_signal* wrap(wperef::MultichannelTimeSignal value) {
  return new wperef_signal{std::move(value)};
}

wperef_signal* wrap(wperef::TimeSignal value) {
  wperef::MultichannelTimeSignal multi;
  multi.channels.push_back(std::move(value));
  return wrap(std::move(multi));
}

wperef::Layout layout_from(const char* path) {
  return path == nullptr || *path == '\0' ? wperef::default_layout()
                                          : wperef::load_layout(path);
}

wperef::Logger bind_log(wperef_log_fn log, void* user) {
  if (log == nullptr) return {};
  return [log, user](const std::string& line) { log(line.c_str(), user); };
}

}  // namespace

extern "C" {

const char* wperef_version(void) { return "0.1.0"; }

const char* wperef_status_string(wperef_status status) {
  if (status < WPEREF_OK || status > WPEREF_ERR_INTERNAL) return "unknown status";
  return wperef::error_code_name(static_cast<wperef::ErrorCode>(status));
}

const char* wperef_last_error(void) { return g_last_error.c_str(); }

wperef_status wperef_signal_create(size_t channels, size_t length, int sample_rate,
                                   const double* data, wperef_signal** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    wperef::require(channels >= 1, "a signal needs at least one channel");
    wperef::require(length == 0 || data != nullptr, "data is null");
    wperef::MultichannelTimeSignal multi;
    multi.channels.resize(channels);
    for (size_t c = 0; c < channels; ++c) {
      multi.channels[c].sample_rate = sample_rate;
      multi.channels[c].samples.assign(data + c * length, data + (c + 1) * length);
    }
    multi.validate();
    *out = wrap(std::move(multi));
  });
}

wperef_status wperef_signal_read_wav(const char* path, wperef_signal** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = wrap(wperef::read_wav(path));
  });
}

wperef_status wperef_signal_write_wav(const wperef_signal* signal, const char* path, int float32,
                                      int clamp) {
  return guarded([&] {
    need(signal, "signal");
    need(path, "path");
    wperef::write_wav(path, signal->value,
                      float32 ? wperef::WavFormat::kFloat32 : wperef::WavFormat::kPcm16,
                      clamp != 0);
  });
}

size_t wperef_signal_channels(const wperef_signal* signal) {
  return signal == nullptr ? 0 : signal->value.num_channels();
}

size_t wperef_signal_length(const wperef_signal* signal) {
  return signal == nullptr ? 0 : signal->value.length();
}

int wperef_signal_sample_rate(const wperef_signal* signal) {
  return signal == nullptr ? 0 : signal->value.sample_rate();
}

wperef_status wperef_signal_copy_channel(const wperef_signal* signal, size_t channel,
                                         double* out, size_t capacity) {
  return guarded([&] {
    need(signal, "signal");
    need(out, "out");
    wperef::require(channel < signal->value.num_channels(), "channel out of range");
    const auto& s = signal->value.channels[channel].samples;
    std::copy_n(s.begin(), std::min(capacity, s.size()), out);
  });
}

void wperef_signal_destroy(wperef_signal* signal) { delete signal; }

void wperef_wpe_params_default(wperef_wpe_params* params) {
  if (params == nullptr) return;
  const wperef::PipelineConfig cfg;
  params->frame_size = cfg.stft.frame_size;
  params->shift = cfg.stft.shift;
  params->filter_length = cfg.wpe.filter_length;
  params->iterations = cfg.wpe.iterations;
  params->p = cfg.wpe.p;
  params->epsilon = cfg.wpe.epsilon;
  params->base_delay = cfg.wpe.base_delay;
  params->ridge = cfg.wpe.ridge;
  params->threads = cfg.wpe.threads;
  params->uniform_delays = cfg.uniform_delays ? 1 : 0;
  params->max_lag_seconds = cfg.max_lag_seconds;
}

wperef_status wperef_estimate_tdoa(const wperef_signal* mixture, size_t max_lag,
                                   double* out_samples) {
  return guarded([&] {
    need(mixture, "mixture");
    need(out_samples, "out_samples");
    const auto tdoa = wperef::estimate_tdoa_matrix(mixture->value, max_lag);
    const auto m = static_cast<Eigen::Index>(tdoa.size());
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) out_samples[i * m + j] = tdoa.delta(i, j);
    }
  });
}

wperef_status wperef_dereverb(const wperef_signal* mixture, size_t reference,
                              const wperef_wpe_params* params, wperef_signal** out) {
  return guarded([&] {
    need(mixture, "mixture");
    need(out, "out");
    *out = nullptr;
    mixture->value.validate();
    wperef::require(reference < mixture->value.num_channels(), "reference out of range");
    const auto cfg = pipeline_from_params(params_or_default(params));
    const auto specs = wperef::stft_analyze_all(mixture->value, cfg.stft);
    const auto plan = wperef::plan_delays(cfg, mixture->value);
    const auto result = wperef::run_wpe(specs, reference, plan.delays, cfg.wpe);
    *out = wrap(wperef::stft_synthesize(result.output, cfg.stft));
  });
}

wperef_status wperef_select_reference(const wperef_signal* mixture, const char* criterion,
                                      const wperef_wpe_params* params, const wperef_scene* oracle,
                                      size_t* chosen, double* scores) {
  return guarded([&] {
    need(mixture, "mixture");
    need(criterion, "criterion");
    need(chosen, "chosen");
    mixture->value.validate();
    const auto cfg = pipeline_from_params(params_or_default(params));
    const auto crit = wperef::SelectionCriterion::parse(criterion);
    const auto specs = wperef::stft_analyze_all(mixture->value, cfg.stft);
    wperef::DelayPlan plan;
    if (crit.uses_wpe()) plan = wperef::plan_delays(cfg, mixture->value);
    else plan.delays = wperef::PredictionDelayMatrix::uniform(specs.size(), cfg.wpe.base_delay);
    wperef::SelectionOptions options;
    if (oracle != nullptr) {
      wperef::require(oracle->value.num_mics() == specs.size(),
                      "oracle scene and mixture have different channel counts");
      options.oracle = &oracle->value;
    }
    const auto result = wperef::select_reference(specs, crit, plan.delays, cfg.wpe, options);
    *chosen = result.chosen;
    if (scores != nullptr) std::copy(result.scores.begin(), result.scores.end(), scores);
  });
}

wperef_status wperef_scene_simulate(const char* layout_path, size_t source_index,
                                    wperef_scene** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    const auto layout = layout_from(layout_path);
    wperef::require(source_index < layout.sources.size(), "source index out of range");
    *out = new wperef_scene{
        wperef::simulate_rir(layout.scene_spec(source_index), layout.seed + source_index)};
  });
}

wperef_status wperef_layout_source_count(const char* layout_path, size_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = layout_from(layout_path).sources.size();
  });
}

wperef_status wperef_scene_from_rirs(const wperef_signal* rirs, wperef_scene** out) {
  return guarded([&] {
    need(rirs, "rirs");
    need(out, "out");
    *out = nullptr;
    *out = new wperef_scene{wperef::scene_from_rirs(rirs->value)};
  });
}

size_t wperef_scene_mics(const wperef_scene* scene) {
  return scene == nullptr ? 0 : scene->value.num_mics();
}

wperef_status wperef_scene_rirs(const wperef_scene* scene, wperef_signal** out) {
  return guarded([&] {
    need(scene, "scene");
    need(out, "out");
    *out = nullptr;
    wperef::MultichannelTimeSignal multi;
    size_t longest = 0;
    for (const auto& ir : scene->value.rirs) longest = std::max(longest, ir.taps.size());
    for (const auto& ir : scene->value.rirs) {
      wperef::TimeSignal ch;
      ch.sample_rate = scene->value.sample_rate();
      ch.samples = ir.taps;
      ch.samples.resize(longest, 0.0);
      multi.channels.push_back(std::move(ch));
    }
    *out = wrap(std::move(multi));
  });
}

wperef_status wperef_scene_direct_path(const wperef_scene* scene, size_t mic, size_t* out) {
  return guarded([&] {
    need(scene, "scene");
    need(out, "out");
    wperef::require(mic < scene->value.num_mics(), "microphone out of range");
    *out = scene->value.rirs[mic].direct_path_index;
  });
}

wperef_status wperef_scene_render(const wperef_scene* scene, const wperef_signal* dry,
                                  wperef_signal** out) {
  return guarded([&] {
    need(scene, "scene");
    need(out, "out");
    *out = nullptr;
    *out = wrap(wperef::render_scene(scene->value, first_channel(dry, "dry")));
  });
}

wperef_status wperef_scene_target(const wperef_scene* scene, const wperef_signal* dry,
                                  size_t mic, double early_ms, wperef_signal** out) {
  return guarded([&] {
    need(scene, "scene");
    need(out, "out");
    *out = nullptr;
    wperef::require(mic < scene->value.num_mics(), "microphone out of range");
    *out = wrap(
        wperef::direct_early_target(scene->value, first_channel(dry, "dry"), mic, early_ms));
  });
}

wperef_status wperef_scene_elr(const wperef_scene* scene, size_t mic, double early_ms,
                               double* out_db) {
  return guarded([&] {
    need(scene, "scene");
    need(out_db, "out_db");
    wperef::require(mic < scene->value.num_mics(), "microphone out of range");
    *out_db = wperef::elr_oracle(scene->value, mic, early_ms);
  });
}

void wperef_scene_destroy(wperef_scene* scene) { delete scene; }

wperef_status wperef_synthetic_speech(double seconds, int sample_rate, uint64_t seed,
                                      wperef_signal** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = wrap(wperef::synthetic_speech(seconds, sample_rate, seed));
  });
}

wperef_status wperef_fwssnr(const wperef_signal* estimate, const wperef_signal* target,
                            double* out_db) {
  return guarded([&] {
    need(out_db, "out_db");
    *out_db = wperef::fwssnr(first_channel(estimate, "estimate"), first_channel(target, "target"));
  });
}

wperef_status wperef_segsnr(const wperef_signal* estimate, const wperef_signal* target,
                            double* out_db) {
  return guarded([&] {
    need(out_db, "out_db");
    *out_db = wperef::segsnr(first_channel(estimate, "estimate"), first_channel(target, "target"));
  });
}

wperef_status wperef_config_create(wperef_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new wperef_config{};
  });
}

wperef_status wperef_config_load(const char* path, wperef_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new wperef_config{wperef::load_config(path), {}};
  });
}

wperef_status wperef_config_merge(wperef_config* config, const char* json_patch) {
  return guarded([&] {
    need(config, "config");
    need(json_patch, "json_patch");
    config->value = wperef::merge_config(config->value, nlohmann::json::parse(json_patch));
  });
}

wperef_status wperef_config_validate(const wperef_config* config) {
  return guarded([&] {
    need(config, "config");
    config->value.validate();
  });
}

wperef_status wperef_config_to_json(const wperef_config* config, char* buffer, size_t capacity,
                                    size_t* needed) {
  return guarded([&] {
    need(config, "config");
    const auto text = wperef::serialize_config(config->value);
    if (needed != nullptr) *needed = text.size() + 1;
    if (buffer == nullptr || capacity < text.size() + 1) {
      wperef::fail(wperef::ErrorCode::kInvalidArgument, "buffer too small");
    }
    std::memcpy(buffer, text.c_str(), text.size() + 1);
  });
}

wperef_status wperef_config_hash(const wperef_config* config, char* buffer, size_t capacity) {
  return guarded([&] {
    need(config, "config");
    need(buffer, "buffer");
    const auto hash = wperef::config_hash(config->value);
    wperef::require(capacity > hash.size(), "buffer too small");
    std::memcpy(buffer, hash.c_str(), hash.size() + 1);
  });
}

size_t wperef_config_warning_count(const wperef_config* config) {
  if (config == nullptr) return 0;
  auto* mutable_config = const_cast<wperef_config*>(config);
  mutable_config->warnings = config->value.warnings();
  return config->warnings.size();
}

const char* wperef_config_warning(const wperef_config* config, size_t index) {
  if (config == nullptr || index >= config->warnings.size()) return nullptr;
  return config->warnings[index].c_str();
}

void wperef_config_destroy(wperef_config* config) { delete config; }

wperef_status wperef_config_scene_count(const wperef_config* config, size_t* out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = wperef::scene_tasks(config->value).size();
  });
}

wperef_status wperef_config_load_scene(const wperef_config* config, size_t index, char* name,
                                       size_t name_capacity, wperef_scene** scene,
                                       wperef_signal** dry, wperef_signal** mixture) {
  return guarded([&] {
    need(config, "config");
    if (scene != nullptr) *scene = nullptr;
    if (dry != nullptr) *dry = nullptr;
    if (mixture != nullptr) *mixture = nullptr;
    const auto tasks = wperef::scene_tasks(config->value);
    wperef::require(index < tasks.size(), "scene index out of range");
    auto input = wperef::load_scene(config->value, tasks[index]);
    if (name != nullptr) {
      wperef::require(name_capacity > input.name.size(), "name buffer too small");
      std::memcpy(name, input.name.c_str(), input.name.size() + 1);
    }
    if (scene != nullptr && input.room) *scene = new wperef_scene{std::move(*input.room)};
    if (dry != nullptr && input.dry) *dry = wrap(std::move(*input.dry));
    if (mixture != nullptr) *mixture = wrap(std::move(input.mixture));
  });
}

wperef_status wperef_run_dereverb(const wperef_config* config, wperef_log_fn log, void* user,
                                  wperef_run_summary* summary) {
  return guarded([&] {
    need(config, "config");
    const auto run = wperef::run_dereverb(config->value, bind_log(log, user));
    if (summary != nullptr) *summary = {run.scenes.size(), run.failed};
  });
}

wperef_status wperef_run_benchmark(const wperef_config* config, size_t n_seeds, wperef_log_fn log,
                                   void* user, wperef_run_summary* summary) {
  return guarded([&] {
    need(config, "config");
    const auto run = wperef::run_benchmark(config->value, n_seeds, bind_log(log, user));
    if (summary != nullptr) *summary = {run.scenes.size(), run.failed};
  });
}

}  // extern "C"
