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
#ifndef WPEREF_CORE_PIPELINE_HPP_
#define WPEREF_CORE_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/config.hpp"
#include "core/delay.hpp"
#include "core/metrics.hpp"
#include "core/room.hpp"

namespace wperef {

inline constexpr const char* kReportSchema = "wperef.report/1";

// Everything needed to process one scene. Metrics and the oracle-ELR
// baseline require 'room' and 'dry'.
struct SceneInput {
  std::string name;
  MultichannelTimeSignal mixture;
  std::optional<RoomScene> room;
  std::optional<TimeSignal> dry;
};

struct ReportRow {
  std::string scene;
  double p = 0.0;
  MetricReport metrics;  // criterion is resolved (no full-budget placeholder)
  bool has_metrics = false;
  std::vector<double> scores;
  double input_fwssnr = 0.0;  // reverberant chosen microphone vs its target
  std::string wav;            // empty unless written
};

struct SceneOutcome {
  std::string name;
  bool ok = false;
  std::string error;
  std::vector<ReportRow> rows;
  TdoaMatrix tdoa;
  PredictionDelayMatrix delays;
  std::vector<std::string> files;
};

struct SummaryRow {
  std::string criterion;
  double p = 0.0;
  std::size_t scenes = 0;
  double mean_delta_fwssnr = 0.0;
  double sd_delta_fwssnr = 0.0;
  double mean_fwssnr = 0.0;

  bool operator==(const SummaryRow&) const = default;
};

struct RunResult {
  std::string config_hash;
  std::vector<SceneOutcome> scenes;
  std::vector<SummaryRow> summary;
  std::vector<std::string> files;
  std::size_t failed = 0;
};

using Logger = std::function<void(const std::string&)>;

// Scene descriptors resolved from the config, loaded lazily by process_scene.
struct SceneTask {
  std::string name;
  SceneSourceKind kind = SceneSourceKind::kSynthetic;
  RoomSpec spec;               // synthetic
  std::uint64_t room_seed = 0;  // synthetic
  std::uint64_t dry_seed = 0;   // synthetic without dry_wav
  std::string path;            // mixture or RIR WAV
};

std::vector<SceneTask> scene_tasks(const PipelineConfig& cfg);
SceneInput load_scene(const PipelineConfig& cfg, const SceneTask& task);

struct DelayPlan {
  TdoaMatrix tdoa;
  PredictionDelayMatrix delays;
};

// TDOA from cfg.tdoa_csv or GCC-PHAT, mapped to prediction delays. Uniform
// delays (zero TDOA) for a single channel or when cfg.uniform_delays is set.
DelayPlan plan_delays(const PipelineConfig& cfg, const MultichannelTimeSignal& mixture);

// STFT, delays, WPE for every candidate reference and p, selection under
// every criterion, metrics and (optionally) dereverberated WAVs.
SceneOutcome process_scene(const PipelineConfig& cfg, const SceneInput& input,
                           const Logger& log = {});

// Mean and sample standard deviation of delta FWSSNR per (criterion, p), in
// config order.
std::vector<SummaryRow> summarize(const PipelineConfig& cfg,
                                  const std::vector<SceneOutcome>& scenes);

// Processes every scene with cfg.workers parallel scenes, writes report.csv,
// report.json, summary.csv and manifest.json into cfg.output_dir. A failing
// scene is logged and counted; other scenes are unaffected.
RunResult run_dereverb(const PipelineConfig& cfg, const Logger& log = {});

// The config for benchmark repetition k: the layout's room and microphones
// with one random source position, seeded from cfg.seed + k.
PipelineConfig benchmark_config(const PipelineConfig& cfg, std::size_t k);

// Repeats run_dereverb over n_seeds random source positions (synthetic scenes
// only, no WAV output) and writes benchmark_summary.csv/json.
RunResult run_benchmark(const PipelineConfig& cfg, std::size_t n_seeds,
                        const Logger& log = {});

nlohmann::json report_json(const PipelineConfig& cfg, const RunResult& run);
std::string report_csv(const RunResult& run);
std::string summary_csv(const RunResult& run);

}  // namespace wperef

#endif  // WPEREF_CORE_PIPELINE_HPP_
