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
#ifndef WPEREF_CORE_CONFIG_HPP_
#define WPEREF_CORE_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/room.hpp"
#include "core/selection.hpp"
#include "core/signal.hpp"
#include "core/wav_io.hpp"
#include "core/wpe.hpp"

namespace wperef {

inline constexpr const char* kConfigSchema = "wperef.config/1";
inline constexpr const char* kLayoutSchema = "wperef.layout/1";

// Room, microphone array and a list of source positions; each source is one
// scene. A single-scene description is a layout with one source.
struct Layout {
  RoomSpec room;  // room.source is ignored
  std::vector<Point3> sources;
  std::uint64_t seed = 1;

  RoomSpec scene_spec(std::size_t source_index) const;
  bool operator==(const Layout&) const = default;
};

// 8 microphones spread through a 6 x 7 x 2.7 m room with 12 source positions.
Layout default_layout();

enum class SceneSourceKind { kSynthetic, kWavMixtures, kWavRirs };

struct SceneSource {
  SceneSourceKind kind = SceneSourceKind::kSynthetic;
  std::string layout;        // synthetic; empty selects default_layout()
  std::optional<Layout> inline_layout;  // takes precedence over 'layout'
  std::string mixtures_dir;  // one multichannel WAV per scene, no metrics
  std::string rir_dir;       // one multichannel RIR WAV per scene
  std::string dry_wav;       // anechoic source; synthetic speech when empty

  bool operator==(const SceneSource&) const = default;
};

struct PipelineConfig {
  StftConfig stft;
  WpeConfig wpe;
  std::vector<SelectionCriterion> criteria;
  std::vector<double> p_values{0.05, 0.5, 0.9};
  SceneSource scenes;
  std::string output_dir = "wperef_out";
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  // Synthetic utterance length. Shorter signals leave too few frames per
  // prediction tap and WPE starts fitting the direct sound.
  double dry_seconds = 6.0;
  double elr_early_ms = kDefaultEarlyMs;
  double target_early_ms = 0.0;  // 0 scores against the direct path only
  double max_lag_seconds = 0.05;
  std::string tdoa_csv;
  bool uniform_delays = false;
  bool clamp = false;
  bool write_wavs = true;
  WavFormat output_format = WavFormat::kFloat32;
  ScoreForm score_form = ScoreForm::kNorm;

  PipelineConfig();
  // Throws Error(kConfig) on the first violated invariant.
  void validate() const;
  // Non-fatal issues, e.g. normalized scores with p = 2 are constant.
  std::vector<std::string> warnings() const;
  bool operator==(const PipelineConfig&) const = default;
};

nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j);
// Applies the keys present in 'patch' on top of 'base'.
PipelineConfig merge_config(const PipelineConfig& base, const nlohmann::json& patch);
PipelineConfig load_config(const std::string& path);
std::string serialize_config(const PipelineConfig& cfg);
// FNV-1a over the canonical serialization without output_dir and workers,
// which do not affect results. 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

nlohmann::json to_json(const Layout& layout);
Layout layout_from_json(const nlohmann::json& j);
Layout load_layout(const std::string& path);
// The synthetic layout a config refers to (inline, file or default).
Layout resolve_layout(const PipelineConfig& cfg);

nlohmann::json read_json_file(const std::string& path);

}  // namespace wperef

#endif  // WPEREF_CORE_CONFIG_HPP_
