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
#include "core/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace wperef {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message) {
  fail(ErrorCode::kConfig, message);
}

template <typename T>
T get_or(const json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  std::set<std::string> names(known.begin(), known.end());
  for (const auto& [key, value] : j.items()) {
    if (!names.count(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

Point3 to_point(const json& j) {
  if (!j.is_array() || j.size() != 3) config_error("positions must be [x, y, z] arrays");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const json::exception& e) {
    config_error(std::string("bad position: ") + e.what());
  }
}

json from_point(const Point3& p) { return json::array({p[0], p[1], p[2]}); }

const char* format_name(WavFormat f) { return f == WavFormat::kPcm16 ? "pcm16" : "float32"; }

WavFormat parse_format(const std::string& s) {
  if (s == "pcm16") return WavFormat::kPcm16;
  if (s == "float32") return WavFormat::kFloat32;
  config_error("output_format must be pcm16 or float32, got '" + s + "'");
}

const char* kind_name(SceneSourceKind k) {
  switch (k) {
    case SceneSourceKind::kSynthetic: return "synthetic";
    case SceneSourceKind::kWavMixtures: return "wav_mixtures";
    case SceneSourceKind::kWavRirs: return "wav_rirs";
  }
  return "synthetic";
}

SceneSourceKind parse_kind(const std::string& s) {
  if (s == "synthetic") return SceneSourceKind::kSynthetic;
  if (s == "wav_mixtures") return SceneSourceKind::kWavMixtures;
  if (s == "wav_rirs") return SceneSourceKind::kWavRirs;
  config_error("scene kind must be synthetic, wav_mixtures or wav_rirs, got '" + s + "'");
}

}  // namespace

RoomSpec Layout::scene_spec(std::size_t source_index) const {
  require(source_index < sources.size(), "source index out of range");
  RoomSpec spec = room;
  spec.source = sources[source_index];
  return spec;
}

Layout default_layout() {
  Layout layout;
  layout.room.dimensions = {6.0, 7.0, 2.7};
  layout.room.t60 = 1.3;
  layout.room.mics = {{0.5, 0.6, 1.2}, {3.0, 0.5, 1.4}, {5.5, 0.7, 1.1}, {5.4, 3.5, 1.5},
                      {5.5, 6.4, 1.2}, {3.1, 6.5, 1.4}, {0.6, 6.3, 1.3}, {0.5, 3.4, 1.6}};
  layout.sources = {{1.5, 1.5, 1.6}, {3.0, 1.8, 1.5}, {4.5, 1.4, 1.7}, {1.2, 3.0, 1.5},
                    {2.6, 3.2, 1.6}, {4.0, 3.8, 1.5}, {4.8, 2.8, 1.6}, {1.6, 4.8, 1.7},
                    {3.2, 5.0, 1.5}, {4.6, 5.3, 1.6}, {2.0, 6.0, 1.5}, {4.0, 6.0, 1.7}};
  layout.seed = 1;
  return layout;
}

PipelineConfig::PipelineConfig() {
  for (const char* c : {"lp", "nlp:0", "nlp:1", "nlp", "maxpower", "maxelr"}) {
    criteria.push_back(SelectionCriterion::parse(c));
  }
}

void PipelineConfig::validate() const {
  try {
    stft.validate();
    wpe.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (criteria.empty()) config_error("at least one selection criterion is required");
  for (const auto& c : criteria) {
    const auto r = c.resolved(wpe.iterations);
    if (r.uses_wpe() && r.iterations > wpe.iterations) {
      config_error("criterion " + c.label() + " exceeds the configured WPE iterations (" +
                   std::to_string(wpe.iterations) + ")");
    }
    if (c.kind == CriterionKind::kMaxOracleElr &&
        scenes.kind == SceneSourceKind::kWavMixtures) {
      config_error("maxelr needs impulse responses; not available for wav_mixtures scenes");
    }
  }
  if (p_values.empty()) config_error("at least one p value is required");
  for (double p : p_values) {
    if (!(p > 0.0 && p <= 2.0)) {
      config_error("p values must be in (0, 2], got " + std::to_string(p));
    }
  }
  if (workers == 0) config_error("workers must be at least 1");
  if (!(dry_seconds > 0.0)) config_error("dry_seconds must be positive");
  if (elr_early_ms < 0.0 || target_early_ms < 0.0) config_error("early windows must be >= 0");
  if (!(max_lag_seconds > 0.0)) config_error("max_lag_seconds must be positive");
  if (scenes.kind == SceneSourceKind::kWavMixtures && scenes.mixtures_dir.empty()) {
    config_error("wav_mixtures scenes need mixtures_dir");
  }
  if (scenes.kind == SceneSourceKind::kWavRirs &&
      (scenes.rir_dir.empty() || scenes.dry_wav.empty())) {
    config_error("wav_rirs scenes need rir_dir and dry_wav");
  }
  if (output_dir.empty()) config_error("output directory must be set");
}

std::vector<std::string> PipelineConfig::warnings() const {
  std::vector<std::string> out;
  for (double p : p_values) {
    if (p != 2.0) continue;
    for (const auto& c : criteria) {
      if (c.kind == CriterionKind::kNormalizedLp) {
        out.push_back("normalized lp score is constant for p = 2; " + c.label() +
                      " will always pick the first microphone");
        break;
      }
    }
  }
  return out;
}

json to_json(const PipelineConfig& cfg) {
  json criteria = json::array();
  for (const auto& c : cfg.criteria) criteria.push_back(c.label());
  json j;
  j["schema"] = kConfigSchema;
  j["stft"] = {{"frame_size", cfg.stft.frame_size}, {"shift", cfg.stft.shift},
               {"window", "sqrt_hann"}};
  j["wpe"] = {{"filter_length", cfg.wpe.filter_length}, {"iterations", cfg.wpe.iterations},
              {"epsilon", cfg.wpe.epsilon},             {"base_delay", cfg.wpe.base_delay},
              {"ridge", cfg.wpe.ridge},                 {"threads", cfg.wpe.threads}};
  j["criteria"] = criteria;
  j["p"] = cfg.p_values;
  j["scenes"] = {{"kind", kind_name(cfg.scenes.kind)},
                 {"layout", cfg.scenes.inline_layout ? to_json(*cfg.scenes.inline_layout)
                                                     : json(cfg.scenes.layout)},
                 {"mixtures_dir", cfg.scenes.mixtures_dir},
                 {"rir_dir", cfg.scenes.rir_dir},
                 {"dry_wav", cfg.scenes.dry_wav}};
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["dry_seconds"] = cfg.dry_seconds;
  j["elr_early_ms"] = cfg.elr_early_ms;
  j["target_early_ms"] = cfg.target_early_ms;
  j["max_lag_seconds"] = cfg.max_lag_seconds;
  j["tdoa_csv"] = cfg.tdoa_csv;
  j["uniform_delays"] = cfg.uniform_delays;
  j["clamp"] = cfg.clamp;
  j["write_wavs"] = cfg.write_wavs;
  j["output_format"] = format_name(cfg.output_format);
  j["score_form"] = cfg.score_form == ScoreForm::kNorm ? "norm" : "powered";
  return j;
}

PipelineConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"schema", "stft", "wpe", "criteria", "p", "scenes", "output_dir", "seed",
                  "workers", "dry_seconds", "elr_early_ms", "target_early_ms",
                  "max_lag_seconds", "tdoa_csv", "uniform_delays", "clamp", "write_wavs",
                  "output_format", "score_form"},
                 "config");
  if (j.contains("schema") && j.at("schema") != kConfigSchema) {
    config_error("unsupported config schema " + j.at("schema").dump());
  }
  PipelineConfig cfg;
  if (j.contains("stft")) {
    const json& s = j.at("stft");
    reject_unknown(s, {"frame_size", "shift", "window"}, "stft");
    cfg.stft.frame_size = get_or<std::size_t>(s, "frame_size", cfg.stft.frame_size);
    cfg.stft.shift = get_or<std::size_t>(s, "shift", cfg.stft.shift);
    if (get_or<std::string>(s, "window", "sqrt_hann") != "sqrt_hann") {
      config_error("only the sqrt_hann window is supported");
    }
  }
  if (j.contains("wpe")) {
    const json& w = j.at("wpe");
    reject_unknown(w, {"filter_length", "iterations", "epsilon", "base_delay", "ridge", "threads"},
                   "wpe");
    cfg.wpe.filter_length = get_or<std::size_t>(w, "filter_length", cfg.wpe.filter_length);
    cfg.wpe.iterations = get_or<std::size_t>(w, "iterations", cfg.wpe.iterations);
    cfg.wpe.epsilon = get_or<double>(w, "epsilon", cfg.wpe.epsilon);
    cfg.wpe.base_delay = get_or<std::size_t>(w, "base_delay", cfg.wpe.base_delay);
    cfg.wpe.ridge = get_or<double>(w, "ridge", cfg.wpe.ridge);
    cfg.wpe.threads = get_or<std::size_t>(w, "threads", cfg.wpe.threads);
  }
  if (j.contains("criteria")) {
    cfg.criteria.clear();
    for (const auto& c : get_or<std::vector<std::string>>(j, "criteria", {})) {
      cfg.criteria.push_back(SelectionCriterion::parse(c));
    }
  }
  cfg.p_values = get_or<std::vector<double>>(j, "p", cfg.p_values);
  if (j.contains("scenes")) {
    const json& s = j.at("scenes");
    reject_unknown(s, {"kind", "layout", "mixtures_dir", "rir_dir", "dry_wav"}, "scenes");
    cfg.scenes.kind = parse_kind(get_or<std::string>(s, "kind", "synthetic"));
    if (s.contains("layout") && s.at("layout").is_object()) {
      cfg.scenes.inline_layout = layout_from_json(s.at("layout"));
    } else {
      cfg.scenes.layout = get_or<std::string>(s, "layout", "");
    }
    cfg.scenes.mixtures_dir = get_or<std::string>(s, "mixtures_dir", "");
    cfg.scenes.rir_dir = get_or<std::string>(s, "rir_dir", "");
    cfg.scenes.dry_wav = get_or<std::string>(s, "dry_wav", "");
  }
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.workers = get_or<std::size_t>(j, "workers", cfg.workers);
  cfg.dry_seconds = get_or<double>(j, "dry_seconds", cfg.dry_seconds);
  cfg.elr_early_ms = get_or<double>(j, "elr_early_ms", cfg.elr_early_ms);
  cfg.target_early_ms = get_or<double>(j, "target_early_ms", cfg.target_early_ms);
  cfg.max_lag_seconds = get_or<double>(j, "max_lag_seconds", cfg.max_lag_seconds);
  cfg.tdoa_csv = get_or<std::string>(j, "tdoa_csv", cfg.tdoa_csv);
  cfg.uniform_delays = get_or<bool>(j, "uniform_delays", cfg.uniform_delays);
  cfg.clamp = get_or<bool>(j, "clamp", cfg.clamp);
  cfg.write_wavs = get_or<bool>(j, "write_wavs", cfg.write_wavs);
  cfg.output_format = parse_format(get_or<std::string>(j, "output_format", "float32"));
  const auto form = get_or<std::string>(j, "score_form", "norm");
  if (form != "norm" && form != "powered") config_error("score_form must be norm or powered");
  cfg.score_form = form == "norm" ? ScoreForm::kNorm : ScoreForm::kPowered;
  cfg.validate();
  return cfg;
}

PipelineConfig merge_config(const PipelineConfig& base, const json& patch) {
  json j = to_json(base);
  j.merge_patch(patch);
  return config_from_json(j);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("cannot parse " + path + ": " + e.what());
  }
}

PipelineConfig load_config(const std::string& path) {
  return config_from_json(read_json_file(path));
}

std::string serialize_config(const PipelineConfig& cfg) { return to_json(cfg).dump(2); }

std::string config_hash(const PipelineConfig& cfg) {
  json j = to_json(cfg);
  j.erase("output_dir");
  j.erase("workers");
  j["wpe"].erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const Layout& layout) {
  json mics = json::array(), sources = json::array();
  for (const auto& m : layout.room.mics) mics.push_back(from_point(m));
  for (const auto& s : layout.sources) sources.push_back(from_point(s));
  return {{"schema", kLayoutSchema},
          {"room",
           {{"dimensions", from_point(layout.room.dimensions)},
            {"t60", layout.room.t60},
            {"sample_rate", layout.room.sample_rate},
            {"max_order", layout.room.max_order},
            {"rir_seconds", layout.room.rir_seconds},
            {"image_jitter", layout.room.image_jitter}}},
          {"mics", mics},
          {"sources", sources},
          {"seed", layout.seed}};
}

Layout layout_from_json(const json& j) {
  reject_unknown(j, {"schema", "room", "mics", "sources", "source", "seed"}, "layout");
  if (j.contains("schema") && j.at("schema") != kLayoutSchema) {
    config_error("unsupported layout schema " + j.at("schema").dump());
  }
  Layout layout;
  layout.room = RoomSpec{};
  if (j.contains("room")) {
    const json& r = j.at("room");
    reject_unknown(r, {"dimensions", "t60", "sample_rate", "max_order", "rir_seconds", "image_jitter"},
                   "room");
    if (r.contains("dimensions")) layout.room.dimensions = to_point(r.at("dimensions"));
    layout.room.t60 = get_or<double>(r, "t60", layout.room.t60);
    layout.room.sample_rate = get_or<int>(r, "sample_rate", layout.room.sample_rate);
    layout.room.max_order = get_or<int>(r, "max_order", layout.room.max_order);
    layout.room.rir_seconds = get_or<double>(r, "rir_seconds", layout.room.rir_seconds);
    layout.room.image_jitter = get_or<double>(r, "image_jitter", layout.room.image_jitter);
  }
  if (!j.contains("mics")) config_error("layout needs a mics list");
  for (const auto& m : j.at("mics")) layout.room.mics.push_back(to_point(m));
  if (j.contains("sources")) {
    for (const auto& s : j.at("sources")) layout.sources.push_back(to_point(s));
  }
  if (j.contains("source")) layout.sources.push_back(to_point(j.at("source")));
  if (layout.sources.empty()) config_error("layout needs at least one source");
  layout.seed = get_or<std::uint64_t>(j, "seed", layout.seed);
  for (std::size_t i = 0; i < layout.sources.size(); ++i) {
    try {
      layout.scene_spec(i).validate();
    } catch (const Error& e) {
      config_error(std::string("invalid layout: ") + e.what());
    }
  }
  return layout;
}

Layout load_layout(const std::string& path) { return layout_from_json(read_json_file(path)); }

Layout resolve_layout(const PipelineConfig& cfg) {
  if (cfg.scenes.inline_layout) return *cfg.scenes.inline_layout;
  if (!cfg.scenes.layout.empty()) return load_layout(cfg.scenes.layout);
  return default_layout();
}

}  // namespace wperef
