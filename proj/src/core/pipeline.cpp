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
#include "core/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/speech.hpp"
#include "core/wav_io.hpp"

namespace wperef {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += num(values[i]);
  }
  return out;
}

std::string file_label(const SelectionCriterion& c) {
  std::string label = c.label();
  std::replace(label.begin(), label.end(), ':', '-');
  return label;
}

std::vector<std::string> wav_files(const std::string& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::kIo, "not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) fail(ErrorCode::kIo, "no .wav files in " + dir);
  return out;
}

TimeSignal load_dry(const std::string& path, int expected_rate) {
  const auto wav = read_wav(path);
  if (wav.sample_rate() != expected_rate) {
    fail(ErrorCode::kInvalidArgument, "dry signal " + path + " has sample rate " +
                                          std::to_string(wav.sample_rate()) + ", scene needs " +
                                          std::to_string(expected_rate));
  }
  return wav.channels.front();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

}  // namespace

std::vector<SceneTask> scene_tasks(const PipelineConfig& cfg) {
  std::vector<SceneTask> tasks;
  switch (cfg.scenes.kind) {
    case SceneSourceKind::kSynthetic: {
      const Layout layout = resolve_layout(cfg);
      for (std::size_t i = 0; i < layout.sources.size(); ++i) {
        SceneTask t;
        char name[32];
        std::snprintf(name, sizeof name, "pos%02zu", i + 1);
        t.name = name;
        t.kind = SceneSourceKind::kSynthetic;
        t.spec = layout.scene_spec(i);
        t.room_seed = layout.seed + i;
        t.dry_seed = cfg.seed + i;
        tasks.push_back(std::move(t));
      }
      break;
    }
    case SceneSourceKind::kWavMixtures:
    case SceneSourceKind::kWavRirs: {
      const auto& dir = cfg.scenes.kind == SceneSourceKind::kWavMixtures ? cfg.scenes.mixtures_dir
                                                                         : cfg.scenes.rir_dir;
      for (const auto& path : wav_files(dir)) {
        SceneTask t;
        t.name = fs::path(path).stem().string();
        t.kind = cfg.scenes.kind;
        t.path = path;
        tasks.push_back(std::move(t));
      }
      break;
    }
  }
  return tasks;
}

SceneInput load_scene(const PipelineConfig& cfg, const SceneTask& task) {
  SceneInput in;
  in.name = task.name;
  switch (task.kind) {
    case SceneSourceKind::kSynthetic: {
      in.room = simulate_rir(task.spec, task.room_seed);
      in.dry = cfg.scenes.dry_wav.empty()
                   ? synthetic_speech(cfg.dry_seconds, task.spec.sample_rate, task.dry_seed)
                   : load_dry(cfg.scenes.dry_wav, task.spec.sample_rate);
      in.mixture = render_scene(*in.room, *in.dry);
      break;
    }
    case SceneSourceKind::kWavRirs: {
      in.room = scene_from_rirs(read_wav(task.path));
      in.dry = load_dry(cfg.scenes.dry_wav, in.room->sample_rate());
      in.mixture = render_scene(*in.room, *in.dry);
      break;
    }
    case SceneSourceKind::kWavMixtures:
      in.mixture = read_wav(task.path);
      break;
  }
  return in;
}

DelayPlan plan_delays(const PipelineConfig& cfg, const MultichannelTimeSignal& mixture) {
  DelayPlan plan;
  const std::size_t mics = mixture.num_channels();
  const std::size_t base = cfg.wpe.base_delay;
  if (mics < 2 || cfg.uniform_delays) {
    plan.tdoa.delta = Eigen::MatrixXd::Zero(mics, mics);
    plan.delays = PredictionDelayMatrix::uniform(mics, base);
    return plan;
  }
  if (!cfg.tdoa_csv.empty()) {
    plan.tdoa = read_tdoa_csv(cfg.tdoa_csv);
    if (plan.tdoa.size() != mics) {
      fail(ErrorCode::kConfig, "tdoa csv is " + std::to_string(plan.tdoa.size()) + "x" +
                                   std::to_string(plan.tdoa.size()) + " but the scene has " +
                                   std::to_string(mics) + " channels");
    }
  } else {
    const auto lag = std::min<std::size_t>(
        static_cast<std::size_t>(std::lround(cfg.max_lag_seconds * mixture.sample_rate())),
        mixture.length() / 4);
    plan.tdoa = estimate_tdoa_matrix(mixture, lag);
  }
  plan.delays = compute_prediction_delays(plan.tdoa, base, cfg.stft.shift);
  return plan;
}

SceneOutcome process_scene(const PipelineConfig& cfg, const SceneInput& input,
                           const Logger& log) {
  const auto started = std::chrono::steady_clock::now();
  SceneOutcome outcome;
  outcome.name = input.name;
  const auto& mixture = input.mixture;
  mixture.validate();
  const std::size_t mics = mixture.num_channels();

  const auto specs = stft_analyze_all(mixture, cfg.stft);
  auto plan = plan_delays(cfg, mixture);
  outcome.tdoa = std::move(plan.tdoa);
  outcome.delays = std::move(plan.delays);

  const bool has_metrics = input.room.has_value() && input.dry.has_value();
  const std::size_t eval_length = has_metrics ? input.dry->size() : 0;
  std::vector<TimeSignal> targets(mics);
  std::vector<double> input_fwssnr(mics, 0.0);
  std::vector<std::size_t> offsets(mics, 0);
  if (has_metrics) {
    for (std::size_t r = 0; r < mics; ++r) {
      offsets[r] = input.room->rirs[r].direct_path_index;
      targets[r] = align_for_scoring(
          direct_early_target(*input.room, *input.dry, r, cfg.target_early_ms), offsets[r],
          eval_length);
      input_fwssnr[r] = fwssnr(align_for_scoring(mixture.channels[r], offsets[r], eval_length),
                               targets[r]);
    }
  }

  std::vector<SelectionCriterion> criteria;
  std::set<std::size_t> snapshot_set;
  for (const auto& c : cfg.criteria) {
    criteria.push_back(c.resolved(cfg.wpe.iterations));
    if (criteria.back().uses_wpe()) snapshot_set.insert(criteria.back().iterations);
  }
  const std::vector<std::size_t> snapshots(snapshot_set.begin(), snapshot_set.end());

  SelectionOptions sel_options;
  sel_options.oracle = input.room ? &*input.room : nullptr;
  sel_options.early_ms = cfg.elr_early_ms;
  sel_options.form = cfg.score_form;

  // Rendered outputs are written only once every p succeeded.
  std::vector<std::pair<std::string, TimeSignal>> pending;
  for (double p : cfg.p_values) {
    WpeConfig wcfg = cfg.wpe;
    wcfg.p = p;
    const auto candidates = run_all_candidates(specs, outcome.delays, wcfg, snapshots);
    std::vector<TimeSignal> outputs(mics);
    std::vector<double> per_mic(mics, 0.0);
    for (std::size_t r = 0; r < mics; ++r) {
      outputs[r] = stft_synthesize(candidates[r].output, cfg.stft);
      if (has_metrics) {
        per_mic[r] = fwssnr(align_for_scoring(outputs[r], offsets[r], eval_length), targets[r]);
      }
    }
    for (const auto& c : criteria) {
      const auto sel = select_from_candidates(candidates, specs, c, p, sel_options);
      ReportRow row;
      row.scene = input.name;
      row.p = p;
      row.scores = sel.scores;
      row.metrics.criterion = c;
      row.metrics.chosen = sel.chosen;
      row.has_metrics = has_metrics;
      if (has_metrics) {
        const auto& target = targets[sel.chosen];
        const auto est = align_for_scoring(outputs[sel.chosen], offsets[sel.chosen], eval_length);
        row.metrics.per_mic_fwssnr = per_mic;
        row.metrics.fwssnr = per_mic[sel.chosen];
        row.metrics.segsnr = segsnr(est, target);
        row.metrics.delta_fwssnr = relative_improvement(per_mic, sel.chosen);
        row.input_fwssnr = input_fwssnr[sel.chosen];
      }
      if (cfg.write_wavs) {
        row.wav = input.name + "_" + file_label(c) + "_p" + num(p) + "_mic" +
                  std::to_string(sel.chosen + 1) + ".wav";
        pending.emplace_back(row.wav, outputs[sel.chosen]);
      }
      outcome.rows.push_back(std::move(row));
    }
    if (log) {
      std::string msg = "scene " + input.name + " p=" + num(p) + ":";
      for (const auto& row : outcome.rows) {
        if (row.p != p) continue;
        msg += " " + row.metrics.criterion.label() + "->mic" + std::to_string(row.metrics.chosen + 1);
      }
      log(msg);
    }
  }

  for (const auto& [name, signal] : pending) {
    const fs::path path = fs::path(cfg.output_dir) / name;
    write_wav(path.string(), MultichannelTimeSignal{{signal}}, cfg.output_format, cfg.clamp);
    outcome.files.push_back(path.string());
  }
  outcome.ok = true;
  if (log) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log("scene " + input.name + " done: " + std::to_string(mics) + " mics, " +
        std::to_string(specs.front().frames()) + " frames, " + num(secs) + " s");
  }
  return outcome;
}

std::vector<SummaryRow> summarize(const PipelineConfig& cfg,
                                  const std::vector<SceneOutcome>& scenes) {
  std::vector<SummaryRow> out;
  for (const auto& c : cfg.criteria) {
    const auto resolved = c.resolved(cfg.wpe.iterations);
    for (double p : cfg.p_values) {
      SummaryRow row;
      row.criterion = resolved.label();
      row.p = p;
      std::vector<double> deltas, scores;
      for (const auto& s : scenes) {
        if (!s.ok) continue;
        for (const auto& r : s.rows) {
          if (r.has_metrics && r.p == p && r.metrics.criterion == resolved) {
            deltas.push_back(r.metrics.delta_fwssnr);
            scores.push_back(r.metrics.fwssnr);
          }
        }
      }
      row.scenes = deltas.size();
      if (!deltas.empty()) {
        double sum = 0.0, fsum = 0.0;
        for (std::size_t i = 0; i < deltas.size(); ++i) {
          sum += deltas[i];
          fsum += scores[i];
        }
        row.mean_delta_fwssnr = sum / static_cast<double>(deltas.size());
        row.mean_fwssnr = fsum / static_cast<double>(deltas.size());
        if (deltas.size() > 1) {
          double ss = 0.0;
          for (double d : deltas) ss += (d - row.mean_delta_fwssnr) * (d - row.mean_delta_fwssnr);
          row.sd_delta_fwssnr = std::sqrt(ss / static_cast<double>(deltas.size() - 1));
        }
      }
      out.push_back(row);
    }
  }
  return out;
}

namespace {

Logger locked(const Logger& log) {
  if (!log) return {};
  auto mutex = std::make_shared<std::mutex>();
  return [mutex, log](const std::string& msg) {
    std::lock_guard<std::mutex> lock(*mutex);
    log(msg);
  };
}

std::vector<SceneOutcome> run_tasks(const PipelineConfig& cfg,
                                    const std::vector<SceneTask>& tasks, const Logger& log) {
  std::vector<SceneOutcome> outcomes(tasks.size());
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
    try {
      outcomes[i] = process_scene(cfg, load_scene(cfg, tasks[i]), log);
    } catch (const std::exception& e) {
      outcomes[i] = SceneOutcome{};
      outcomes[i].name = tasks[i].name;
      outcomes[i].ok = false;
      outcomes[i].error = e.what();
      if (log) log("scene " + tasks[i].name + " FAILED: " + e.what());
    }
  });
  return outcomes;
}

json manifest_json(const PipelineConfig& cfg, const RunResult& run,
                   const std::vector<SceneTask>& tasks) {
  json inputs = json::array();
  for (const auto& t : tasks) {
    json item = {{"scene", t.name}};
    if (!t.path.empty()) item["path"] = t.path;
    if (t.kind == SceneSourceKind::kSynthetic) {
      item["room_seed"] = t.room_seed;
      item["dry_seed"] = t.dry_seed;
    }
    inputs.push_back(item);
  }
  json failed = json::array();
  for (const auto& s : run.scenes) {
    if (!s.ok) failed.push_back({{"scene", s.name}, {"error", s.error}});
  }
  return {{"schema", "wperef.manifest/1"},
          {"config_hash", run.config_hash},
          {"config", to_json(cfg)},
          {"warnings", cfg.warnings()},
          {"inputs", inputs},
          {"files", run.files},
          {"failed_scenes", failed}};
}

}  // namespace

RunResult run_dereverb(const PipelineConfig& cfg, const Logger& log_in) {
  cfg.validate();
  const Logger log = locked(log_in);
  for (const auto& w : cfg.warnings()) {
    if (log) log("warning: " + w);
  }
  RunResult run;
  run.config_hash = config_hash(cfg);
  fs::create_directories(cfg.output_dir);
  const auto tasks = scene_tasks(cfg);
  run.scenes = run_tasks(cfg, tasks, log);
  for (const auto& s : run.scenes) {
    if (!s.ok) ++run.failed;
    run.files.insert(run.files.end(), s.files.begin(), s.files.end());
  }
  run.summary = summarize(cfg, run.scenes);

  const fs::path dir(cfg.output_dir);
  write_text(dir / "report.csv", report_csv(run));
  write_text(dir / "report.json", report_json(cfg, run).dump(2));
  write_text(dir / "summary.csv", summary_csv(run));
  for (const char* name : {"report.csv", "report.json", "summary.csv"}) {
    run.files.push_back((dir / name).string());
  }
  run.files.push_back((dir / "manifest.json").string());
  write_text(dir / "manifest.json", manifest_json(cfg, run, tasks).dump(2));
  return run;
}

PipelineConfig benchmark_config(const PipelineConfig& cfg, std::size_t k) {
  require(cfg.scenes.kind == SceneSourceKind::kSynthetic,
          "benchmark needs a synthetic scene source");
  Layout layout = resolve_layout(cfg);
  const std::uint64_t seed = cfg.seed + k;
  std::mt19937_64 rng(seed);
  const auto& dims = layout.room.dimensions;
  std::uniform_real_distribution<double> ux(0.5, dims[0] - 0.5), uy(0.5, dims[1] - 0.5),
      uz(std::min(1.2, 0.5 * dims[2]), std::min(1.8, dims[2] - 0.2));
  Point3 source{};
  for (int attempt = 0; attempt < 1000; ++attempt) {
    source = {ux(rng), uy(rng), uz(rng)};
    bool clear = true;
    for (const auto& m : layout.room.mics) clear = clear && distance(source, m) >= 0.3;
    if (clear) break;
  }
  layout.sources = {source};
  layout.seed = seed;
  PipelineConfig out = cfg;
  out.scenes.inline_layout = layout;
  out.scenes.layout.clear();
  out.seed = seed;
  out.write_wavs = false;
  return out;
}

RunResult run_benchmark(const PipelineConfig& cfg, std::size_t n_seeds, const Logger& log_in) {
  cfg.validate();
  if (cfg.scenes.kind != SceneSourceKind::kSynthetic) {
    fail(ErrorCode::kConfig, "benchmark needs a synthetic scene source");
  }
  require(n_seeds >= 1, "benchmark needs at least one seed");
  const Logger log = locked(log_in);
  RunResult run;
  run.config_hash = config_hash(cfg);
  fs::create_directories(cfg.output_dir);

  std::vector<PipelineConfig> configs;
  std::vector<SceneTask> tasks;
  for (std::size_t k = 0; k < n_seeds; ++k) {
    configs.push_back(benchmark_config(cfg, k));
    auto t = scene_tasks(configs.back()).front();
    char name[32];
    std::snprintf(name, sizeof name, "seed%03zu", k);
    t.name = name;
    tasks.push_back(std::move(t));
  }
  run.scenes.resize(n_seeds);
  parallel_for(n_seeds, cfg.workers, [&](std::size_t k) {
    try {
      run.scenes[k] =
          process_scene(configs[k], load_scene(configs[k], tasks[k]), log);
    } catch (const std::exception& e) {
      run.scenes[k] = SceneOutcome{};
      run.scenes[k].name = tasks[k].name;
      run.scenes[k].error = e.what();
      if (log) log("scene " + tasks[k].name + " FAILED: " + e.what());
    }
  });
  for (const auto& s : run.scenes) {
    if (!s.ok) ++run.failed;
  }
  run.summary = summarize(cfg, run.scenes);

  const fs::path dir(cfg.output_dir);
  write_text(dir / "benchmark_report.csv", report_csv(run));
  write_text(dir / "benchmark_summary.csv", summary_csv(run));
  json j = report_json(cfg, run);
  j["n_seeds"] = n_seeds;
  write_text(dir / "benchmark_summary.json", j.dump(2));
  for (const char* name : {"benchmark_report.csv", "benchmark_summary.csv", "benchmark_summary.json"}) {
    run.files.push_back((dir / name).string());
  }
  return run;
}

json report_json(const PipelineConfig& cfg, const RunResult& run) {
  json scenes = json::array();
  for (const auto& s : run.scenes) {
    json rows = json::array();
    for (const auto& r : s.rows) {
      json row = {{"criterion", r.metrics.criterion.label()},
                  {"p", r.p},
                  {"chosen_mic", r.metrics.chosen + 1},
                  {"scores", r.scores}};
      if (r.has_metrics) {
        row["fwssnr_db"] = r.metrics.fwssnr;
        row["segsnr_db"] = r.metrics.segsnr;
        row["delta_fwssnr_db"] = r.metrics.delta_fwssnr;
        row["per_mic_fwssnr_db"] = r.metrics.per_mic_fwssnr;
        row["input_fwssnr_db"] = r.input_fwssnr;
      }
      if (!r.wav.empty()) row["wav"] = r.wav;
      rows.push_back(row);
    }
    json scene = {{"name", s.name}, {"ok", s.ok}, {"rows", rows}};
    if (!s.ok) scene["error"] = s.error;
    if (s.ok) {
      json delays = json::array(), tdoa = json::array();
      for (std::size_t m = 0; m < s.delays.size(); ++m) {
        json drow = json::array(), trow = json::array();
        for (std::size_t r = 0; r < s.delays.size(); ++r) {
          drow.push_back(s.delays.at(m, r));
          trow.push_back(s.tdoa.delta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(r)));
        }
        delays.push_back(drow);
        tdoa.push_back(trow);
      }
      scene["prediction_delays"] = delays;
      scene["tdoa_samples"] = tdoa;
    }
    scenes.push_back(scene);
  }
  json summary = json::array();
  for (const auto& s : run.summary) {
    summary.push_back({{"criterion", s.criterion},
                       {"p", s.p},
                       {"scenes", s.scenes},
                       {"mean_delta_fwssnr_db", s.mean_delta_fwssnr},
                       {"sd_delta_fwssnr_db", s.sd_delta_fwssnr},
                       {"mean_fwssnr_db", s.mean_fwssnr}});
  }
  return {{"schema", kReportSchema},
          {"config_hash", run.config_hash},
          {"config", to_json(cfg)},
          {"scenes", scenes},
          {"summary", summary},
          {"failed_scenes", run.failed}};
}

std::string report_csv(const RunResult& run) {
  std::ostringstream out;
  out << "schema,config_hash,scene,criterion,p,chosen_mic,fwssnr_db,segsnr_db,"
         "delta_fwssnr_db,input_fwssnr_db,scores,per_mic_fwssnr_db,wav\n";
  for (const auto& s : run.scenes) {
    for (const auto& r : s.rows) {
      out << kReportSchema << ',' << run.config_hash << ',' << r.scene << ','
          << r.metrics.criterion.label() << ',' << num(r.p) << ',' << r.metrics.chosen + 1 << ',';
      if (r.has_metrics) {
        out << num(r.metrics.fwssnr) << ',' << num(r.metrics.segsnr) << ','
            << num(r.metrics.delta_fwssnr) << ',' << num(r.input_fwssnr) << ',';
      } else {
        out << ",,,,";
      }
      out << join(r.scores) << ',' << join(r.metrics.per_mic_fwssnr) << ',' << r.wav << '\n';
    }
  }
  return out.str();
}

std::string summary_csv(const RunResult& run) {
  std::ostringstream out;
  out << "schema,config_hash,criterion,p,scenes,mean_delta_fwssnr_db,sd_delta_fwssnr_db,"
         "mean_fwssnr_db\n";
  for (const auto& s : run.summary) {
    out << kReportSchema << ',' << run.config_hash << ',' << s.criterion << ',' << num(s.p)
        << ',' << s.scenes << ',' << num(s.mean_delta_fwssnr) << ','
        << num(s.sd_delta_fwssnr) << ',' << num(s.mean_fwssnr) << '\n';
  }
  return out.str();
}

}  // namespace wperef
