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

// wperef: simulate scenes, dereverberate, benchmark selection criteria and
// score WAV pairs. Exit status 0 on success, 1 if any scene or file failed,
// 2 on configuration errors.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wperef/wperef.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct SignalDeleter {
  void operator()(wperef_signal* s) const { wperef_signal_destroy(s); }
};
struct SceneDeleter {
  void operator()(wperef_scene* s) const { wperef_scene_destroy(s); }
};
struct ConfigDeleter {
  void operator()(wperef_config* c) const { wperef_config_destroy(c); }
};
using SignalPtr = std::unique_ptr<wperef_signal, SignalDeleter>;
using ScenePtr = std::unique_ptr<wperef_scene, SceneDeleter>;
using ConfigPtr = std::unique_ptr<wperef_config, ConfigDeleter>;

struct Failure {
  wperef_status status;
};

void check(wperef_status status, const std::string& context) {
  if (status == WPEREF_OK) return;
  std::fprintf(stderr, "wperef: %s: %s (%s)\n", context.c_str(), wperef_last_error(),
               wperef_status_string(status));
  throw Failure{status};
}

void log_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

// Flags shared by every subcommand that builds a run configuration.
struct RunFlags {
  std::string config;
  std::vector<std::string> criteria;
  std::vector<double> p;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool clamp = false;
  std::string tdoa_csv;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> threads;
  std::string layout;
  std::string mixtures_dir;
  std::string rir_dir;
  std::string dry_wav;
  bool uniform_delays = false;
  bool no_wavs = false;
  bool pcm16 = false;
};

void add_run_flags(CLI::App* app, RunFlags& f, bool processing) {
  app->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "Base seed for synthetic speech and benchmark positions");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--layout", f.layout, "Room layout JSON for synthetic scenes")
      ->check(CLI::ExistingFile);
  app->add_option("--dry-wav", f.dry_wav, "Anechoic source WAV instead of synthetic speech")
      ->check(CLI::ExistingFile);
  if (!processing) return;
  app->add_option("--criterion", f.criteria,
                  "Selection criterion: lp[:I], nlp[:I], maxpower, maxelr (repeatable)");
  app->add_option("--p", f.p, "Sparsity parameter in (0, 2] (repeatable)");
  app->add_option("--iterations", f.iterations, "WPE reweighting iterations");
  app->add_flag("--clamp", f.clamp, "Clamp instead of failing on clipped PCM output");
  app->add_option("--tdoa-csv", f.tdoa_csv, "M x M TDOA matrix in samples, skips GCC-PHAT")
      ->check(CLI::ExistingFile);
  app->add_option("--workers", f.workers, "Scenes processed in parallel");
  app->add_option("--threads", f.threads, "Frequency-parallel WPE threads (0 = all cores)");
  app->add_option("--mixtures-dir", f.mixtures_dir, "Directory of multichannel mixture WAVs")
      ->check(CLI::ExistingDirectory);
  app->add_option("--rir-dir", f.rir_dir, "Directory of multichannel RIR WAVs (needs --dry-wav)")
      ->check(CLI::ExistingDirectory);
  app->add_flag("--uniform-delays", f.uniform_delays, "Same prediction delay for every microphone");
  app->add_flag("--no-wavs", f.no_wavs, "Skip writing dereverberated WAVs");
  app->add_flag("--pcm16", f.pcm16, "Write 16-bit PCM instead of 32-bit float");
}

json patch_from(const RunFlags& f) {
  json patch = json::object();
  if (!f.criteria.empty()) patch["criteria"] = f.criteria;
  if (!f.p.empty()) patch["p"] = f.p;
  if (f.iterations) patch["wpe"]["iterations"] = *f.iterations;
  if (f.threads) patch["wpe"]["threads"] = *f.threads;
  if (f.seed) patch["seed"] = *f.seed;
  if (!f.out.empty()) patch["output_dir"] = f.out;
  if (f.clamp) patch["clamp"] = true;
  if (!f.tdoa_csv.empty()) patch["tdoa_csv"] = f.tdoa_csv;
  if (f.workers) patch["workers"] = *f.workers;
  if (f.uniform_delays) patch["uniform_delays"] = true;
  if (f.no_wavs) patch["write_wavs"] = false;
  if (f.pcm16) patch["output_format"] = "pcm16";
  if (!f.layout.empty()) {
    patch["scenes"]["kind"] = "synthetic";
    patch["scenes"]["layout"] = f.layout;
  }
  if (!f.mixtures_dir.empty()) {
    patch["scenes"]["kind"] = "wav_mixtures";
    patch["scenes"]["mixtures_dir"] = f.mixtures_dir;
  }
  if (!f.rir_dir.empty()) {
    patch["scenes"]["kind"] = "wav_rirs";
    patch["scenes"]["rir_dir"] = f.rir_dir;
  }
  if (!f.dry_wav.empty()) patch["scenes"]["dry_wav"] = f.dry_wav;
  return patch;
}

// Loads, patches and validates the config; any failure is a config error.
ConfigPtr build_config(const RunFlags& f) {
  wperef_config* raw = nullptr;
  check(f.config.empty() ? wperef_config_create(&raw) : wperef_config_load(f.config.c_str(), &raw),
        "config");
  ConfigPtr cfg(raw);
  check(wperef_config_merge(cfg.get(), patch_from(f).dump().c_str()), "config");
  check(wperef_config_validate(cfg.get()), "config");
  const std::size_t warnings = wperef_config_warning_count(cfg.get());
  for (std::size_t i = 0; i < warnings; ++i) {
    std::fprintf(stderr, "wperef: warning: %s\n", wperef_config_warning(cfg.get(), i));
  }
  return cfg;
}

std::string output_dir(const wperef_config* cfg) {
  std::size_t needed = 0;
  wperef_config_to_json(cfg, nullptr, 0, &needed);
  std::string text(needed, '\0');
  check(wperef_config_to_json(cfg, text.data(), text.size(), nullptr), "config");
  text.resize(needed - 1);
  return json::parse(text).at("output_dir").get<std::string>();
}

int exit_for(const wperef_run_summary& summary) {
  std::fprintf(stderr, "wperef: %zu scene(s), %zu failed\n", summary.scenes_total,
               summary.scenes_failed);
  return summary.scenes_failed == 0 ? kExitOk : kExitFailure;
}

std::size_t require_scenes(const wperef_config* cfg) {
  std::size_t count = 0;
  check(wperef_config_scene_count(cfg, &count), "config");
  if (count == 0) {
    std::fprintf(stderr, "wperef: config: no scenes to process\n");
    throw Failure{WPEREF_ERR_CONFIG};
  }
  return count;
}

int run_simulate(const RunFlags& flags, bool render) {
  auto cfg = build_config(flags);
  const std::size_t count = require_scenes(cfg.get());
  const fs::path dir = output_dir(cfg.get());
  fs::create_directories(dir);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < count; ++i) {
    char name[256] = {};
    wperef_scene* scene_raw = nullptr;
    wperef_signal* dry_raw = nullptr;
    wperef_signal* mix_raw = nullptr;
    const auto status = wperef_config_load_scene(cfg.get(), i, name, sizeof name, &scene_raw,
                                                 render ? &dry_raw : nullptr,
                                                 render ? &mix_raw : nullptr);
    ScenePtr scene(scene_raw);
    SignalPtr dry(dry_raw), mixture(mix_raw);
    try {
      check(status, "scene " + std::to_string(i + 1));
      if (!scene) {
        std::fprintf(stderr, "wperef: %s: no room to simulate\n", name);
        ++failed;
        continue;
      }
      wperef_signal* rirs_raw = nullptr;
      check(wperef_scene_rirs(scene.get(), &rirs_raw), name);
      SignalPtr rirs(rirs_raw);
      const auto rir_path = (dir / (std::string(name) + "_rir.wav")).string();
      check(wperef_signal_write_wav(rirs.get(), rir_path.c_str(), 1, 0), rir_path);
      std::printf("%s\n", rir_path.c_str());
      if (render) {
        for (auto [signal, suffix] : {std::pair{dry.get(), "_dry.wav"},
                                      std::pair{mixture.get(), "_mixture.wav"}}) {
          const auto path = (dir / (std::string(name) + suffix)).string();
          check(wperef_signal_write_wav(signal, path.c_str(), 1, 0), path);
          std::printf("%s\n", path.c_str());
        }
      }
    } catch (const Failure& f) {
      if (f.status == WPEREF_ERR_CONFIG) throw;
      ++failed;
    }
  }
  return failed == 0 ? kExitOk : kExitFailure;
}

int run_dereverb(const RunFlags& flags) {
  auto cfg = build_config(flags);
  require_scenes(cfg.get());
  wperef_run_summary summary{};
  check(wperef_run_dereverb(cfg.get(), log_line, nullptr, &summary), "dereverb");
  return exit_for(summary);
}

int run_benchmark(const RunFlags& flags, std::size_t n_seeds) {
  auto cfg = build_config(flags);
  wperef_run_summary summary{};
  check(wperef_run_benchmark(cfg.get(), n_seeds, log_line, nullptr, &summary), "benchmark");
  return exit_for(summary);
}

SignalPtr read_signal(const std::string& path) {
  wperef_signal* raw = nullptr;
  check(wperef_signal_read_wav(path.c_str(), &raw), path);
  return SignalPtr(raw);
}

int run_metrics(const std::vector<std::string>& files) {
  if (files.size() % 2 != 0) {
    std::fprintf(stderr, "wperef: metrics expects ESTIMATE TARGET pairs\n");
    return kExitConfig;
  }
  std::printf("estimate,target,fwssnr_db,segsnr_db\n");
  std::size_t failed = 0;
  for (std::size_t i = 0; i < files.size(); i += 2) {
    try {
      const auto estimate = read_signal(files[i]);
      const auto target = read_signal(files[i + 1]);
      double fw = 0.0, seg = 0.0;
      check(wperef_fwssnr(estimate.get(), target.get(), &fw), files[i]);
      check(wperef_segsnr(estimate.get(), target.get(), &seg), files[i]);
      std::printf("%s,%s,%.6f,%.6f\n", files[i].c_str(), files[i + 1].c_str(), fw, seg);
    } catch (const Failure&) {
      ++failed;
    }
  }
  return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multichannel WPE dereverberation with reference microphone selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(wperef_version()));

  RunFlags sim_flags, der_flags, bench_flags;
  bool render = false;
  auto* simulate = app.add_subcommand("simulate", "Write simulated RIRs for every layout source");
  add_run_flags(simulate, sim_flags, false);
  simulate->add_flag("--render", render, "Also write the dry signal and the reverberant mixture");

  auto* dereverb = app.add_subcommand("dereverb", "Dereverberate every scene and report metrics");
  add_run_flags(dereverb, der_flags, true);

  std::size_t n_seeds = 20;
  auto* benchmark =
      app.add_subcommand("benchmark", "Compare criteria over random source positions");
  add_run_flags(benchmark, bench_flags, true);
  benchmark->add_option("--n-seeds", n_seeds, "Number of random source positions")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000}));

  std::vector<std::string> pairs;
  auto* metrics = app.add_subcommand("metrics", "Score ESTIMATE TARGET WAV pairs (first channel)");
  metrics->add_option("files", pairs, "ESTIMATE TARGET [ESTIMATE TARGET ...]")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate) return run_simulate(sim_flags, render);
    if (*dereverb) return run_dereverb(der_flags);
    if (*benchmark) return run_benchmark(bench_flags, n_seeds);
    return run_metrics(pairs);
  } catch (const Failure& f) {
    return f.status == WPEREF_ERR_CONFIG ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wperef: %s\n", e.what());
    return kExitFailure;
  }
}
