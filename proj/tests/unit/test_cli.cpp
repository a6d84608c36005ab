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
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
};

fs::path tmp_dir(const std::string& name) {
  const fs::path dir = fs::path(WPEREF_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome run(const std::string& args) {
  const fs::path log = fs::path(WPEREF_TEST_TMP) / "cli_output.txt";
  fs::create_directories(log.parent_path());
  const std::string cmd = std::string(WPEREF_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  o.out = ss.str();
  return o;
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Cheap WPE so that whole-layout runs stay short.
fs::path quick_config(const fs::path& dir) {
  const auto path = dir / "quick.json";
  std::ofstream(path) << R"({"wpe": {"iterations": 1, "filter_length": 2},
    "criteria": ["nlp", "maxpower"], "p": [0.5, 0.9], "dry_seconds": 0.5})";
  return path;
}

}  // namespace

TEST_CASE("version and usage errors") {
  CHECK(run("--version").code == 0);
  CHECK(run("").code == 2);
  CHECK(run("dereverb --no-such-flag").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("invalid p is rejected before any processing") {
  const auto dir = tmp_dir("cli_bad_p");
  const auto out = dir / "out";
  const auto o = run("dereverb --p 3 --out " + out.string());
  CHECK(o.code == 2);
  CHECK(o.out.find("p") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("single microphone layout") {
  const auto dir = tmp_dir("cli_single");
  const auto layout = dir / "one.json";
  std::ofstream(layout) << R"({"room": {"t60": 0.4}, "mics": [[1.5, 1.5, 1.2]],
    "source": [3.0, 3.5, 1.5], "seed": 2})";
  const auto out = dir / "out";
  const auto o = run("dereverb --config " + quick_config(dir).string() + " --layout " +
                     layout.string() + " --criterion nlp --criterion lp:0 --criterion maxpower" +
                     " --criterion maxelr --out " + out.string());
  REQUIRE(o.code == 0);
  const auto rows = lines_of(out / "report.csv");
  REQUIRE(rows.size() == 1 + 4 * 2);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].find(",1,") != std::string::npos);
  }
  std::size_t wavs = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().extension() == ".wav") {
      ++wavs;
      CHECK(e.path().filename().string().find("_mic1.wav") != std::string::npos);
    }
  }
  CHECK(wavs == 8);
}

TEST_CASE("shipped layout gives one row per scene, criterion and p") {
  const auto dir = tmp_dir("cli_layout");
  const auto out = dir / "out";
  const auto o = run("dereverb --config " + quick_config(dir).string() + " --layout " +
                     std::string(WPEREF_DATA_DIR) + "/layout_default.json --no-wavs --out " +
                     out.string());
  REQUIRE(o.code == 0);
  CHECK(lines_of(out / "report.csv").size() == 1 + 12 * 2 * 2);
  CHECK(lines_of(out / "summary.csv").size() == 1 + 2 * 2);
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("a bad input file fails its scene only") {
  const auto dir = tmp_dir("cli_iso");
  const auto sim = dir / "sim";
  const auto layout = dir / "two.json";
  std::ofstream(layout) << R"({"room": {"t60": 0.4}, "mics": [[1.5, 1.5, 1.2], [4.5, 5.0, 1.3]],
    "source": [3.0, 3.5, 1.5], "seed": 2})";
  REQUIRE(run("simulate --render --config " + quick_config(dir).string() + " --layout " +
              layout.string() + " --out " + sim.string())
              .code == 0);
  CHECK(fs::exists(sim / "pos01_rir.wav"));
  CHECK(fs::exists(sim / "pos01_dry.wav"));
  const auto mixtures = dir / "mixtures";
  fs::create_directories(mixtures);
  fs::copy_file(sim / "pos01_mixture.wav", mixtures / "a_good.wav");
  std::ofstream(mixtures / "b_bad.wav") << "not a wav file";

  const auto out = dir / "out";
  const auto o = run("dereverb --config " + quick_config(dir).string() +
                     " --criterion nlp --mixtures-dir " + mixtures.string() + " --out " +
                     out.string());
  CHECK(o.code == 1);
  CHECK(o.out.find("b_bad") != std::string::npos);
  std::size_t good = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().filename().string().rfind("a_good_", 0) == 0) ++good;
  }
  CHECK(good == 2);

  // Scoring existing files.
  const auto m = run("metrics " + (sim / "pos01_dry.wav").string() + " " +
                     (sim / "pos01_dry.wav").string());
  REQUIRE(m.code == 0);
  CHECK(m.out.find("estimate,target,fwssnr_db,segsnr_db") != std::string::npos);
  CHECK(m.out.find(",35.000000,35.000000") != std::string::npos);
  CHECK(run("metrics " + (sim / "pos01_dry.wav").string()).code == 2);
}

TEST_CASE("benchmark summary") {
  const auto dir = tmp_dir("cli_bench");
  const auto out = dir / "out";
  const auto o = run("benchmark --n-seeds 2 --config " + quick_config(dir).string() + " --out " +
                     out.string());
  REQUIRE(o.code == 0);
  CHECK(lines_of(out / "benchmark_summary.csv").size() == 1 + 2 * 2);
  CHECK(run("benchmark --n-seeds 0 --out " + out.string()).code == 2);
}
