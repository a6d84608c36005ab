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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "core/delay.hpp"
#include "core/error.hpp"
#include "core/room.hpp"
#include "core/speech.hpp"
#include "support/oracles.hpp"

namespace wperef {
namespace {

using testing::make_signal;
using testing::white_noise;

// b(t) = a(t - shift), both cut from one longer noise sequence.
std::pair<TimeSignal, TimeSignal> shifted_pair(long shift, std::size_t n, std::uint64_t seed) {
  const auto src = white_noise(n + 1000, seed);
  std::vector<double> a(n), b(n);
  for (std::size_t t = 0; t < n; ++t) {
    a[t] = src[t + 500];
    b[t] = src[static_cast<std::size_t>(static_cast<long>(t) + 500 - shift)];
  }
  return {make_signal(a), make_signal(b)};
}

}  // namespace

TEST_CASE("gcc-phat recovers a constructed shift") {
  const auto [a, b] = shifted_pair(7, 8000, 3);
  const auto res = gcc_phat(a, b, 50);
  CHECK(res.lag == -7);
  CHECK(res.lag == testing::brute_xcorr_lag(a.samples, b.samples, 50));
  CHECK_FALSE(res.low_confidence);

  const auto swapped = gcc_phat(b, a, 50);
  CHECK(swapped.lag == 7);
}

TEST_CASE("gcc-phat of a signal with itself") {
  const auto a = make_signal(white_noise(4000, 9));
  const auto res = gcc_phat(a, a, 100);
  CHECK(res.lag == 0);
  CHECK(res.peak == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gcc-phat agrees with brute-force cross-correlation") {
  for (long shift : {-120L, -33L, -1L, 1L, 19L, 250L}) {
    const auto [a, b] = shifted_pair(shift, 4096, 100 + static_cast<std::uint64_t>(shift + 200));
    CHECK(gcc_phat(a, b, 300).lag == testing::brute_xcorr_lag(a.samples, b.samples, 300));
  }
}

TEST_CASE("independent noises give a weak, flagged peak") {
  int flagged = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto a = make_signal(white_noise(8000, 1000 + seed));
    const auto b = make_signal(white_noise(8000, 5000 + seed));
    const auto res = gcc_phat(a, b, 400);
    CHECK(res.peak < kGccPhatConfidenceFloor);
    flagged += res.low_confidence ? 1 : 0;
  }
  CHECK(flagged == 100);
}

TEST_CASE("gcc-phat ignores positive scaling") {
  const auto [a, b] = shifted_pair(-42, 6000, 21);
  TimeSignal a10 = a;
  for (auto& v : a10.samples) v *= 10.0;
  const auto base = gcc_phat(a, b, 200);
  const auto scaled = gcc_phat(a10, b, 200);
  CHECK(scaled.lag == base.lag);
  CHECK(scaled.peak == doctest::Approx(base.peak).epsilon(1e-12));
}

TEST_CASE("gcc-phat input checks") {
  const auto a = make_signal(white_noise(1000, 1));
  CHECK_THROWS_AS(gcc_phat(a, make_signal(white_noise(999, 2)), 10), Error);
  CHECK_THROWS_AS(gcc_phat(a, a, 251), Error);
  const auto silent = make_signal(std::vector<double>(1000, 0.0));
  try {
    gcc_phat(a, silent, 10);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSilentChannel);
  }
}

TEST_CASE("tdoa matrix of progressively delayed channels") {
  const auto src = white_noise(9000, 17);
  MultichannelTimeSignal multi;
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> ch(8000);
    for (std::size_t t = 0; t < ch.size(); ++t) ch[t] = src[t + 100 - 5 * k];
    multi.channels.push_back(make_signal(ch));
  }
  const auto tdoa = estimate_tdoa_matrix(multi, 50);
  REQUIRE(tdoa.size() == 3);
  for (int m = 0; m < 3; ++m) {
    for (int r = 0; r < 3; ++r) {
      CHECK(std::abs(tdoa.delta(m, r) - 5.0 * (m - r)) <= 1.0);
      CHECK(tdoa.delta(m, r) == -tdoa.delta(r, m));
    }
    CHECK(tdoa.delta(m, m) == 0.0);
  }
}

TEST_CASE("tdoa matrix of identical channels is zero") {
  const auto a = make_signal(white_noise(4000, 5));
  MultichannelTimeSignal multi{{a, a, a, a}};
  const auto tdoa = estimate_tdoa_matrix(multi, 40);
  CHECK(tdoa.delta.isZero(0.0));
  CHECK_THROWS_AS(estimate_tdoa_matrix(MultichannelTimeSignal{{a}}, 40), Error);
}

TEST_CASE("tdoa matrix matches room geometry for close microphones") {
  RoomSpec spec;
  spec.t60 = 0.4;
  spec.source = {3.0, 3.5, 1.5};
  spec.mics = {{3.4, 3.6, 1.4}, {2.5, 3.2, 1.5}, {3.1, 4.1, 1.3}};
  const auto scene = simulate_rir(spec, 4);
  const auto dry = synthetic_speech(3.0, spec.sample_rate, 12);
  const auto mix = render_scene(scene, dry);
  const auto tdoa = estimate_tdoa_matrix(mix, 800);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t r = 0; r < 3; ++r) {
      const double truth = (distance(spec.source, spec.mics[m]) - distance(spec.source, spec.mics[r])) /
                           kSpeedOfSound * spec.sample_rate;
      CHECK(std::abs(tdoa.delta(static_cast<int>(m), static_cast<int>(r)) - truth) <= 2.0);
    }
  }
}

TEST_CASE("prediction delays from tdoa") {
  TdoaMatrix tdoa;
  tdoa.delta = Eigen::MatrixXd::Zero(3, 3);
  auto d = compute_prediction_delays(tdoa, 2, 256);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t r = 0; r < 3; ++r) CHECK(d.at(m, r) == 2);
  }
  tdoa.delta(0, 1) = 600.0;
  tdoa.delta(1, 0) = -600.0;
  d = compute_prediction_delays(tdoa, 2, 256);
  CHECK(d.at(0, 1) == 1);
  CHECK(d.at(1, 0) == 4);
  CHECK(d.at(1, 1) == 2);
  CHECK(d.for_reference(1) == std::vector<std::size_t>{1, 2, 2});
}

TEST_CASE("prediction delays are monotone and at least one") {
  std::size_t previous = 1000;
  for (double delta = -3000.0; delta <= 3000.0; delta += 7.0) {
    TdoaMatrix tdoa;
    tdoa.delta = Eigen::MatrixXd::Zero(2, 2);
    tdoa.delta(0, 1) = delta;
    tdoa.delta(1, 0) = -delta;
    const auto d = compute_prediction_delays(tdoa, 3, 256);
    CHECK(d.at(0, 1) >= 1);
    CHECK(d.at(0, 1) <= previous);
    CHECK(d.at(0, 0) == 3);
    previous = d.at(0, 1);
  }
  TdoaMatrix tdoa;
  tdoa.delta = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(compute_prediction_delays(tdoa, 0, 256), Error);
  CHECK_THROWS_AS(PredictionDelayMatrix(2, 2).set(0, 1, 0), Error);
}

TEST_CASE("tdoa csv") {
  const std::filesystem::path dir = WPEREF_TEST_TMP;
  std::filesystem::create_directories(dir);
  const auto good = (dir / "tdoa_good.csv").string();
  std::ofstream(good) << "0, -12.5\n12.5, 0\n";
  const auto t = read_tdoa_csv(good);
  REQUIRE(t.size() == 2);
  CHECK(t.delta(0, 1) == -12.5);
  CHECK(t.delta(1, 0) == 12.5);

  const auto ragged = (dir / "tdoa_ragged.csv").string();
  std::ofstream(ragged) << "0,1\n1\n";
  const auto word = (dir / "tdoa_word.csv").string();
  std::ofstream(word) << "0,x\n1,0\n";
  for (const auto& path : {ragged, word}) {
    try {
      read_tdoa_csv(path);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfig);
    }
  }
  try {
    read_tdoa_csv((dir / "missing.csv").string());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}

}  // namespace wperef
