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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/room.hpp"
#include "core/speech.hpp"
#include "core/wpe.hpp"
#include "support/oracles.hpp"

namespace wperef {
namespace {

using testing::random_complex;
using testing::random_spectrogram;

std::vector<Spectrogram> random_specs(std::size_t mics, std::size_t bins, std::size_t frames,
                                      std::uint64_t seed) {
  std::vector<Spectrogram> specs;
  for (std::size_t m = 0; m < mics; ++m) specs.push_back(random_spectrogram(bins, frames, seed + m));
  return specs;
}

double max_abs_diff(const Spectrogram& a, const Spectrogram& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

// Small reverberant scene shared by several cases.
struct SmallScene {
  RoomScene room;
  TimeSignal dry;
  MultichannelTimeSignal mixture;
};

SmallScene small_scene(double t60, std::size_t mics, std::uint64_t seed, double seconds = 2.0) {
  RoomSpec spec;
  spec.t60 = t60;
  spec.source = {2.5, 3.1, 1.5};
  const std::vector<Point3> all = {{1.0, 1.2, 1.3}, {4.9, 1.0, 1.4}, {4.6, 5.8, 1.2}, {1.3, 5.5, 1.5}};
  spec.mics.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(mics));
  SmallScene s;
  s.room = simulate_rir(spec, seed);
  s.dry = synthetic_speech(seconds, spec.sample_rate, seed + 100);
  s.mixture = render_scene(s.room, s.dry);
  return s;
}

TEST_CASE("delayed convolution: unit shift") {
  Spectrogram x(1, 3);
  x.at(0, 0) = {1.0, 0.5};
  x.at(0, 1) = {2.0, -1.0};
  x.at(0, 2) = {3.0, 0.0};
  const std::vector<Spectrogram> specs{x};
  const std::vector<std::size_t> delays{1};
  const auto m = build_delayed_convolution(specs, delays, 1, 0);
  REQUIRE(m.rows() == 3);
  REQUIRE(m.cols() == 1);
  CHECK(m(0, 0) == Complex{});
  CHECK(m(1, 0) == x.at(0, 0));
  CHECK(m(2, 0) == x.at(0, 1));
}

TEST_CASE("delayed convolution matches brute-force indexing") {
  const auto specs = random_specs(2, 3, 5, 9);
  const std::vector<std::size_t> delays{1, 2};
  const std::size_t taps = 2;
  for (std::size_t f = 0; f < 3; ++f) {
    const auto m = build_delayed_convolution(specs, delays, taps, f);
    REQUIRE(m.rows() == 5);
    REQUIRE(m.cols() == 4);
    for (long n = 0; n < 5; ++n) {
      for (std::size_t mic = 0; mic < 2; ++mic) {
        for (std::size_t l = 0; l < taps; ++l) {
          const long src = n - static_cast<long>(delays[mic] + l);
          const Complex expected =
              src >= 0 ? specs[mic].at(f, static_cast<std::size_t>(src)) : Complex{};
          CHECK(m(n, static_cast<Eigen::Index>(mic * taps + l)) == expected);
        }
      }
    }
  }
}

TEST_CASE("delayed convolution of silence and short utterances") {
  std::vector<Spectrogram> zeros{Spectrogram(2, 10), Spectrogram(2, 10)};
  const std::vector<std::size_t> delays{2, 3};
  CHECK(build_delayed_convolution(zeros, delays, 4, 1).isZero(0.0));
  try {
    build_delayed_convolution(zeros, delays, 7, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUtteranceTooShort);
  }
}

TEST_CASE("weighted least squares") {
  SUBCASE("exactly representable target") {
    const auto x = random_complex(20, 5, 1);
    const Eigen::VectorXcd g = random_complex(5, 1, 2);
    const Eigen::VectorXcd y = x * g;
    const auto sol = solve_weighted_ls(x, y, Eigen::VectorXd::Ones(20), 1e-10);
    CHECK((y - x * sol).norm() < 1e-8 * y.norm());
  }
  SUBCASE("agrees with a weighted pseudo-inverse") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> wdist(0.05, 4.0);
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = random_complex(8, 4, 10 + trial);
      const Eigen::VectorXcd y = random_complex(8, 1, 50 + trial);
      Eigen::VectorXd w(8);
      for (auto& v : w) v = wdist(rng);
      const auto sol = solve_weighted_ls(x, y, w, 0.0);
      const auto oracle = testing::weighted_pinv_solve(x, y, w);
      CHECK((sol - oracle).norm() <= 1e-8 * oracle.norm());
    }
  }
  SUBCASE("zero matrix gives a zero filter") {
    const auto sol = solve_weighted_ls(Eigen::MatrixXcd::Zero(6, 3), random_complex(6, 1, 4),
                                       Eigen::VectorXd::Ones(6), 1e-10);
    CHECK(sol.isZero(0.0));
  }
  SUBCASE("rank-deficient system without ridge is degenerate") {
    Eigen::MatrixXcd x = random_complex(6, 3, 5);
    x.col(2) = x.col(1);
    try {
      solve_weighted_ls(x, random_complex(6, 1, 6), Eigen::VectorXd::Ones(6), 0.0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDegenerateSystem);
    }
  }
}

TEST_CASE("weight update") {
  const double eps = 1e-7;
  const auto zero = update_weights(Eigen::VectorXcd::Zero(5), 0.5, eps);
  for (double w : zero) CHECK(w == eps);
  Eigen::VectorXcd unit(4);
  unit << Complex{1, 0}, Complex{0, 1}, std::polar(1.0, 0.4), Complex{-1, 0};
  for (double w : update_weights(unit, 0.5, eps)) CHECK(w == doctest::Approx(1.0 + eps));
  const Eigen::VectorXcd any = random_complex(16, 1, 7);
  for (double w : update_weights(any, 2.0, eps)) CHECK(w == 1.0 + eps);
  const auto w = update_weights(any, 0.9, eps);
  for (Eigen::Index i = 0; i < any.size(); ++i) {
    CHECK(w(i) == doctest::Approx(std::pow(std::abs(any(i)), 1.1) + eps).epsilon(1e-14));
    CHECK(w(i) >= eps);
  }
}

TEST_CASE("zero iterations return the reference untouched") {
  const auto specs = random_specs(3, 4, 40, 21);
  const auto delays = PredictionDelayMatrix::uniform(3, 2);
  const auto result = run_wpe(specs, 1, delays, WpeConfig{}, 0);
  CHECK(result.iterations_run == 0);
  CHECK(result.cost_trace.size() == 1);
  CHECK(max_abs_diff(result.output, specs[1]) == 0.0);
  CHECK(result.cost_trace[0] == doctest::Approx(lp_cost(specs[1], 0.5)));
}

// Relative L2 change WPE makes to the reference of three delayed copies of
// white noise, with a prediction delay that keeps analysis frames disjoint.
std::vector<double> anechoic_change(std::size_t length, std::vector<double>* frames) {
  const auto source = testing::white_noise(length + 400, 77);
  MultichannelTimeSignal multi;
  for (std::size_t lag : {0u, 40u, 100u}) {
    std::vector<double> ch(length);
    for (std::size_t t = 0; t < length; ++t) ch[t] = source[t + 200 - lag];
    multi.channels.push_back(testing::make_signal(ch));
  }
  const auto specs = stft_analyze_all(multi, StftConfig{});
  const auto delays = PredictionDelayMatrix::uniform(3, 4);
  std::vector<double> change;
  for (std::size_t r = 0; r < 3; ++r) {
    const auto result = run_wpe(specs, r, delays, WpeConfig{});
    const auto& trace = result.smoothed_cost_trace;
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] * (1 + 1e-6));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < specs[r].data().size(); ++i) {
      num += std::norm(result.output.data()[i] - specs[r].data()[i]);
      den += std::norm(specs[r].data()[i]);
    }
    change.push_back(std::sqrt(num / den));
  }
  frames->push_back(static_cast<double>(specs[0].frames()));
  return change;
}

TEST_CASE("anechoic input: only chance correlations are removed") {
  // Nothing beyond the delay is correlated with the current frame, so the
  // filter can only fit noise. With K = 45 taps over N frames that removes
  // about K/N of the energy, and the change shrinks as N grows.
  std::vector<double> frames;
  const auto short_run = anechoic_change(32000, &frames);
  const auto long_run = anechoic_change(128000, &frames);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(short_run[r] < 1.3 * std::sqrt(45.0 / frames[0]));
    CHECK(long_run[r] < 1.3 * std::sqrt(45.0 / frames[1]));
    CHECK(long_run[r] < 0.65 * short_run[r]);
  }
}

TEST_CASE("dereverberation improves FWSSNR on a simulated room") {
  // Long enough that 60 taps do not overfit the utterance.
  const auto scene = small_scene(0.6, 4, 5, 6.0);
  const StftConfig stft;
  const auto specs = stft_analyze_all(scene.mixture, stft);
  const auto delays = PredictionDelayMatrix::uniform(4, 2);
  const std::size_t r = 0;
  const auto result = run_wpe(specs, r, delays, WpeConfig{});
  const auto out = stft_synthesize(result.output, stft);
  const std::size_t offset = scene.room.rirs[r].direct_path_index;
  const auto target =
      align_for_scoring(direct_early_target(scene.room, scene.dry, r, kDefaultEarlyMs), offset,
                        scene.dry.size());
  const double before =
      fwssnr(align_for_scoring(scene.mixture.channels[r], offset, scene.dry.size()), target);
  const double after = fwssnr(align_for_scoring(out, offset, scene.dry.size()), target);
  CHECK(after - before >= 2.0);
}

TEST_CASE("smoothed cost never increases") {
  const StftConfig stft{512, 128};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto scene = small_scene(0.4, 2 + seed % 3, 200 + seed, 1.2);
    const auto specs = stft_analyze_all(scene.mixture, stft);
    const auto delays = PredictionDelayMatrix::uniform(specs.size(), 2);
    WpeConfig cfg;
    cfg.filter_length = 6;
    cfg.iterations = 6;
    for (double p : {0.05, 0.5, 0.9}) {
      cfg.p = p;
      const auto result = run_wpe(specs, seed % specs.size(), delays, cfg);
      const auto& trace = result.smoothed_cost_trace;
      for (std::size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace[i] <= trace[i - 1] * (1.0 + 1e-6));
      }
      const double eps = weight_floor(specs[seed % specs.size()], cfg);
      CHECK(trace.back() == doctest::Approx(smoothed_lp_cost(result.output, p, eps)));
      CHECK(result.cost_trace.back() == doctest::Approx(lp_cost(result.output, p)));
    }
  }
}

double relative_gap(const Spectrogram& a, const Spectrogram& b, Complex scale) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    num += std::norm(a.data()[i] - scale * b.data()[i]);
    den += std::norm(scale * b.data()[i]);
  }
  return std::sqrt(num / den);
}

TEST_CASE("scaling every input by a complex constant scales the output") {
  const auto specs = random_specs(2, 6, 50, 31);
  const Complex alpha = std::polar(3.7, 1.1);
  std::vector<Spectrogram> scaled = specs;
  for (auto& s : scaled) {
    for (auto& v : s.data()) v *= alpha;
  }
  WpeConfig cfg;
  cfg.filter_length = 3;
  const auto delays = PredictionDelayMatrix::uniform(2, 2);
  const auto base = run_wpe(specs, 0, delays, cfg);
  const auto out = run_wpe(scaled, 0, delays, cfg);
  CHECK(relative_gap(out.output, base.output, alpha) < 1e-9);
}

TEST_CASE("scaling one channel scales the output only through the reference") {
  const auto specs = random_specs(3, 5, 60, 33);
  WpeConfig cfg;
  cfg.filter_length = 3;
  const auto delays = PredictionDelayMatrix::uniform(3, 2);
  for (double a : {1e-3, 0.1, 10.0, 1e3}) {
    for (std::size_t scaled_mic = 0; scaled_mic < 3; ++scaled_mic) {
      std::vector<Spectrogram> scaled = specs;
      for (auto& v : scaled[scaled_mic].data()) v *= a;
      for (std::size_t r = 0; r < 3; ++r) {
        const auto base = run_wpe(specs, r, delays, cfg);
        const auto out = run_wpe(scaled, r, delays, cfg);
        CHECK(relative_gap(out.output, base.output, r == scaled_mic ? a : 1.0) < 1e-8);
      }
    }
  }
}

TEST_CASE("frequency bins are processed independently") {
  const auto specs = random_specs(2, 7, 45, 41);
  std::vector<std::size_t> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
  std::vector<Spectrogram> permuted;
  for (const auto& s : specs) {
    Spectrogram p(s.bins(), s.frames());
    for (std::size_t f = 0; f < 7; ++f) {
      for (std::size_t n = 0; n < s.frames(); ++n) p.at(f, n) = s.at(perm[f], n);
    }
    permuted.push_back(p);
  }
  WpeConfig cfg;
  cfg.filter_length = 4;
  const auto delays = PredictionDelayMatrix::uniform(2, 2);
  const auto a = run_wpe(specs, 1, delays, cfg);
  const auto b = run_wpe(permuted, 1, delays, cfg);
  for (std::size_t f = 0; f < 7; ++f) {
    for (std::size_t n = 0; n < 45; ++n) {
      CHECK(std::abs(b.output.at(f, n) - a.output.at(perm[f], n)) <= 1e-9);
    }
  }
}

TEST_CASE("p = 2 with one iteration is plain least-squares prediction") {
  const auto specs = random_specs(2, 3, 60, 51);
  WpeConfig cfg;
  cfg.p = 2.0;
  cfg.filter_length = 3;
  cfg.iterations = 1;
  cfg.ridge = 0.0;
  PredictionDelayMatrix delays(2, 2);
  delays.set(1, 0, 3);
  const auto result = run_wpe(specs, 0, delays, cfg);
  const auto row = delays.for_reference(0);
  for (std::size_t f = 0; f < 3; ++f) {
    const auto x = build_delayed_convolution(specs, row, 3, f);
    Eigen::VectorXcd y(60);
    for (std::size_t n = 0; n < 60; ++n) y(static_cast<Eigen::Index>(n)) = specs[0].at(f, n);
    const auto g = testing::weighted_pinv_solve(x, y, Eigen::VectorXd::Ones(60));
    const Eigen::VectorXcd d = y - x * g;
    CHECK((result.filters.per_bin[f] - g).norm() <= 1e-8 * g.norm());
    for (std::size_t n = 0; n < 60; ++n) {
      CHECK(std::abs(result.output.at(f, n) - d(static_cast<Eigen::Index>(n))) <= 1e-8 * d.norm());
    }
  }
}

TEST_CASE("results do not depend on the thread count") {
  const auto specs = random_specs(3, 9, 40, 61);
  WpeConfig cfg;
  cfg.filter_length = 3;
  const auto delays = PredictionDelayMatrix::uniform(3, 2);
  const auto one = run_wpe(specs, 2, delays, cfg);
  cfg.threads = 4;
  const auto four = run_wpe(specs, 2, delays, cfg);
  CHECK(max_abs_diff(one.output, four.output) == 0.0);
  CHECK(one.cost_trace == four.cost_trace);
  CHECK(one.smoothed_cost_trace == four.smoothed_cost_trace);
}

TEST_CASE("snapshots equal shorter runs") {
  const auto specs = random_specs(2, 5, 40, 71);
  WpeConfig cfg;
  cfg.filter_length = 3;
  const auto delays = PredictionDelayMatrix::uniform(2, 2);
  WpeRunOptions options;
  options.snapshot_iterations = {0, 1, 4};
  const auto full = run_wpe(specs, 0, delays, cfg, options);
  for (std::size_t i : {0u, 1u, 4u}) {
    const auto shorter = run_wpe(specs, 0, delays, cfg, i);
    REQUIRE(full.snapshots.count(i) == 1);
    CHECK(max_abs_diff(full.snapshots.at(i), shorter.output) == 0.0);
  }
}

TEST_CASE("configuration and input checks") {
  CHECK_NOTHROW(WpeConfig{}.validate());
  for (auto mutate : std::vector<void (*)(WpeConfig&)>{
           [](WpeConfig& c) { c.filter_length = 0; }, [](WpeConfig& c) { c.p = 0.0; },
           [](WpeConfig& c) { c.p = 2.5; }, [](WpeConfig& c) { c.epsilon = 0.0; },
           [](WpeConfig& c) { c.base_delay = 0; }, [](WpeConfig& c) { c.ridge = -1.0; }}) {
    WpeConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), Error);
  }
  auto specs = random_specs(2, 4, 30, 81);
  specs[1] = random_spectrogram(4, 31, 82);
  CHECK_THROWS_AS(run_wpe(specs, 0, PredictionDelayMatrix::uniform(2, 2), WpeConfig{}), Error);
  const auto good = random_specs(2, 4, 30, 83);
  CHECK_THROWS_AS(run_wpe(good, 2, PredictionDelayMatrix::uniform(2, 2), WpeConfig{}), Error);
  CHECK_THROWS_AS(run_wpe(good, 0, PredictionDelayMatrix::uniform(2, 2), WpeConfig{}, 11), Error);
}

TEST_CASE("lp cost by brute force") {
  const auto s = random_spectrogram(4, 8, 91);
  double brute = 0.0;
  for (std::size_t f = 0; f < 4; ++f) {
    for (std::size_t n = 0; n < 8; ++n) brute += std::pow(std::abs(s.at(f, n)), 0.5);
  }
  CHECK(lp_cost(s, 0.5) == doctest::Approx(brute).epsilon(1e-13));
}

}  // namespace
}  // namespace wperef
