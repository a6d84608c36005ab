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
#include "core/speech.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "core/error.hpp"

namespace wperef {
namespace {

double formant_gain(double freq, const double (&centers)[3], const double (&widths)[3]) {
  double g = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double x = (freq - centers[i]) / widths[i];
    g += std::exp(-0.5 * x * x) / (i + 1.0);
  }
  // Glottal roll-off.
  return (g + 0.02) / std::sqrt(1.0 + freq / 500.0);
}

double envelope(std::size_t t, std::size_t len) {
  const double ramp = std::min<double>(0.25 * static_cast<double>(len), 400.0);
  const double x = static_cast<double>(t);
  const double tail = static_cast<double>(len - 1 - t);
  double e = 1.0;
  if (x < ramp) e = 0.5 * (1.0 - std::cos(std::numbers::pi * x / ramp));
  if (tail < ramp) e = std::min(e, 0.5 * (1.0 - std::cos(std::numbers::pi * tail / ramp)));
  return e;
}

}  // namespace

TimeSignal synthetic_speech(double seconds, int sample_rate, std::uint64_t seed) {
  require(seconds > 0.0 && sample_rate > 0, "speech length and rate must be positive");
  const auto total = static_cast<std::size_t>(seconds * sample_rate);
  const double fs = sample_rate;
  TimeSignal out;
  out.sample_rate = sample_rate;
  out.samples.assign(total, 0.0);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double speaker_f0 = 95.0 + 120.0 * uni(rng);

  std::size_t pos = static_cast<std::size_t>((0.05 + 0.1 * uni(rng)) * fs);
  bool paused = false;
  while (pos < total) {
    const double kind = uni(rng);
    // A pause never follows a pause, so short utterances are never empty.
    if (kind < 0.2 && !paused) {
      pos += static_cast<std::size_t>((0.06 + 0.25 * uni(rng)) * fs);
      paused = true;
      continue;
    }
    paused = false;
    if (kind < 0.35) {
      // Fricative: noise through a two-pole resonator in the 2.5-6 kHz range.
      const auto len = static_cast<std::size_t>((0.04 + 0.08 * uni(rng)) * fs);
      const double center = std::min(2500.0 + 3500.0 * uni(rng), 0.45 * fs);
      const double radius = 0.9;
      const double c1 = 2.0 * radius * std::cos(2.0 * std::numbers::pi * center / fs);
      const double c2 = -radius * radius;
      const double level = 0.05 + 0.1 * uni(rng);
      double y1 = 0.0, y2 = 0.0;
      for (std::size_t t = 0; t < len && pos + t < total; ++t) {
        const double y = gauss(rng) + c1 * y1 + c2 * y2;
        y2 = y1;
        y1 = y;
        out.samples[pos + t] += level * 0.1 * y * envelope(t, len);
      }
      pos += len;
      continue;
    }
    // Voiced syllable with gliding f0 and random formants.
    const auto len = static_cast<std::size_t>((0.08 + 0.2 * uni(rng)) * fs);
    const double f0_start = speaker_f0 * (0.85 + 0.3 * uni(rng));
    const double f0_end = f0_start * (0.85 + 0.3 * uni(rng));
    const double centers[3] = {300.0 + 600.0 * uni(rng), 900.0 + 1500.0 * uni(rng),
                               2400.0 + 800.0 * uni(rng)};
    const double widths[3] = {90.0, 120.0, 180.0};
    const double level = 0.4 + 0.6 * uni(rng);
    const int harmonics = static_cast<int>(std::min(4000.0, 0.45 * fs) / f0_start);
    std::vector<double> amps(static_cast<std::size_t>(harmonics));
    for (int h = 1; h <= harmonics; ++h) {
      amps[static_cast<std::size_t>(h - 1)] = formant_gain(h * f0_start, centers, widths);
    }
    double phase = 2.0 * std::numbers::pi * uni(rng);
    for (std::size_t t = 0; t < len && pos + t < total; ++t) {
      const double frac = static_cast<double>(t) / static_cast<double>(len);
      const double f0 = f0_start + (f0_end - f0_start) * frac;
      phase += 2.0 * std::numbers::pi * f0 / fs;
      double v = 0.0;
      for (int h = 1; h <= harmonics; ++h) {
        v += amps[static_cast<std::size_t>(h - 1)] * std::sin(h * phase);
      }
      out.samples[pos + t] += level * v * envelope(t, len);
    }
    pos += len + static_cast<std::size_t>(0.02 * uni(rng) * fs);
  }

  double peak = 0.0;
  for (double v : out.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : out.samples) v *= 0.5 / peak;
  }
  return out;
}

}  // namespace wperef
