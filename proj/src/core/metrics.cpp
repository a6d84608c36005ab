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
#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "core/error.hpp"
#include "core/fft.hpp"

namespace wperef {
namespace {

constexpr double kErrorFloor = 1e-12;

struct Framing {
  std::size_t length = 0;
  std::size_t hop = 0;
  std::size_t count = 0;
};

Framing make_framing(std::size_t signal_length, int sample_rate) {
  Framing fr;
  fr.length = static_cast<std::size_t>(std::lround(0.025 * sample_rate));
  fr.hop = static_cast<std::size_t>(std::lround(0.010 * sample_rate));
  require(fr.length >= 2 && fr.hop >= 1, "sample rate too low for metric framing");
  fr.count = signal_length >= fr.length ? 1 + (signal_length - fr.length) / fr.hop : 0;
  return fr;
}

double clamp_snr(double target_energy, double error_energy) {
  if (error_energy <= 0.0) return kSnrCeilingDb;
  if (target_energy <= 0.0) return kSnrFloorDb;
  const double db = 10.0 * std::log10(target_energy / std::max(error_energy, kErrorFloor));
  return std::clamp(db, kSnrFloorDb, kSnrCeilingDb);
}

void check_inputs(const TimeSignal& estimate, const TimeSignal& target, std::size_t length) {
  require(estimate.sample_rate == target.sample_rate, "metric inputs differ in sample rate");
  double energy = 0.0;
  for (std::size_t t = 0; t < length; ++t) energy += target.samples[t] * target.samples[t];
  if (!(energy > 0.0)) fail(ErrorCode::kInvalidArgument, "silent target in metric");
}

// Active-frame mask from target frame energies.
std::vector<bool> active_frames(const std::vector<double>& energies) {
  const double peak = *std::max_element(energies.begin(), energies.end());
  const double threshold = peak * std::pow(10.0, -kActiveFrameRangeDb / 10.0);
  std::vector<bool> mask(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i) {
    mask[i] = energies[i] > 0.0 && energies[i] > threshold;
  }
  return mask;
}

double mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double inverse_mel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

}  // namespace

double fwssnr(const TimeSignal& estimate, const TimeSignal& target) {
  const std::size_t length = std::min(estimate.size(), target.size());
  check_inputs(estimate, target, length);
  const int fs = target.sample_rate;
  const Framing fr = make_framing(length, fs);
  if (fr.count == 0) fail(ErrorCode::kSignalTooShort, "signal shorter than one metric frame");

  const std::size_t nfft = next_pow2(fr.length);
  RealFft fft(nfft);
  std::vector<double> window(fr.length);
  for (std::size_t t = 0; t < fr.length; ++t) {
    window[t] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) /
                                     static_cast<double>(fr.length));
  }

  // Band index per FFT bin, -1 below the lowest edge.
  const double nyquist = 0.5 * fs;
  std::vector<double> edges(kFwssnrBands + 1);
  for (int b = 0; b <= kFwssnrBands; ++b) {
    edges[static_cast<std::size_t>(b)] =
        inverse_mel(mel(kFwssnrLowHz) + (mel(nyquist) - mel(kFwssnrLowHz)) * b / kFwssnrBands);
  }
  edges.front() = kFwssnrLowHz;
  edges.back() = nyquist;
  std::vector<int> band_of(fft.bins(), -1);
  for (std::size_t k = 0; k < fft.bins(); ++k) {
    const double hz = static_cast<double>(k) * fs / static_cast<double>(nfft);
    for (int b = 0; b < kFwssnrBands; ++b) {
      const bool last = b == kFwssnrBands - 1;
      if (hz >= edges[static_cast<std::size_t>(b)] &&
          (hz < edges[static_cast<std::size_t>(b) + 1] || (last && hz <= nyquist))) {
        band_of[k] = b;
        break;
      }
    }
  }

  std::vector<double> frame_energy(fr.count), frame_score(fr.count, 0.0);
  std::vector<bool> scored(fr.count, false);
  std::vector<double> tf(fr.length), ef(fr.length);
  std::vector<Complex> ts(fft.bins()), es(fft.bins());
  for (std::size_t i = 0; i < fr.count; ++i) {
    const std::size_t start = i * fr.hop;
    double energy = 0.0;
    for (std::size_t t = 0; t < fr.length; ++t) {
      tf[t] = target.samples[start + t] * window[t];
      ef[t] = estimate.samples[start + t] * window[t];
      energy += tf[t] * tf[t];
    }
    frame_energy[i] = energy;
    fft.forward(tf, ts);
    fft.forward(ef, es);
    std::vector<double> band_target(kFwssnrBands, 0.0), band_error(kFwssnrBands, 0.0);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      if (band_of[k] < 0) continue;
      const double mt = std::abs(ts[k]);
      const double diff = mt - std::abs(es[k]);
      band_target[static_cast<std::size_t>(band_of[k])] += mt * mt;
      band_error[static_cast<std::size_t>(band_of[k])] += diff * diff;
    }
    double num = 0.0, den = 0.0;
    for (int b = 0; b < kFwssnrBands; ++b) {
      const double tb = band_target[static_cast<std::size_t>(b)];
      const double w = std::pow(tb, kFwssnrWeightExponent);
      num += w * clamp_snr(tb, band_error[static_cast<std::size_t>(b)]);
      den += w;
    }
    if (den > 0.0) {
      frame_score[i] = num / den;
      scored[i] = true;
    }
  }

  const auto active = active_frames(frame_energy);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < fr.count; ++i) {
    if (active[i] && scored[i]) {
      sum += frame_score[i];
      ++count;
    }
  }
  if (count == 0) fail(ErrorCode::kInvalidArgument, "silent target in metric");
  return sum / static_cast<double>(count);
}

double segsnr(const TimeSignal& estimate, const TimeSignal& target) {
  const std::size_t length = std::min(estimate.size(), target.size());
  check_inputs(estimate, target, length);
  const Framing fr = make_framing(length, target.sample_rate);
  if (fr.count == 0) fail(ErrorCode::kSignalTooShort, "signal shorter than one metric frame");

  std::vector<double> energies(fr.count), scores(fr.count);
  for (std::size_t i = 0; i < fr.count; ++i) {
    double te = 0.0, ee = 0.0;
    for (std::size_t t = i * fr.hop; t < i * fr.hop + fr.length; ++t) {
      const double e = target.samples[t] - estimate.samples[t];
      te += target.samples[t] * target.samples[t];
      ee += e * e;
    }
    energies[i] = te;
    scores[i] = clamp_snr(te, ee);
  }
  const auto active = active_frames(energies);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < fr.count; ++i) {
    if (active[i]) {
      sum += scores[i];
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

double relative_improvement(std::span<const double> per_mic_scores, std::size_t chosen) {
  require(!per_mic_scores.empty(), "relative improvement needs at least one score");
  require(chosen < per_mic_scores.size(), "chosen index out of range");
  const double mean = std::accumulate(per_mic_scores.begin(), per_mic_scores.end(), 0.0) /
                      static_cast<double>(per_mic_scores.size());
  return per_mic_scores[chosen] - mean;
}

TimeSignal align_for_scoring(const TimeSignal& signal, std::size_t offset, std::size_t length) {
  TimeSignal out;
  out.sample_rate = signal.sample_rate;
  if (offset >= signal.size()) return out;
  const std::size_t end = std::min(signal.size(), offset + length);
  out.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                     signal.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

}  // namespace wperef
