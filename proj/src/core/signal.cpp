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
#include "core/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "core/error.hpp"
#include "core/fft.hpp"
#include "core/parallel.hpp"

namespace wperef {

void TimeSignal::validate() const {
  require(sample_rate > 0, "sample rate must be positive");
  for (double s : samples) {
    require(std::isfinite(s), "signal contains non-finite samples");
  }
}

std::size_t MultichannelTimeSignal::length() const {
  return channels.empty() ? 0 : channels.front().size();
}

int MultichannelTimeSignal::sample_rate() const {
  return channels.empty() ? 0 : channels.front().sample_rate;
}

void MultichannelTimeSignal::validate() const {
  require(!channels.empty(), "multichannel signal needs at least one channel");
  for (const auto& ch : channels) {
    ch.validate();
    require(ch.sample_rate == sample_rate(), "channels differ in sample rate");
    require(ch.size() == length(), "channels differ in length");
  }
}

std::vector<double> analysis_window(const StftConfig& cfg) {
  std::vector<double> w(cfg.frame_size);
  const double n = static_cast<double>(cfg.frame_size);
  for (std::size_t t = 0; t < cfg.frame_size; ++t) {
    w[t] = std::sin(std::numbers::pi * static_cast<double>(t) / n);
  }
  return w;
}

double overlap_add_gain(const StftConfig& cfg) {
  const auto w = analysis_window(cfg);
  double sum = 0.0;
  for (std::size_t t = 0; t < cfg.frame_size; t += cfg.shift) sum += w[t] * w[t];
  return sum;
}

void StftConfig::validate() const {
  require(frame_size >= 2 && (frame_size & (frame_size - 1)) == 0,
          "stft frame size must be a power of two");
  require(shift > 0 && shift <= frame_size, "stft shift must be in (0, frame_size]");
  const auto w = analysis_window(*this);
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t t = 0; t < shift; ++t) {
    double sum = 0.0;
    for (std::size_t k = t; k < frame_size; k += shift) sum += w[k] * w[k];
    lo = std::min(lo, sum);
    hi = std::max(hi, sum);
  }
  require(hi - lo <= 1e-10 * std::max(1.0, hi),
          "window pair does not satisfy constant overlap-add for shift " +
              std::to_string(shift));
}

Spectrogram::Spectrogram(std::size_t bins, std::size_t frames)
    : bins_(bins), frames_(frames), data_(bins * frames) {}

std::size_t frame_count(std::size_t length, const StftConfig& cfg) {
  if (length < cfg.frame_size) return 0;
  return 1 + (length - cfg.frame_size + cfg.shift - 1) / cfg.shift;
}

Spectrogram stft_analyze(const TimeSignal& signal, const StftConfig& cfg) {
  cfg.validate();
  if (signal.size() < cfg.frame_size) {
    fail(ErrorCode::kSignalTooShort, "signal too short: " +
                                         std::to_string(signal.size()) +
                                         " samples < frame size " +
                                         std::to_string(cfg.frame_size));
  }
  const std::size_t frames = frame_count(signal.size(), cfg);
  Spectrogram spec(cfg.bins(), frames);
  spec.shift = cfg.shift;
  spec.frame_size = cfg.frame_size;
  spec.sample_rate = signal.sample_rate;
  spec.signal_length = signal.size();

  const auto window = analysis_window(cfg);
  RealFft fft(cfg.frame_size);
  std::vector<double> frame(cfg.frame_size);
  std::vector<Complex> bins(cfg.bins());
  for (std::size_t n = 0; n < frames; ++n) {
    const std::size_t start = n * cfg.shift;
    for (std::size_t t = 0; t < cfg.frame_size; ++t) {
      const std::size_t idx = start + t;
      frame[t] = idx < signal.size() ? signal.samples[idx] * window[t] : 0.0;
    }
    fft.forward(frame, bins);
    for (std::size_t f = 0; f < bins.size(); ++f) spec.at(f, n) = bins[f];
  }
  return spec;
}

TimeSignal stft_synthesize(const Spectrogram& spec, const StftConfig& cfg) {
  cfg.validate();
  require(spec.bins() == cfg.bins(), "spectrogram bin count does not match stft config");
  require(spec.frames() >= 1, "spectrogram has no frames");
  require(spec.shift == 0 || spec.shift == cfg.shift,
          "spectrogram shift does not match stft config");

  const std::size_t padded = (spec.frames() - 1) * cfg.shift + cfg.frame_size;
  std::vector<double> out(padded, 0.0);
  const auto window = analysis_window(cfg);
  const double scale =
      1.0 / (static_cast<double>(cfg.frame_size) * overlap_add_gain(cfg));

  RealFft fft(cfg.frame_size);
  std::vector<Complex> bins(cfg.bins());
  std::vector<double> frame(cfg.frame_size);
  for (std::size_t n = 0; n < spec.frames(); ++n) {
    for (std::size_t f = 0; f < bins.size(); ++f) bins[f] = spec.at(f, n);
    // c2r ignores the imaginary part of DC and Nyquist.
    fft.inverse(bins, frame);
    const std::size_t start = n * cfg.shift;
    for (std::size_t t = 0; t < cfg.frame_size; ++t) {
      out[start + t] += frame[t] * window[t] * scale;
    }
  }

  TimeSignal result;
  result.sample_rate = spec.sample_rate > 0 ? spec.sample_rate : 16000;
  const std::size_t length =
      spec.signal_length > 0 ? std::min(spec.signal_length, padded) : padded;
  out.resize(length);
  result.samples = std::move(out);
  return result;
}

std::vector<Spectrogram> stft_analyze_all(const MultichannelTimeSignal& signals,
                                          const StftConfig& cfg,
                                          std::size_t threads) {
  signals.validate();
  std::vector<Spectrogram> specs(signals.num_channels());
  parallel_for(specs.size(), threads, [&](std::size_t m) {
    specs[m] = stft_analyze(signals.channels[m], cfg);
  });
  return specs;
}

double channel_power(const Spectrogram& spec) {
  require(spec.bins() > 0 && spec.frames() > 0, "channel_power on empty grid");
  double sum = 0.0;
  for (const Complex& v : spec.data()) sum += std::norm(v);
  return sum / static_cast<double>(spec.data().size());
}

}  // namespace wperef
