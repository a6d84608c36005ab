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
#ifndef WPEREF_CORE_SIGNAL_HPP_
#define WPEREF_CORE_SIGNAL_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace wperef {

using Complex = std::complex<double>;

struct TimeSignal {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
  // Throws on non-positive rate or non-finite samples.
  void validate() const;
};

// M channels sharing rate and length.
struct MultichannelTimeSignal {
  std::vector<TimeSignal> channels;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t length() const;
  int sample_rate() const;
  void validate() const;
};

enum class WindowKind { kSqrtHann };

struct StftConfig {
  std::size_t frame_size = 1024;
  std::size_t shift = 256;
  WindowKind window = WindowKind::kSqrtHann;

  std::size_t bins() const { return frame_size / 2 + 1; }
  // Checks 0 < shift <= frame_size, power-of-two frame and that the
  // analysis/synthesis pair overlap-adds to a constant within 1e-10.
  void validate() const;

  bool operator==(const StftConfig&) const = default;
};

// Periodic square-root Hann window of the configured length.
std::vector<double> analysis_window(const StftConfig& cfg);
// Sum over frames of analysis*synthesis window products at any sample in the
// fully-overlapped region.
double overlap_add_gain(const StftConfig& cfg);

// One-sided complex time-frequency grid, stored bin-major so each frequency
// row x(f, 0..N-1) is contiguous.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t bins, std::size_t frames);

  std::size_t bins() const { return bins_; }
  std::size_t frames() const { return frames_; }

  Complex& at(std::size_t f, std::size_t n) { return data_[f * frames_ + n]; }
  const Complex& at(std::size_t f, std::size_t n) const {
    return data_[f * frames_ + n];
  }
  std::span<Complex> row(std::size_t f) {
    return {data_.data() + f * frames_, frames_};
  }
  std::span<const Complex> row(std::size_t f) const {
    return {data_.data() + f * frames_, frames_};
  }
  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  // Frame metadata carried from analysis.
  std::size_t shift = 0;
  std::size_t frame_size = 0;
  int sample_rate = 0;
  std::size_t signal_length = 0;

  bool same_shape(const Spectrogram& other) const {
    return bins_ == other.bins_ && frames_ == other.frames_;
  }

 private:
  std::size_t bins_ = 0;
  std::size_t frames_ = 0;
  std::vector<Complex> data_;
};

// Number of frames for a signal of 'length' samples after zero-padding the
// tail to a whole frame.
std::size_t frame_count(std::size_t length, const StftConfig& cfg);

Spectrogram stft_analyze(const TimeSignal& signal, const StftConfig& cfg);
TimeSignal stft_synthesize(const Spectrogram& spec, const StftConfig& cfg);

std::vector<Spectrogram> stft_analyze_all(const MultichannelTimeSignal& signals,
                                          const StftConfig& cfg,
                                          std::size_t threads = 1);

// Mean of |x(f,n)|^2 over the grid.
double channel_power(const Spectrogram& spec);

}  // namespace wperef

#endif  // WPEREF_CORE_SIGNAL_HPP_
