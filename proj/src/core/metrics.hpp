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
#ifndef WPEREF_CORE_METRICS_HPP_
#define WPEREF_CORE_METRICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "core/selection.hpp"
#include "core/signal.hpp"

namespace wperef {

inline constexpr double kSnrFloorDb = -10.0;
inline constexpr double kSnrCeilingDb = 35.0;
inline constexpr double kActiveFrameRangeDb = 40.0;
inline constexpr int kFwssnrBands = 23;
inline constexpr double kFwssnrLowHz = 125.0;
inline constexpr double kFwssnrWeightExponent = 0.2;

// Frequency-weighted segmental SNR in dB. 25 ms Hann frames with a 10 ms hop,
// 23 mel-spaced bands from 125 Hz to Nyquist. Band SNR compares the target
// band energy with the energy of the magnitude-spectrum difference, clamped
// to [-10, 35] dB and weighted by target band energy^0.2. Only frames within
// 40 dB of the loudest target frame are averaged. The longer input is
// truncated to the shorter one.
double fwssnr(const TimeSignal& estimate, const TimeSignal& target);

// Segmental SNR in dB over the same rectangular frames and activity rule,
// using the time-domain error.
double segsnr(const TimeSignal& estimate, const TimeSignal& target);

// score(chosen) - mean(scores)
double relative_improvement(std::span<const double> per_mic_scores, std::size_t chosen);

// Drops the first 'offset' samples and keeps at most 'length' samples.
TimeSignal align_for_scoring(const TimeSignal& signal, std::size_t offset, std::size_t length);

struct MetricReport {
  double fwssnr = 0.0;
  double segsnr = 0.0;
  std::vector<double> per_mic_fwssnr;
  double delta_fwssnr = 0.0;
  SelectionCriterion criterion;
  std::size_t chosen = 0;
};

}  // namespace wperef

#endif  // WPEREF_CORE_METRICS_HPP_
