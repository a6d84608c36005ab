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
#ifndef WPEREF_CORE_DELAY_HPP_
#define WPEREF_CORE_DELAY_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/signal.hpp"

namespace wperef {

struct GccPhatResult {
  int lag = 0;            // arrival(a) - arrival(b), samples
  double peak = 0.0;      // PHAT correlation peak; 1.0 for identical inputs
  bool low_confidence = false;
};

// Peaks below this fraction of the PHAT autocorrelation peak are flagged.
inline constexpr double kGccPhatConfidenceFloor = 0.3;

// Integer-lag GCC-PHAT over lags in [-max_lag, max_lag]. A negative lag means
// 'a' hears the source earlier than 'b'.
GccPhatResult gcc_phat(const TimeSignal& a, const TimeSignal& b, std::size_t max_lag);

// Entry (m, r) is the arrival-time difference at m minus at r, in samples.
struct TdoaMatrix {
  Eigen::MatrixXd delta;
  std::size_t search_radius = 0;

  std::size_t size() const { return static_cast<std::size_t>(delta.rows()); }
};

TdoaMatrix estimate_tdoa_matrix(const MultichannelTimeSignal& signals,
                                std::size_t max_lag, std::size_t threads = 1);

// M x M real matrix in samples, comma-separated rows.
TdoaMatrix read_tdoa_csv(const std::string& path);

// tau(m, r): frame delay applied to microphone m when predicting reference r.
class PredictionDelayMatrix {
 public:
  PredictionDelayMatrix() = default;
  PredictionDelayMatrix(std::size_t mics, std::size_t base_delay);

  static PredictionDelayMatrix uniform(std::size_t mics, std::size_t base_delay) {
    return PredictionDelayMatrix(mics, base_delay);
  }

  std::size_t size() const { return mics_; }
  std::size_t base_delay() const { return base_delay_; }
  std::size_t at(std::size_t m, std::size_t r) const { return tau_[m * mics_ + r]; }
  void set(std::size_t m, std::size_t r, std::size_t value);

  // tau(., r) for every microphone, in microphone order.
  std::vector<std::size_t> for_reference(std::size_t r) const;

  bool operator==(const PredictionDelayMatrix&) const = default;

 private:
  std::size_t mics_ = 0;
  std::size_t base_delay_ = 0;
  std::vector<std::size_t> tau_;
};

// tau(m, r) = max(1, base_delay - round(delta(m, r) / shift)); diagonal is
// base_delay. Microphones hearing the source earlier get longer delays.
PredictionDelayMatrix compute_prediction_delays(const TdoaMatrix& tdoa,
                                                std::size_t base_delay,
                                                std::size_t shift);

}  // namespace wperef

#endif  // WPEREF_CORE_DELAY_HPP_
