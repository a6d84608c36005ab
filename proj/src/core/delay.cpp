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
#include "core/delay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/fft.hpp"
#include "core/parallel.hpp"

namespace wperef {
namespace {

constexpr double kSilenceEnergy = 1e-12;
constexpr double kPhatFloor = 1e-12;

double energy(const TimeSignal& s) {
  double e = 0.0;
  for (double v : s.samples) e += v * v;
  return e;
}

}  // namespace

GccPhatResult gcc_phat(const TimeSignal& a, const TimeSignal& b, std::size_t max_lag) {
  require(a.size() == b.size(), "gcc_phat inputs must have equal length");
  require(a.size() >= 4 * max_lag && !a.samples.empty(),
          "gcc_phat inputs must be at least 4 * max_lag samples");
  if (energy(a) < kSilenceEnergy || energy(b) < kSilenceEnergy) {
    fail(ErrorCode::kSilentChannel, "silent channel in gcc_phat");
  }

  // Zero-padding to twice the length keeps the correlation linear.
  const std::size_t n = next_pow2(2 * a.size());
  RealFft fft(n);
  std::vector<Complex> fa(fft.bins()), fb(fft.bins());
  fft.forward(a.samples, fa);
  fft.forward(b.samples, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) {
    const Complex cross = fa[k] * std::conj(fb[k]);
    fa[k] = cross / std::max(std::abs(cross), kPhatFloor);
  }
  std::vector<double> corr(n);
  fft.inverse(fa, corr);

  // corr[l] = sum_t a(t + l) b(t); negative lags wrap to the end.
  GccPhatResult best;
  double best_value = -INFINITY;
  const long radius = static_cast<long>(max_lag);
  for (long lag = -radius; lag <= radius; ++lag) {
    const std::size_t idx = lag >= 0 ? static_cast<std::size_t>(lag)
                                     : n - static_cast<std::size_t>(-lag);
    if (corr[idx] > best_value) {
      best_value = corr[idx];
      best.lag = static_cast<int>(lag);
    }
  }
  best.peak = best_value / static_cast<double>(n);
  best.low_confidence = best.peak < kGccPhatConfidenceFloor;
  return best;
}

TdoaMatrix estimate_tdoa_matrix(const MultichannelTimeSignal& signals,
                                std::size_t max_lag, std::size_t threads) {
  signals.validate();
  const std::size_t m_count = signals.num_channels();
  require(m_count >= 2, "tdoa estimation needs at least two channels");
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(m_count, m_count);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t r = 0; r < m_count; ++r) {
      if (m != r) pairs.emplace_back(m, r);
    }
  }
  std::vector<int> lags(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    lags[i] = gcc_phat(signals.channels[pairs[i].first],
                       signals.channels[pairs[i].second], max_lag)
                  .lag;
  });
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    raw(pairs[i].first, pairs[i].second) = lags[i];
  }
  TdoaMatrix out;
  out.search_radius = max_lag;
  out.delta = 0.5 * (raw - raw.transpose());
  return out;
}

TdoaMatrix read_tdoa_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open tdoa csv: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[line.find_first_not_of(" \t")] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorCode::kConfig, "bad number '" + cell + "' in " + path);
      }
    }
    rows.push_back(std::move(row));
  }
  const std::size_t m = rows.size();
  if (m == 0) fail(ErrorCode::kConfig, "empty tdoa csv: " + path);
  TdoaMatrix out;
  out.delta.resize(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != m) fail(ErrorCode::kConfig, "tdoa csv must be square: " + path);
    for (std::size_t j = 0; j < m; ++j) out.delta(i, j) = rows[i][j];
  }
  return out;
}

PredictionDelayMatrix::PredictionDelayMatrix(std::size_t mics, std::size_t base_delay)
    : mics_(mics), base_delay_(base_delay), tau_(mics * mics, base_delay) {
  require(base_delay >= 1, "prediction delay must be at least one frame");
}

void PredictionDelayMatrix::set(std::size_t m, std::size_t r, std::size_t value) {
  require(m < mics_ && r < mics_, "delay index out of range");
  require(value >= 1, "prediction delay must be at least one frame");
  tau_[m * mics_ + r] = value;
}

std::vector<std::size_t> PredictionDelayMatrix::for_reference(std::size_t r) const {
  require(r < mics_, "reference index out of range");
  std::vector<std::size_t> row(mics_);
  for (std::size_t m = 0; m < mics_; ++m) row[m] = at(m, r);
  return row;
}

PredictionDelayMatrix compute_prediction_delays(const TdoaMatrix& tdoa,
                                                std::size_t base_delay,
                                                std::size_t shift) {
  require(base_delay >= 1, "base delay must be at least one frame");
  require(shift > 0, "frame shift must be positive");
  const std::size_t m_count = tdoa.size();
  PredictionDelayMatrix out(m_count, base_delay);
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t r = 0; r < m_count; ++r) {
      if (m == r) continue;
      const long frames = std::lround(tdoa.delta(m, r) / static_cast<double>(shift));
      const long tau = std::max(1L, static_cast<long>(base_delay) - frames);
      out.set(m, r, static_cast<std::size_t>(tau));
    }
  }
  return out;
}

}  // namespace wperef
