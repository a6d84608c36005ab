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

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace wperef::testing {

std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

TimeSignal make_signal(std::vector<double> samples, int sample_rate) {
  TimeSignal s;
  s.samples = std::move(samples);
  s.sample_rate = sample_rate;
  return s;
}

Spectrogram random_spectrogram(std::size_t bins, std::size_t frames, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Spectrogram s(bins, frames);
  for (auto& v : s.data()) v = {dist(rng), dist(rng)};
  return s;
}

Eigen::MatrixXcd random_complex(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = {dist(rng), dist(rng)};
  }
  return m;
}

std::vector<std::complex<double>> direct_dft(std::span<const double> frame) {
  const std::size_t n = frame.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc;
    for (std::size_t t = 0; t < n; ++t) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) /
                           static_cast<double>(n);
      acc += frame[t] * std::polar(1.0, phase);
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> brute_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

long brute_xcorr_lag(std::span<const double> a, std::span<const double> b, long max_lag) {
  const long n = static_cast<long>(a.size());
  long best = 0;
  double best_value = -1e300;
  for (long k = -max_lag; k <= max_lag; ++k) {
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
      const long j = i + k;
      if (j >= 0 && j < n) acc += a[static_cast<std::size_t>(j)] * b[static_cast<std::size_t>(i)];
    }
    if (acc > best_value) {
      best_value = acc;
      best = k;
    }
  }
  return best;
}

Eigen::VectorXcd weighted_pinv_solve(const Eigen::MatrixXcd& x, const Eigen::VectorXcd& y,
                                     const Eigen::VectorXd& w) {
  const Eigen::VectorXd s = w.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXcd xs = s.asDiagonal() * x;
  const Eigen::VectorXcd ys = s.asDiagonal() * y;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(xs);
  return cod.pseudoInverse() * ys;
}

double schroeder_t60(std::span<const double> taps, int sample_rate) {
  std::vector<double> edc(taps.size());
  double acc = 0.0;
  for (std::size_t i = taps.size(); i-- > 0;) {
    acc += taps[i] * taps[i];
    edc[i] = acc;
  }
  const double total = edc.front();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    const double db = 10.0 * std::log10(edc[i] / total);
    if (db > -5.0) continue;
    if (db < -35.0) break;
    const double t = static_cast<double>(i) / sample_rate;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  const double n = static_cast<double>(count);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -60.0 / slope;
}

namespace {

struct FrameGrid {
  std::size_t length, hop, count;
};

FrameGrid grid_for(std::size_t n, int fs) {
  const auto length = static_cast<std::size_t>(std::lround(0.025 * fs));
  const auto hop = static_cast<std::size_t>(std::lround(0.010 * fs));
  return {length, hop, n >= length ? 1 + (n - length) / hop : 0};
}

double clamped_db(double signal, double error) {
  if (error == 0.0) return 35.0;
  return std::clamp(10.0 * std::log10(signal / std::max(error, 1e-12)), -10.0, 35.0);
}

double mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

}  // namespace

double reference_fwssnr(std::span<const double> estimate, std::span<const double> target,
                        int fs) {
  const std::size_t n = std::min(estimate.size(), target.size());
  const FrameGrid g = grid_for(n, fs);
  std::size_t nfft = 1;
  while (nfft < g.length) nfft *= 2;
  const double lo = mel(125.0), hi = mel(fs / 2.0);

  std::vector<double> energy(g.count), score(g.count);
  for (std::size_t i = 0; i < g.count; ++i) {
    std::vector<double> tf(nfft, 0.0), ef(nfft, 0.0);
    for (std::size_t t = 0; t < g.length; ++t) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * t / g.length);
      tf[t] = target[i * g.hop + t] * w;
      ef[t] = estimate[i * g.hop + t] * w;
      energy[i] += tf[t] * tf[t];
    }
    const auto ts = direct_dft(tf);
    const auto es = direct_dft(ef);
    std::vector<double> tb(23, 0.0), eb(23, 0.0);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double hz = static_cast<double>(k) * fs / nfft;
      if (hz < 125.0) continue;
      // Position on the mel axis decides the band; Nyquist joins the top band.
      const double pos = std::max(0.0, (mel(hz) - lo) / (hi - lo) * 23.0);
      const auto b = std::min<std::size_t>(22, static_cast<std::size_t>(pos));
      const double diff = std::abs(ts[k]) - std::abs(es[k]);
      tb[b] += std::norm(ts[k]);
      eb[b] += diff * diff;
    }
    double num = 0.0, den = 0.0;
    for (int b = 0; b < 23; ++b) {
      const double w = std::pow(tb[b], 0.2);
      num += w * clamped_db(tb[b], eb[b]);
      den += w;
    }
    score[i] = num / den;
  }
  const double peak = *std::max_element(energy.begin(), energy.end());
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < g.count; ++i) {
    if (energy[i] > peak * 1e-4) {
      sum += score[i];
      ++used;
    }
  }
  return sum / used;
}

double reference_segsnr(std::span<const double> estimate, std::span<const double> target,
                        int fs) {
  const std::size_t n = std::min(estimate.size(), target.size());
  const FrameGrid g = grid_for(n, fs);
  std::vector<double> energy(g.count), score(g.count);
  for (std::size_t i = 0; i < g.count; ++i) {
    double err = 0.0;
    for (std::size_t t = i * g.hop; t < i * g.hop + g.length; ++t) {
      energy[i] += target[t] * target[t];
      err += (target[t] - estimate[t]) * (target[t] - estimate[t]);
    }
    score[i] = clamped_db(energy[i], err);
  }
  const double peak = *std::max_element(energy.begin(), energy.end());
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < g.count; ++i) {
    if (energy[i] > peak * 1e-4) {
      sum += score[i];
      ++used;
    }
  }
  return sum / used;
}

double relative_l2(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace wperef::testing
