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
#include "core/wpe.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace wperef {

void WpeConfig::validate() const {
  require(filter_length >= 1, "filter length must be at least 1");
  require(p > 0.0 && p <= 2.0, "sparsity parameter p must be in (0, 2]");
  require(epsilon > 0.0, "epsilon must be positive");
  require(base_delay >= 1, "base delay must be at least 1 frame");
  require(ridge >= 0.0, "ridge must be non-negative");
}

ComplexMatrix build_delayed_convolution(std::span<const Spectrogram> specs,
                                        std::span<const std::size_t> delays,
                                        std::size_t filter_length, std::size_t f) {
  require(!specs.empty(), "no input spectrograms");
  require(delays.size() == specs.size(), "delay row must have one entry per microphone");
  require(filter_length >= 1, "filter length must be at least 1");
  const std::size_t frames = specs.front().frames();
  std::size_t max_delay = 0;
  for (std::size_t m = 0; m < specs.size(); ++m) {
    require(specs[m].same_shape(specs.front()), "spectrogram shapes differ");
    require(delays[m] >= 1, "prediction delays must be at least one frame");
    max_delay = std::max(max_delay, delays[m]);
  }
  require(f < specs.front().bins(), "frequency bin out of range");
  if (frames <= filter_length + max_delay) {
    fail(ErrorCode::kUtteranceTooShort,
         "utterance too short: " + std::to_string(frames) + " frames for filter length " +
             std::to_string(filter_length) + " and delay " + std::to_string(max_delay));
  }

  const auto rows = static_cast<Eigen::Index>(frames);
  ComplexMatrix x_mat = ComplexMatrix::Zero(rows, static_cast<Eigen::Index>(specs.size() * filter_length));
  for (std::size_t m = 0; m < specs.size(); ++m) {
    const auto row = specs[m].row(f);
    for (std::size_t l = 0; l < filter_length; ++l) {
      const std::size_t lag = delays[m] + l;
      const auto col = static_cast<Eigen::Index>(m * filter_length + l);
      for (std::size_t n = lag; n < frames; ++n) {
        x_mat(static_cast<Eigen::Index>(n), col) = row[n - lag];
      }
    }
  }
  return x_mat;
}

namespace {

// Solves Y^H Y g = Y^H y for row-scaled Y, y. A zero column gets a unit
// diagonal so its tap stays at zero. Only when that Gram matrix is not
// numerically positive definite is ridge * diag(Y^H Y) added; a permanent
// ridge would shift the late, strongly reweighted iterations away from the
// true minimizer and break the descent of the smoothed cost.
ComplexVector solve_scaled(const ComplexMatrix& y_mat, const ComplexVector& y_vec,
                           double ridge) {
  const Eigen::Index cols = y_mat.cols();
  ComplexMatrix gram = ComplexMatrix::Zero(cols, cols);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(y_mat.adjoint());
  if (gram.diagonal().real().sum() == 0.0) return ComplexVector::Zero(cols);
  const Eigen::VectorXd diag = gram.diagonal().real();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (diag(j) == 0.0) gram(j, j) = 1.0;
  }
  const ComplexVector rhs = y_mat.adjoint() * y_vec;

  Eigen::LLT<ComplexMatrix, Eigen::Lower> llt(gram);
  ComplexVector g;
  if (llt.info() == Eigen::Success) g = llt.solve(rhs);
  if ((llt.info() != Eigen::Success || !g.allFinite()) && ridge > 0.0) {
    for (Eigen::Index j = 0; j < cols; ++j) gram(j, j) += ridge * diag(j);
    llt.compute(gram);
    if (llt.info() == Eigen::Success) g = llt.solve(rhs);
  }
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::kDegenerateSystem,
         "degenerate system: weighted Gram matrix is singular (silent channel or frequency?)");
  }
  if (!g.allFinite()) {
    fail(ErrorCode::kDegenerateSystem, "degenerate system: non-finite prediction filter");
  }
  return g;
}

}  // namespace

ComplexVector solve_weighted_ls(const ComplexMatrix& x_mat, const ComplexVector& x_ref,
                                const WeightVector& weights, double ridge) {
  require(x_mat.rows() == x_ref.size() && x_ref.size() == weights.size(),
          "weighted least squares dimension mismatch");
  require(ridge >= 0.0, "ridge must be non-negative");
  require((weights.array() > 0.0).all(), "weights must be positive");
  const Eigen::VectorXd scale = weights.array().rsqrt();
  const ComplexMatrix y_mat = scale.asDiagonal() * x_mat;
  const ComplexVector y_vec = scale.asDiagonal() * x_ref;
  return solve_scaled(y_mat, y_vec, ridge);
}

WeightVector update_weights(const ComplexVector& d_hat, double p, double epsilon) {
  require(p > 0.0 && p <= 2.0, "sparsity parameter p must be in (0, 2]");
  require(epsilon > 0.0, "epsilon must be positive");
  const double exponent = 2.0 - p;
  WeightVector w(d_hat.size());
  for (Eigen::Index n = 0; n < d_hat.size(); ++n) {
    w(n) = (exponent == 0.0 ? 1.0 : std::pow(std::abs(d_hat(n)), exponent)) + epsilon;
  }
  return w;
}

namespace {

double row_lp(std::span<const Complex> row, double p) {
  double s = 0.0;
  for (const Complex& v : row) s += std::pow(std::abs(v), p);
  return s;
}

double smoothing_floor(double p, double epsilon) {
  return p < 2.0 ? std::pow(epsilon, 2.0 / (2.0 - p)) : 0.0;
}

double row_smoothed(std::span<const Complex> row, double p, double floor) {
  double s = 0.0;
  for (const Complex& v : row) s += std::pow(std::norm(v) + floor, 0.5 * p);
  return s;
}

}  // namespace

double lp_cost(const Spectrogram& spec, double p) {
  double total = 0.0;
  for (std::size_t f = 0; f < spec.bins(); ++f) total += row_lp(spec.row(f), p);
  return total;
}

double weight_floor(const Spectrogram& reference, const WpeConfig& cfg) {
  const double power = channel_power(reference);
  if (!(power > 0.0)) return cfg.epsilon;
  return cfg.epsilon * std::pow(power, 0.5 * (2.0 - cfg.p));
}

double smoothed_lp_cost(const Spectrogram& spec, double p, double epsilon) {
  const double floor = smoothing_floor(p, epsilon);
  double total = 0.0;
  for (std::size_t f = 0; f < spec.bins(); ++f) total += row_smoothed(spec.row(f), p, floor);
  return total;
}

WpeResult run_wpe(std::span<const Spectrogram> specs, std::size_t reference,
                  const PredictionDelayMatrix& delays, const WpeConfig& cfg,
                  std::optional<std::size_t> iterations) {
  return run_wpe(specs, reference, delays, cfg, WpeRunOptions{iterations, {}});
}

WpeResult run_wpe(std::span<const Spectrogram> specs, std::size_t reference,
                  const PredictionDelayMatrix& delays, const WpeConfig& cfg,
                  const WpeRunOptions& options) {
  cfg.validate();
  require(!specs.empty(), "no input spectrograms");
  require(reference < specs.size(), "reference index out of range");
  require(delays.size() == specs.size(), "delay matrix size does not match channel count");
  for (const auto& s : specs) {
    require(s.same_shape(specs.front()), "spectrogram shapes differ");
  }
  const std::size_t iters = options.iterations.value_or(cfg.iterations);
  require(iters <= cfg.iterations, "iteration override exceeds configured iterations");

  const Spectrogram& x_ref_spec = specs[reference];
  const std::size_t bins = x_ref_spec.bins();
  const std::size_t frames = x_ref_spec.frames();
  const std::size_t taps = specs.size() * cfg.filter_length;
  const std::set<std::size_t> snapshot_at(options.snapshot_iterations.begin(),
                                          options.snapshot_iterations.end());
  for (std::size_t i : snapshot_at) {
    require(i <= iters, "snapshot iteration beyond iteration count");
  }

  WpeResult result;
  result.output = x_ref_spec;
  result.iterations_run = iters;
  result.filters.channels = specs.size();
  result.filters.filter_length = cfg.filter_length;
  result.filters.per_bin.assign(bins, ComplexVector::Zero(static_cast<Eigen::Index>(taps)));
  for (std::size_t i : snapshot_at) result.snapshots.emplace(i, x_ref_spec);

  // cost[i * bins + f], reduced in bin order afterwards so the totals do not
  // depend on the parallel schedule.
  std::vector<double> cost((iters + 1) * bins), smoothed((iters + 1) * bins);
  const double eps = weight_floor(x_ref_spec, cfg);
  const double floor = smoothing_floor(cfg.p, eps);
  const auto delay_row = delays.for_reference(reference);
  if (iters > 0) {
    // Validates the utterance length once, before spawning workers.
    (void)build_delayed_convolution(specs, delay_row, cfg.filter_length, 0);
  }

  parallel_for(bins, cfg.threads, [&](std::size_t f) {
    const auto ref_row = x_ref_spec.row(f);
    const ComplexVector x_ref =
        Eigen::Map<const ComplexVector>(ref_row.data(), static_cast<Eigen::Index>(frames));
    ComplexVector d = x_ref;
    auto record = [&](std::size_t i) {
      std::span<const Complex> row(d.data(), frames);
      cost[i * bins + f] = row_lp(row, cfg.p);
      smoothed[i * bins + f] = row_smoothed(row, cfg.p, floor);
      if (auto it = result.snapshots.find(i); it != result.snapshots.end()) {
        std::copy(d.data(), d.data() + frames, it->second.row(f).begin());
      }
    };
    record(0);
    if (iters == 0) return;

    const ComplexMatrix x_mat =
        build_delayed_convolution(specs, delay_row, cfg.filter_length, f);
    WeightVector w = update_weights(d, cfg.p, eps);
    ComplexVector g;
    for (std::size_t i = 1; i <= iters; ++i) {
      const Eigen::VectorXd scale = w.array().rsqrt();
      g = solve_scaled(scale.asDiagonal() * x_mat, scale.asDiagonal() * x_ref, cfg.ridge);
      d = x_ref - x_mat * g;
      w = update_weights(d, cfg.p, eps);
      record(i);
    }
    result.filters.per_bin[f] = g;
    std::copy(d.data(), d.data() + frames, result.output.row(f).begin());
  });

  result.cost_trace.assign(iters + 1, 0.0);
  result.smoothed_cost_trace.assign(iters + 1, 0.0);
  for (std::size_t i = 0; i <= iters; ++i) {
    for (std::size_t f = 0; f < bins; ++f) {
      result.cost_trace[i] += cost[i * bins + f];
      result.smoothed_cost_trace[i] += smoothed[i * bins + f];
    }
  }
  return result;
}

}  // namespace wperef
