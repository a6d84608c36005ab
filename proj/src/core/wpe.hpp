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
#ifndef WPEREF_CORE_WPE_HPP_
#define WPEREF_CORE_WPE_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "core/delay.hpp"
#include "core/signal.hpp"

namespace wperef {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
// IRLS weights for one frequency; every entry >= epsilon.
using WeightVector = Eigen::VectorXd;

struct WpeConfig {
  std::size_t filter_length = 15;  // taps per microphone, frames
  std::size_t iterations = 10;     // IRLS reweighting iterations
  double p = 0.5;                  // sparsity exponent in (0, 2]
  double epsilon = 1e-7;           // weight floor, see weight_floor
  std::size_t base_delay = 2;      // prediction delay of the reference, frames
  double ridge = 1e-10;            // fallback, relative to each Gram diagonal entry
  std::size_t threads = 1;         // frequency-parallel workers, 0 = all cores

  void validate() const;
  bool operator==(const WpeConfig&) const = default;
};

// Per-frequency stacked filter, microphone-major: taps of mic 0, then mic 1...
struct PredictionFilter {
  std::size_t channels = 0;
  std::size_t filter_length = 0;
  std::vector<ComplexVector> per_bin;

  Complex tap(std::size_t f, std::size_t m, std::size_t l) const {
    return per_bin[f](static_cast<Eigen::Index>(m * filter_length + l));
  }
};

struct WpeResult {
  Spectrogram output;
  PredictionFilter filters;
  // Sum over f, n of |d(f,n)|^p after each iteration, starting at iteration 0.
  std::vector<double> cost_trace;
  // Same, with the epsilon-smoothed objective (see smoothed_lp_cost).
  std::vector<double> smoothed_cost_trace;
  std::size_t iterations_run = 0;
  // Outputs after the requested intermediate iteration counts.
  std::map<std::size_t, Spectrogram> snapshots;
};

// Row n, column m*L + l holds x_m(f, n - tau_m - l); indices before the first
// frame contribute zero.
ComplexMatrix build_delayed_convolution(std::span<const Spectrogram> specs,
                                        std::span<const std::size_t> delays,
                                        std::size_t filter_length, std::size_t f);

// argmin_g sum_n |x_r(n) - (X g)(n)|^2 / w(n), solved through the normal
// equations. If the Gram matrix G is not numerically positive definite,
// ridge * diag(G) is added and the solve retried. Scaling a column
// of X scales the matching tap inversely and leaves X g unchanged.
ComplexVector solve_weighted_ls(const ComplexMatrix& x_mat, const ComplexVector& x_ref,
                                const WeightVector& weights, double ridge);

// w(n) = |d(n)|^(2-p) + epsilon.
WeightVector update_weights(const ComplexVector& d_hat, double p, double epsilon);

struct WpeRunOptions {
  std::optional<std::size_t> iterations;     // defaults to cfg.iterations
  std::vector<std::size_t> snapshot_iterations;
};

WpeResult run_wpe(std::span<const Spectrogram> specs, std::size_t reference,
                  const PredictionDelayMatrix& delays, const WpeConfig& cfg,
                  std::optional<std::size_t> iterations = std::nullopt);
WpeResult run_wpe(std::span<const Spectrogram> specs, std::size_t reference,
                  const PredictionDelayMatrix& delays, const WpeConfig& cfg,
                  const WpeRunOptions& options);

// Weight floor used by run_wpe: epsilon * P^((2-p)/2), where P is the mean
// power of the reference spectrogram (epsilon itself when P is zero). The
// floor then tracks the level of the input, so scaling any channel by a
// constant scales the output by the same constant.
double weight_floor(const Spectrogram& reference, const WpeConfig& cfg);

// sum_{f,n} |d(f,n)|^p
double lp_cost(const Spectrogram& spec, double p);

// sum_{f,n} (|d(f,n)|^2 + e)^(p/2) with e = epsilon^(2/(2-p)), so that the
// IRLS weights are the matching majorizer weights at both |d| -> 0 and large
// |d|. With epsilon = weight_floor(x_r, cfg) this is the quantity run_wpe
// decreases.
double smoothed_lp_cost(const Spectrogram& spec, double p, double epsilon);

}  // namespace wperef

#endif  // WPEREF_CORE_WPE_HPP_
