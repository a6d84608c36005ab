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
#ifndef WPEREF_CORE_SELECTION_HPP_
#define WPEREF_CORE_SELECTION_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/delay.hpp"
#include "core/room.hpp"
#include "core/signal.hpp"
#include "core/wpe.hpp"

namespace wperef {

enum class CriterionKind { kLpNorm, kNormalizedLp, kMaxPower, kMaxOracleElr };

// Whether per-frequency scores enter the broadband sum as norms or as p-th
// powers of the norms.
enum class ScoreForm { kNorm, kPowered };

struct SelectionCriterion {
  // Stands for "the configured WPE iteration count".
  static constexpr std::size_t kFullBudget = static_cast<std::size_t>(-1);

  CriterionKind kind = CriterionKind::kNormalizedLp;
  std::size_t iterations = kFullBudget;  // WPE budget, norm-based kinds only

  bool uses_wpe() const {
    return kind == CriterionKind::kLpNorm || kind == CriterionKind::kNormalizedLp;
  }
  bool lower_is_better() const { return uses_wpe(); }

  // Replaces kFullBudget with the configured count.
  SelectionCriterion resolved(std::size_t full_budget) const;

  // "lp:10", "nlp:1", "nlp" (full budget), "maxpower", "maxelr"
  std::string label() const;
  static SelectionCriterion parse(std::string_view text);

  bool operator==(const SelectionCriterion&) const = default;
};

struct SelectionResult {
  std::size_t chosen = 0;
  // One score per candidate; direction given by the criterion.
  std::vector<double> scores;
  std::map<std::size_t, WpeResult> per_candidate_outputs;
};

// sum_f ||d(f)||_p  (or ||d(f)||_p^p with ScoreForm::kPowered)
double lp_score(const Spectrogram& output, double p, ScoreForm form = ScoreForm::kNorm);

// sum_f ||d(f)||_p / ||d(f)||_2. Rows whose l2 norm is at most 1e-12 times the
// grid RMS contribute zero.
double normalized_lp_score(const Spectrogram& output, double p,
                           ScoreForm form = ScoreForm::kNorm);

// Index of the best score; ties go to the lowest index.
std::size_t pick_best(std::span<const double> scores, bool lower_is_better);

struct SelectionOptions {
  const RoomScene* oracle = nullptr;  // required for kMaxOracleElr
  double early_ms = kDefaultEarlyMs;
  ScoreForm form = ScoreForm::kNorm;
  std::size_t candidate_threads = 1;
};

SelectionResult select_reference(std::span<const Spectrogram> specs,
                                 const SelectionCriterion& criterion,
                                 const PredictionDelayMatrix& delays, const WpeConfig& cfg,
                                 const SelectionOptions& options = {});

// Runs WPE once per candidate reference with snapshots at the requested
// iteration counts, so several criteria can share the work.
std::vector<WpeResult> run_all_candidates(std::span<const Spectrogram> specs,
                                          const PredictionDelayMatrix& delays,
                                          const WpeConfig& cfg,
                                          std::span<const std::size_t> snapshot_iterations,
                                          std::size_t candidate_threads = 1);

// Scores precomputed candidates. Norm criteria read the snapshot at
// criterion.iterations (iteration 0 is the raw microphone spectrogram).
SelectionResult select_from_candidates(std::span<const WpeResult> candidates,
                                       std::span<const Spectrogram> specs,
                                       const SelectionCriterion& criterion, double p,
                                       const SelectionOptions& options = {});

}  // namespace wperef

#endif  // WPEREF_CORE_SELECTION_HPP_
