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
#include "core/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace wperef {
namespace {

constexpr double kSilentRowFactor = 1e-12;

double row_lp_norm(std::span<const Complex> row, double p, ScoreForm form) {
  double s = 0.0;
  for (const Complex& v : row) s += std::pow(std::abs(v), p);
  return form == ScoreForm::kNorm ? std::pow(s, 1.0 / p) : s;
}

double row_l2(std::span<const Complex> row) {
  double s = 0.0;
  for (const Complex& v : row) s += std::norm(v);
  return std::sqrt(s);
}

}  // namespace

SelectionCriterion SelectionCriterion::resolved(std::size_t full_budget) const {
  SelectionCriterion c = *this;
  if (c.iterations == kFullBudget) c.iterations = uses_wpe() ? full_budget : 0;
  return c;
}

std::string SelectionCriterion::label() const {
  const std::string budget =
      iterations == kFullBudget ? std::string() : ":" + std::to_string(iterations);
  switch (kind) {
    case CriterionKind::kLpNorm: return "lp" + budget;
    case CriterionKind::kNormalizedLp: return "nlp" + budget;
    case CriterionKind::kMaxPower: return "maxpower";
    case CriterionKind::kMaxOracleElr: return "maxelr";
  }
  return "unknown";
}

SelectionCriterion SelectionCriterion::parse(std::string_view text) {
  SelectionCriterion c;
  if (text == "maxpower") {
    c.kind = CriterionKind::kMaxPower;
    c.iterations = 0;
    return c;
  }
  if (text == "maxelr") {
    c.kind = CriterionKind::kMaxOracleElr;
    c.iterations = 0;
    return c;
  }
  const auto colon = text.find(':');
  const auto head = text.substr(0, colon);
  if (head == "lp") {
    c.kind = CriterionKind::kLpNorm;
  } else if (head == "nlp") {
    c.kind = CriterionKind::kNormalizedLp;
  } else {
    fail(ErrorCode::kConfig, "unknown selection criterion '" + std::string(text) +
                                 "' (expected lp:I, nlp:I, maxpower or maxelr)");
  }
  if (colon == std::string_view::npos) {
    c.iterations = kFullBudget;
    return c;
  }
  const auto digits = text.substr(colon + 1);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
    fail(ErrorCode::kConfig, "bad iteration count in criterion '" + std::string(text) + "'");
  }
  c.iterations = value;
  return c;
}

double lp_score(const Spectrogram& output, double p, ScoreForm form) {
  require(p > 0.0 && p <= 2.0, "sparsity parameter p must be in (0, 2]");
  double total = 0.0;
  for (std::size_t f = 0; f < output.bins(); ++f) total += row_lp_norm(output.row(f), p, form);
  return total;
}

double normalized_lp_score(const Spectrogram& output, double p, ScoreForm form) {
  require(p > 0.0 && p <= 2.0, "sparsity parameter p must be in (0, 2]");
  const auto data = output.data();
  if (data.empty()) return 0.0;
  double energy = 0.0;
  for (const Complex& v : data) energy += std::norm(v);
  const double rms = std::sqrt(energy / static_cast<double>(data.size()));
  const double silent = kSilentRowFactor * rms;

  double total = 0.0;
  for (std::size_t f = 0; f < output.bins(); ++f) {
    const double l2 = row_l2(output.row(f));
    if (l2 <= silent) continue;
    const double lp = row_lp_norm(output.row(f), p, form);
    total += form == ScoreForm::kNorm ? lp / l2 : lp / std::pow(l2, p);
  }
  return total;
}

std::size_t pick_best(std::span<const double> scores, bool lower_is_better) {
  require(!scores.empty(), "no candidate scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const bool better = lower_is_better ? scores[i] < scores[best] : scores[i] > scores[best];
    if (better) best = i;
  }
  return best;
}

std::vector<WpeResult> run_all_candidates(std::span<const Spectrogram> specs,
                                          const PredictionDelayMatrix& delays,
                                          const WpeConfig& cfg,
                                          std::span<const std::size_t> snapshot_iterations,
                                          std::size_t candidate_threads) {
  std::vector<WpeResult> results(specs.size());
  WpeRunOptions options;
  options.snapshot_iterations.assign(snapshot_iterations.begin(), snapshot_iterations.end());
  parallel_for(specs.size(), candidate_threads, [&](std::size_t r) {
    results[r] = run_wpe(specs, r, delays, cfg, options);
  });
  return results;
}

namespace {

std::vector<double> baseline_scores(std::span<const Spectrogram> specs,
                                    const SelectionCriterion& criterion,
                                    const SelectionOptions& options) {
  std::vector<double> scores(specs.size());
  if (criterion.kind == CriterionKind::kMaxPower) {
    for (std::size_t r = 0; r < specs.size(); ++r) scores[r] = channel_power(specs[r]);
    return scores;
  }
  if (!options.oracle) {
    fail(ErrorCode::kMissingOracle, "maxelr selection needs a simulated room oracle");
  }
  require(options.oracle->num_mics() == specs.size(),
          "oracle microphone count does not match the signals");
  for (std::size_t r = 0; r < specs.size(); ++r) {
    scores[r] = elr_oracle(*options.oracle, r, options.early_ms);
  }
  return scores;
}

double norm_score(const Spectrogram& output, const SelectionCriterion& criterion, double p,
                  ScoreForm form) {
  return criterion.kind == CriterionKind::kLpNorm ? lp_score(output, p, form)
                                                  : normalized_lp_score(output, p, form);
}

}  // namespace

SelectionResult select_reference(std::span<const Spectrogram> specs,
                                 const SelectionCriterion& criterion,
                                 const PredictionDelayMatrix& delays, const WpeConfig& cfg,
                                 const SelectionOptions& options) {
  require(!specs.empty(), "no input spectrograms");
  for (const auto& s : specs) require(s.same_shape(specs.front()), "spectrogram shapes differ");

  SelectionResult result;
  if (!criterion.uses_wpe()) {
    result.scores = baseline_scores(specs, criterion, options);
    result.chosen = pick_best(result.scores, criterion.lower_is_better());
    return result;
  }

  cfg.validate();
  const SelectionCriterion resolved = criterion.resolved(cfg.iterations);
  require(resolved.iterations <= cfg.iterations,
          "criterion iteration budget exceeds configured WPE iterations");
  result.scores.resize(specs.size());
  std::vector<WpeResult> outputs(specs.size());
  parallel_for(specs.size(), options.candidate_threads, [&](std::size_t r) {
    outputs[r] = run_wpe(specs, r, delays, cfg, resolved.iterations);
    result.scores[r] = norm_score(outputs[r].output, criterion, cfg.p, options.form);
  });
  for (std::size_t r = 0; r < specs.size(); ++r) {
    result.per_candidate_outputs.emplace(r, std::move(outputs[r]));
  }
  result.chosen = pick_best(result.scores, true);
  return result;
}

SelectionResult select_from_candidates(std::span<const WpeResult> candidates,
                                       std::span<const Spectrogram> specs,
                                       const SelectionCriterion& criterion, double p,
                                       const SelectionOptions& options) {
  require(candidates.size() == specs.size(), "one WPE result per candidate is required");
  SelectionResult result;
  if (!criterion.uses_wpe()) {
    result.scores = baseline_scores(specs, criterion, options);
    result.chosen = pick_best(result.scores, criterion.lower_is_better());
    return result;
  }
  require(criterion.iterations != SelectionCriterion::kFullBudget,
          "criterion must be resolved against the WPE budget before scoring candidates");
  result.scores.resize(candidates.size());
  for (std::size_t r = 0; r < candidates.size(); ++r) {
    const WpeResult& c = candidates[r];
    const Spectrogram* out = nullptr;
    if (criterion.iterations == 0) {
      out = &specs[r];
    } else if (auto it = c.snapshots.find(criterion.iterations); it != c.snapshots.end()) {
      out = &it->second;
    } else if (criterion.iterations == c.iterations_run) {
      out = &c.output;
    } else {
      fail(ErrorCode::kInvalidArgument, "no WPE snapshot for criterion " + criterion.label());
    }
    result.scores[r] = norm_score(*out, criterion, p, options.form);
  }
  result.chosen = pick_best(result.scores, true);
  return result;
}

}  // namespace wperef
