/* Copyright 2026 The stagerbench authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stagerbench/error.hpp"
#include "stagerbench/stages.hpp"

namespace stagerbench::metrics {

// Epoch-level agreement and uncertainty scoring for staging systems:
// confusion matrices, accuracy, Cohen's kappa, macro F1, macro one-vs-rest
// sensitivity and specificity, negative log-likelihood and Brier score,
// McNemar's test for paired systems, pairwise kappa matrices and metrics
// stratified by age or apnea severity.

// Chance agreement is 1, so kappa's denominator vanishes while observed
// agreement does not.
struct DegenerateKappa final : Error {
  using Error::Error;
};

struct ConfusionMatrix {
  // counts[truth * kStageCount + predicted]
  std::array<std::uint64_t, kStageCount * kStageCount> counts{};

  std::uint64_t& at(std::size_t truth, std::size_t pred) {
    return counts[truth * kStageCount + pred];
  }
  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts[truth * kStageCount + pred];
  }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t pred) const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

ConfusionMatrix confusion(const Hypnogram& pred, const Hypnogram& truth);

// Macro averages run over the classes present in truth or prediction;
// kScoreZero instead averages over all five classes, scoring absent ones 0.
enum class AbsentClassPolicy {
  kExcludeAbsent,
  kScoreZeroAbsent,
};

struct MetricReport {
  double accuracy = 0.0;
  double kappa = 0.0;
  double mf1 = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  std::array<double, kStageCount> class_f1{};
  std::array<bool, kStageCount> class_present{};
  // NaN unless probabilities were supplied.
  double nll = 0.0;
  double brier = 0.0;
  bool has_probs = false;
};

double accuracy(const ConfusionMatrix& cm);

// (p_o - p_e) / (1 - p_e). Perfect agreement with degenerate marginals
// (p_o = p_e = 1) returns 1; degenerate marginals with disagreement raise
// DegenerateKappa.
double cohen_kappa(const ConfusionMatrix& cm);

// Mean of -log(p[truth]) with probabilities floored at 1e-12.
double nll(const ProbSeq& probs, const Hypnogram& truth);

// Mean of (1 / C) * sum_c (onehot_c - p_c)^2.
double brier(const ProbSeq& probs, const Hypnogram& truth);

MetricReport overall_metrics(
    const ConfusionMatrix& cm, const ProbSeq* probs = nullptr,
    const Hypnogram* truth = nullptr,
    AbsentClassPolicy policy = AbsentClassPolicy::kExcludeAbsent);

// Same report built from pre-pooled loss sums, for stratified pooling.
MetricReport pooled_report(const ConfusionMatrix& cm, AbsentClassPolicy policy,
                           double nll_sum, double brier_sum,
                           std::uint64_t prob_epochs, bool has_probs);

struct McNemarResult {
  std::uint64_t only_a_correct = 0;  // epochs a got right and b got wrong
  std::uint64_t only_b_correct = 0;
  double statistic = 0.0;  // continuity-corrected chi-squared, 1 dof
  double p_value = 1.0;
  bool exact = false;  // p from the exact binomial instead of chi-squared
};

// Paired comparison of two systems against the same reference. The default
// p-value uses the continuity-corrected chi-squared statistic
// (|b - c| - 1)^2 / (b + c); zero discordant epochs give statistic 0 and
// p = 1. When exact_threshold is set and the discordant count is positive
// and below it, the p-value comes from the exact two-sided binomial test
// instead (the statistic field still reports the chi-squared value).
McNemarResult mcnemar(const Hypnogram& a, const Hypnogram& b,
                      const Hypnogram& truth,
                      std::optional<std::uint64_t> exact_threshold =
                          std::nullopt);

// Cohen's kappa between two label sequences of equal length.
double kappa_between(const Hypnogram& a, const Hypnogram& b);

// Symmetric (S+1) x (S+1) kappa matrix over the given systems plus the
// reference in the last row/column. The diagonal is exactly 1.
std::vector<std::vector<double>> pairwise_kappa(
    std::span<const Hypnogram> systems, const Hypnogram& truth);

// Per-recording accumulator for stratified pooling: confusion plus summed
// (not averaged) losses, so strata pool exactly.
struct RecordingEval {
  std::string id;
  double age_years = 0.0;
  std::optional<double> ahi;
  ConfusionMatrix cm;
  double nll_sum = 0.0;
  double brier_sum = 0.0;
  std::uint64_t prob_epochs = 0;
  bool has_probs = false;
};

struct StratumMetrics {
  std::string label;
  std::size_t recording_count = 0;
  std::uint64_t epoch_count = 0;
  MetricReport report;
};

// Pools recordings into [edges[i], edges[i+1]) age bins; edges must be
// strictly ascending. Recordings outside every bin are dropped; empty strata
// are omitted.
std::vector<StratumMetrics> stratify_by_age(
    std::span<const RecordingEval> recordings, std::span<const double> edges,
    AbsentClassPolicy policy = AbsentClassPolicy::kExcludeAbsent);

// Pools recordings by apnea severity class, including unknown.
std::vector<StratumMetrics> stratify_by_severity(
    std::span<const RecordingEval> recordings,
    AbsentClassPolicy policy = AbsentClassPolicy::kExcludeAbsent);

}  // namespace stagerbench::metrics
