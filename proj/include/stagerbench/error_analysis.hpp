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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stagerbench/error.hpp"
#include "stagerbench/stages.hpp"

namespace stagerbench::error_analysis {

// Where do stagers go wrong? This module separates epochs every stager
// misses from epochs only some miss, locates errors relative to the
// reference's stage transitions, and summarizes the local stage patterns
// around them.

struct SingleStager final : Error {
  using Error::Error;
};
struct IndexOutOfRange final : Error {
  using Error::Error;
};

// Position of an epoch relative to the reference's stage transitions.
//  - kRapid: an interior epoch whose stage differs from both neighbors.
//  - kDistance: signed epoch count to the nearest transition, negative when
//    the transition lies ahead, positive when it lies behind; magnitude >= 1.
//    Exact ties break toward the upcoming transition (negative).
//  - kNoTransition: the reference has no transition at all.
struct TransitionDistance {
  enum class Kind { kRapid, kDistance, kNoTransition };
  Kind kind = Kind::kNoTransition;
  int value = 0;  // meaningful only for kDistance
};

TransitionDistance transition_distance(const Hypnogram& truth,
                                       std::size_t epoch);

// (previous, self, next) stages around an epoch; at the ends the missing
// neighbor is the epoch's own stage.
using StagePattern = std::array<SleepStage, 3>;

StagePattern transition_pattern(const Hypnogram& truth, std::size_t epoch);

struct ErrorRecord {
  std::size_t epoch = 0;
  SleepStage truth_stage = SleepStage::kWake;
  std::vector<SleepStage> predictions;  // one per stager
  bool is_common = false;               // every stager wrong
};

struct StagerErrorShare {
  std::string name;
  std::uint64_t total_errors = 0;
  std::uint64_t common_errors = 0;
  double common_fraction = 0.0;  // of this stager's errors
  double other_fraction = 0.0;
};

struct ErrorClassification {
  std::vector<std::string> stager_names;
  std::vector<ErrorRecord> records;  // epochs with at least one error
  std::vector<StagerErrorShare> per_stager;
};

// Requires at least two stagers (common vs. other is meaningless for one)
// and equal lengths everywhere.
ErrorClassification classify_errors(std::span<const Hypnogram> predictions,
                                    std::span<const std::string> names,
                                    const Hypnogram& truth);

// Per stager: how that stager's errors distribute over the reference stage,
// normalized to sum 1 (all zero when the stager made no errors).
std::vector<std::array<double, kStageCount>> error_stage_distribution(
    const ErrorClassification& classification);

// Same distribution over the epochs every stager got wrong.
std::array<double, kStageCount> common_error_stage_distribution(
    const ErrorClassification& classification);

// Distances bucketed as: rapid epochs; -4..-1 before a transition; +1..+4
// after one; everything farther (or with no transition) under beyond.
struct DistanceHistogram {
  std::uint64_t rapid = 0;
  std::array<std::uint64_t, 4> before{};  // before[k]: distance -(k+1)
  std::array<std::uint64_t, 4> after{};   // after[k]: distance +(k+1)
  std::uint64_t beyond = 0;

  std::uint64_t total() const;
};

// Histogram of transition distances for the given epochs of the reference.
// Epoch indices must be in range.
DistanceHistogram distance_histogram(const Hypnogram& truth,
                                     std::span<const std::size_t> epochs);

// Counts of (prev, self, next) reference patterns over the given epochs.
std::map<StagePattern, std::uint64_t> pattern_counts(
    const Hypnogram& truth, std::span<const std::size_t> epochs);

}  // namespace stagerbench::error_analysis
