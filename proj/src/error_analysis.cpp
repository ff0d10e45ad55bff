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

#include "stagerbench/error_analysis.hpp"

#include <cstdlib>

namespace stagerbench::error_analysis {
namespace {

void check_epoch(const Hypnogram& truth, std::size_t epoch) {
  if (epoch >= truth.length()) {
    throw IndexOutOfRange("epoch " + std::to_string(epoch) +
                          " out of range for " +
                          std::to_string(truth.length()) + " epochs");
  }
}

}  // namespace

TransitionDistance transition_distance(const Hypnogram& truth,
                                       std::size_t epoch) {
  check_epoch(truth, epoch);
  const std::size_t len = truth.length();

  if (epoch > 0 && epoch + 1 < len && truth[epoch - 1] != truth[epoch] &&
      truth[epoch] != truth[epoch + 1]) {
    return {TransitionDistance::Kind::kRapid, 0};
  }

  // Transition t sits between epochs t and t+1. Scan outward for the first
  // one ahead of and behind this epoch.
  int ahead = 0;  // distance to the next transition, 0 when none
  for (std::size_t j = epoch; j + 1 < len; ++j) {
    if (truth[j] != truth[j + 1]) {
      ahead = static_cast<int>(j - epoch) + 1;
      break;
    }
  }
  int behind = 0;
  for (std::size_t j = epoch; j > 0; --j) {
    if (truth[j - 1] != truth[j]) {
      behind = static_cast<int>(epoch - j) + 1;
      break;
    }
  }

  if (ahead == 0 && behind == 0) {
    return {TransitionDistance::Kind::kNoTransition, 0};
  }
  if (ahead != 0 && (behind == 0 || ahead <= behind)) {
    return {TransitionDistance::Kind::kDistance, -ahead};
  }
  return {TransitionDistance::Kind::kDistance, behind};
}

StagePattern transition_pattern(const Hypnogram& truth, std::size_t epoch) {
  check_epoch(truth, epoch);
  const SleepStage self = truth[epoch];
  const SleepStage prev = epoch > 0 ? truth[epoch - 1] : self;
  const SleepStage next = epoch + 1 < truth.length() ? truth[epoch + 1] : self;
  return {prev, self, next};
}

ErrorClassification classify_errors(std::span<const Hypnogram> predictions,
                                    std::span<const std::string> names,
                                    const Hypnogram& truth) {
  if (predictions.size() < 2) {
    throw SingleStager(
        "separating common from stager-specific errors needs at least two "
        "stagers, got " +
        std::to_string(predictions.size()));
  }
  if (names.size() != predictions.size()) {
    throw LengthMismatch("stager name count does not match prediction count");
  }
  for (const Hypnogram& pred : predictions) {
    if (pred.length() != truth.length()) {
      throw LengthMismatch("prediction length " +
                           std::to_string(pred.length()) +
                           " does not match reference length " +
                           std::to_string(truth.length()));
    }
  }

  ErrorClassification out;
  out.stager_names.assign(names.begin(), names.end());
  out.per_stager.resize(predictions.size());
  for (std::size_t m = 0; m < predictions.size(); ++m) {
    out.per_stager[m].name = names[m];
  }

  for (std::size_t e = 0; e < truth.length(); ++e) {
    std::size_t wrong = 0;
    for (const Hypnogram& pred : predictions) {
      if (pred[e] != truth[e]) ++wrong;
    }
    if (wrong == 0) continue;

    ErrorRecord record;
    record.epoch = e;
    record.truth_stage = truth[e];
    record.is_common = wrong == predictions.size();
    record.predictions.reserve(predictions.size());
    for (std::size_t m = 0; m < predictions.size(); ++m) {
      record.predictions.push_back(predictions[m][e]);
      if (predictions[m][e] != truth[e]) {
        ++out.per_stager[m].total_errors;
        if (record.is_common) ++out.per_stager[m].common_errors;
      }
    }
    out.records.push_back(std::move(record));
  }

  for (StagerErrorShare& share : out.per_stager) {
    if (share.total_errors > 0) {
      share.common_fraction = static_cast<double>(share.common_errors) /
                              static_cast<double>(share.total_errors);
      share.other_fraction = 1.0 - share.common_fraction;
    }
  }
  return out;
}

std::vector<std::array<double, kStageCount>> error_stage_distribution(
    const ErrorClassification& classification) {
  const std::size_t m_count = classification.stager_names.size();
  std::vector<std::array<std::uint64_t, kStageCount>> counts(
      m_count, std::array<std::uint64_t, kStageCount>{});
  for (const ErrorRecord& record : classification.records) {
    for (std::size_t m = 0; m < m_count; ++m) {
      if (record.predictions[m] != record.truth_stage) {
        ++counts[m][static_cast<std::size_t>(record.truth_stage)];
      }
    }
  }

  std::vector<std::array<double, kStageCount>> out(
      m_count, std::array<double, kStageCount>{});
  for (std::size_t m = 0; m < m_count; ++m) {
    std::uint64_t total = 0;
    for (std::uint64_t c : counts[m]) total += c;
    if (total == 0) continue;
    for (std::size_t s = 0; s < kStageCount; ++s) {
      out[m][s] =
          static_cast<double>(counts[m][s]) / static_cast<double>(total);
    }
  }
  return out;
}

std::array<double, kStageCount> common_error_stage_distribution(
    const ErrorClassification& classification) {
  std::array<std::uint64_t, kStageCount> counts{};
  std::uint64_t total = 0;
  for (const ErrorRecord& record : classification.records) {
    if (!record.is_common) continue;
    ++counts[static_cast<std::size_t>(record.truth_stage)];
    ++total;
  }
  std::array<double, kStageCount> out{};
  if (total == 0) return out;
  for (std::size_t s = 0; s < kStageCount; ++s) {
    out[s] = static_cast<double>(counts[s]) / static_cast<double>(total);
  }
  return out;
}

std::uint64_t DistanceHistogram::total() const {
  std::uint64_t t = rapid + beyond;
  for (std::uint64_t c : before) t += c;
  for (std::uint64_t c : after) t += c;
  return t;
}

DistanceHistogram distance_histogram(const Hypnogram& truth,
                                     std::span<const std::size_t> epochs) {
  DistanceHistogram hist;
  for (std::size_t epoch : epochs) {
    const TransitionDistance d = transition_distance(truth, epoch);
    switch (d.kind) {
      case TransitionDistance::Kind::kRapid:
        ++hist.rapid;
        break;
      case TransitionDistance::Kind::kNoTransition:
        ++hist.beyond;
        break;
      case TransitionDistance::Kind::kDistance: {
        const int mag = std::abs(d.value);
        if (mag > 4) {
          ++hist.beyond;
        } else if (d.value < 0) {
          ++hist.before[static_cast<std::size_t>(mag - 1)];
        } else {
          ++hist.after[static_cast<std::size_t>(mag - 1)];
        }
        break;
      }
    }
  }
  return hist;
}

std::map<StagePattern, std::uint64_t> pattern_counts(
    const Hypnogram& truth, std::span<const std::size_t> epochs) {
  std::map<StagePattern, std::uint64_t> out;
  for (std::size_t epoch : epochs) {
    ++out[transition_pattern(truth, epoch)];
  }
  return out;
}

}  // namespace stagerbench::error_analysis
