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

#include "stagerbench/stages.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace stagerbench {
namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return out;
}

}  // namespace

const char* to_string(SleepStage stage) {
  switch (stage) {
    case SleepStage::kWake:
      return "W";
    case SleepStage::kN1:
      return "N1";
    case SleepStage::kN2:
      return "N2";
    case SleepStage::kN3:
      return "N3";
    case SleepStage::kRem:
      return "R";
  }
  return "?";
}

SleepStage stage_from_code(std::string_view code) {
  const std::string c = upper(code);
  if (c == "W") return SleepStage::kWake;
  if (c == "N1") return SleepStage::kN1;
  if (c == "N2") return SleepStage::kN2;
  if (c == "N3") return SleepStage::kN3;
  if (c == "R" || c == "REM") return SleepStage::kRem;
  if (c.size() == 1 && c[0] >= '0' && c[0] <= '4') {
    return static_cast<SleepStage>(c[0] - '0');
  }
  throw UnknownStageCode("unknown sleep stage code: '" + std::string(code) +
                         "'");
}

SleepStage stage_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kStageCount)) {
    throw UnknownStageCode("stage index out of range: " +
                           std::to_string(index));
  }
  return static_cast<SleepStage>(index);
}

ProbSeq::ProbSeq(std::vector<double> row_major,
                 std::size_t* renormalized_rows) {
  if (row_major.size() % kStageCount != 0) {
    throw InvalidProbability(
        "probability buffer length is not a multiple of the class count");
  }
  std::size_t renormalized = 0;
  const std::size_t rows = row_major.size() / kStageCount;
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = row_major.data() + r * kStageCount;
    double sum = 0.0;
    for (std::size_t c = 0; c < kStageCount; ++c) {
      if (!std::isfinite(row[c]) || row[c] < 0.0) {
        throw InvalidProbability("probability row " + std::to_string(r) +
                                 " has a negative or non-finite entry");
      }
      sum += row[c];
    }
    if (sum <= 0.0) {
      throw InvalidProbability("probability row " + std::to_string(r) +
                               " sums to zero");
    }
    if (std::fabs(sum - 1.0) > kRowSumTolerance) {
      for (std::size_t c = 0; c < kStageCount; ++c) row[c] /= sum;
      ++renormalized;
    }
  }
  if (renormalized_rows != nullptr) *renormalized_rows = renormalized;
  values_ = std::move(row_major);
}

Hypnogram hardened(const ProbSeq& probs) {
  Hypnogram out;
  out.stages.reserve(probs.length());
  for (std::size_t e = 0; e < probs.length(); ++e) {
    const auto row = probs.row(e);
    std::size_t best = 0;
    for (std::size_t c = 1; c < kStageCount; ++c) {
      if (row[c] > row[best]) best = c;
    }
    out.stages.push_back(static_cast<SleepStage>(best));
  }
  return out;
}

void StagerSet::validate() const {
  if (outputs.empty()) {
    throw EmptyStagerSet("a stager set needs at least one stager");
  }
  if (stager_names.size() != outputs.size()) {
    throw LengthMismatch("stager name count (" +
                         std::to_string(stager_names.size()) +
                         ") does not match output count (" +
                         std::to_string(outputs.size()) + ")");
  }
  for (std::size_t m = 0; m < outputs.size(); ++m) {
    if (outputs[m].length() != truth.length()) {
      throw LengthMismatch("stager '" + stager_names[m] + "' scored " +
                           std::to_string(outputs[m].length()) +
                           " epochs but the reference has " +
                           std::to_string(truth.length()));
    }
  }
}

const char* to_string(SeverityClass severity) {
  switch (severity) {
    case SeverityClass::kNone:
      return "none";
    case SeverityClass::kMild:
      return "mild";
    case SeverityClass::kModerate:
      return "moderate";
    case SeverityClass::kSevere:
      return "severe";
    case SeverityClass::kUnknown:
      return "unknown";
  }
  return "?";
}

SeverityClass severity_of(std::optional<double> ahi) {
  if (!ahi.has_value()) return SeverityClass::kUnknown;
  const double v = *ahi;
  if (!(v >= 0.0)) {
    throw NegativeAhi("AHI must be nonnegative, got " + std::to_string(v));
  }
  if (v < 1.0) return SeverityClass::kNone;
  if (v < 5.0) return SeverityClass::kMild;
  if (v < 10.0) return SeverityClass::kModerate;
  return SeverityClass::kSevere;
}

}  // namespace stagerbench
