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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stagerbench/error.hpp"

namespace stagerbench {

// Five-class sleep staging. The numeric values are the class indices used
// throughout: probability rows, confusion matrices and CSV columns all order
// classes W, N1, N2, N3, R.
enum class SleepStage : std::uint8_t {
  kWake = 0,
  kN1 = 1,
  kN2 = 2,
  kN3 = 3,
  kRem = 4,
};

inline constexpr std::size_t kStageCount = 5;
inline constexpr double kEpochSeconds = 30.0;

struct UnknownStageCode final : Error {
  using Error::Error;
};
struct NegativeAhi final : Error {
  using Error::Error;
};
struct InvalidProbability final : Error {
  using Error::Error;
};

const char* to_string(SleepStage stage);

// Accepts the textual codes W, N1, N2, N3, R and REM (case-insensitive) and
// the digit strings 0..4. Anything else raises UnknownStageCode.
SleepStage stage_from_code(std::string_view code);

// Accepts 0..4; anything else raises UnknownStageCode.
SleepStage stage_from_index(int index);

// A scored recording: one stage per non-overlapping 30 s epoch.
struct Hypnogram {
  std::vector<SleepStage> stages;

  std::size_t length() const { return stages.size(); }
  bool empty() const { return stages.empty(); }
  SleepStage operator[](std::size_t i) const { return stages[i]; }
};

// Per-epoch stage probabilities, row-major with kStageCount columns. Rows
// must be nonnegative and sum to 1; rows whose sum is off by more than
// kRowSumTolerance are renormalized on construction (counted via
// renormalized_rows) rather than rejected. Nonpositive row sums and negative
// or non-finite entries raise InvalidProbability.
class ProbSeq {
 public:
  static constexpr double kRowSumTolerance = 1e-6;

  ProbSeq() = default;
  explicit ProbSeq(std::vector<double> row_major,
                   std::size_t* renormalized_rows = nullptr);

  std::size_t length() const { return values_.size() / kStageCount; }
  bool empty() const { return values_.empty(); }
  double at(std::size_t epoch, std::size_t cls) const {
    return values_[epoch * kStageCount + cls];
  }
  std::span<const double> row(std::size_t epoch) const {
    return {values_.data() + epoch * kStageCount, kStageCount};
  }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

// Arg-max collapse of a probability sequence. Ties pick the lowest class
// index so the result is deterministic.
Hypnogram hardened(const ProbSeq& probs);

struct EmptyStagerSet final : Error {
  using Error::Error;
};

// The aligned outputs of several stagers on one recording, plus the human
// reference. validate() enforces at least one stager and equal lengths.
struct StagerSet {
  std::vector<std::string> stager_names;
  std::vector<ProbSeq> outputs;
  Hypnogram truth;

  std::size_t stager_count() const { return outputs.size(); }
  std::size_t length() const { return truth.length(); }
  void validate() const;
};

// Obstructive sleep apnea severity from the apnea-hypopnea index, in
// events/hour: none [0,1), mild [1,5), moderate [5,10), severe [10,inf).
enum class SeverityClass : std::uint8_t {
  kNone = 0,
  kMild = 1,
  kModerate = 2,
  kSevere = 3,
  kUnknown = 4,
};

const char* to_string(SeverityClass severity);

// Missing AHI maps to kUnknown; negative AHI raises NegativeAhi.
SeverityClass severity_of(std::optional<double> ahi);

// One recording in a cohort manifest. Paths are as written in the manifest
// file; relative paths are resolved against the manifest's directory by the
// loaders in table_io.
struct RecordingEntry {
  std::string id;
  double age_years = 0.0;
  std::optional<double> ahi;
  std::string subset;
  std::string truth_path;
  std::map<std::string, std::string> stager_paths;
  std::string edf_path;
};

struct CohortManifest {
  std::vector<RecordingEntry> recordings;
};

}  // namespace stagerbench
