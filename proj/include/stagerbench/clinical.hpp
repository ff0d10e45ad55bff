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
#include <optional>
#include <span>

#include "stagerbench/error.hpp"
#include "stagerbench/stages.hpp"

namespace stagerbench::clinical {

// Whole-night summary measures derived from a hypnogram, the relative errors
// between a predicted and a reference hypnogram's measures, and a paired
// t-test for comparing those errors across recordings.

struct EmptyHypnogram final : Error {
  using Error::Error;
};
struct TooFewPairs final : Error {
  using Error::Error;
};

// All durations in minutes (epochs are 30 s, so counts scale by 0.5).
// Sleep onset is the first non-wake epoch; every measure except sleep
// efficiency is relative to it. rem_latency_min is absent when the
// recording has no REM epoch, and total_sleep_time of an all-wake recording
// is 0 with wake_after_sleep_onset 0.
struct ClinicalMeasures {
  double total_sleep_time_min = 0.0;
  double wake_after_sleep_onset_min = 0.0;
  std::optional<double> rem_latency_min;
  double sleep_efficiency_pct = 0.0;
};

ClinicalMeasures clinical_measures(const Hypnogram& hypnogram);

// Percentage errors 100 * |pred - true| / true per measure. A term is
// absent when its reference value is 0 (undefined ratio) or, for REM
// latency, when either side lacks REM sleep.
struct RelativeErrors {
  std::optional<double> total_sleep_time_pct;
  std::optional<double> wake_after_sleep_onset_pct;
  std::optional<double> rem_latency_pct;
  std::optional<double> sleep_efficiency_pct;
};

RelativeErrors relative_errors(const ClinicalMeasures& predicted,
                               const ClinicalMeasures& reference);

struct TTestResult {
  double t = 0.0;
  double p_value = 1.0;
  std::size_t pairs = 0;  // pairs actually used
};

// Two-sided paired t-test on the differences a[i] - b[i]. Pairs with either
// side absent are dropped; fewer than two usable pairs raise TooFewPairs.
// Zero-variance differences degenerate to t = 0, p = 1 when the mean
// difference is 0 and to t = +-inf, p = 0 otherwise.
TTestResult paired_t_test(std::span<const std::optional<double>> a,
                          std::span<const std::optional<double>> b);

}  // namespace stagerbench::clinical
