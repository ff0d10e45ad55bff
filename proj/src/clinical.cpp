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

#include "stagerbench/clinical.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace stagerbench::clinical {
namespace {

constexpr double kMinutesPerEpoch = 0.5;

std::optional<double> ratio_error(std::optional<double> predicted,
                                  std::optional<double> reference) {
  if (!predicted.has_value() || !reference.has_value()) return std::nullopt;
  if (*reference == 0.0) return std::nullopt;
  return 100.0 * std::fabs(*predicted - *reference) / *reference;
}

}  // namespace

ClinicalMeasures clinical_measures(const Hypnogram& hypnogram) {
  if (hypnogram.empty()) {
    throw EmptyHypnogram("clinical measures need at least one epoch");
  }
  const std::size_t len = hypnogram.length();

  std::size_t onset = len;   // first non-wake epoch
  std::size_t last_sleep = 0;
  std::size_t first_rem = len;
  std::size_t sleep_epochs = 0;
  for (std::size_t e = 0; e < len; ++e) {
    if (hypnogram[e] == SleepStage::kWake) continue;
    ++sleep_epochs;
    if (onset == len) onset = e;
    last_sleep = e;
    if (first_rem == len && hypnogram[e] == SleepStage::kRem) first_rem = e;
  }

  ClinicalMeasures m;
  m.total_sleep_time_min =
      kMinutesPerEpoch * static_cast<double>(sleep_epochs);
  m.sleep_efficiency_pct = 100.0 * static_cast<double>(sleep_epochs) /
                           static_cast<double>(len);
  if (onset == len) return m;  // all wake: everything zero, no REM latency

  std::size_t waso_epochs = 0;
  for (std::size_t e = onset + 1; e < last_sleep; ++e) {
    if (hypnogram[e] == SleepStage::kWake) ++waso_epochs;
  }
  m.wake_after_sleep_onset_min =
      kMinutesPerEpoch * static_cast<double>(waso_epochs);
  if (first_rem < len) {
    m.rem_latency_min =
        kMinutesPerEpoch * static_cast<double>(first_rem - onset);
  }
  return m;
}

RelativeErrors relative_errors(const ClinicalMeasures& predicted,
                               const ClinicalMeasures& reference) {
  RelativeErrors errors;
  errors.total_sleep_time_pct = ratio_error(predicted.total_sleep_time_min,
                                            reference.total_sleep_time_min);
  errors.wake_after_sleep_onset_pct =
      ratio_error(predicted.wake_after_sleep_onset_min,
                  reference.wake_after_sleep_onset_min);
  errors.rem_latency_pct =
      ratio_error(predicted.rem_latency_min, reference.rem_latency_min);
  errors.sleep_efficiency_pct = ratio_error(predicted.sleep_efficiency_pct,
                                            reference.sleep_efficiency_pct);
  return errors;
}

TTestResult paired_t_test(std::span<const std::optional<double>> a,
                          std::span<const std::optional<double>> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("paired t-test needs aligned samples: " +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].has_value() && b[i].has_value()) {
      diffs.push_back(*a[i] - *b[i]);
    }
  }
  if (diffs.size() < 2) {
    throw TooFewPairs("paired t-test needs at least 2 usable pairs, got " +
                      std::to_string(diffs.size()));
  }

  const double n = static_cast<double>(diffs.size());
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= n;
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  TTestResult result;
  result.pairs = diffs.size();
  if (sd == 0.0) {
    if (mean == 0.0) {
      result.t = 0.0;
      result.p_value = 1.0;
    } else {
      result.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
      result.p_value = 0.0;
    }
    return result;
  }
  result.t = mean / (sd / std::sqrt(n));
  const boost::math::students_t dist(n - 1.0);
  result.p_value =
      2.0 * boost::math::cdf(boost::math::complement(dist,
                                                     std::fabs(result.t)));
  return result;
}

}  // namespace stagerbench::clinical
