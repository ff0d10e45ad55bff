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

#include "stagerbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "stagerbench/rng.hpp"

namespace stagerbench::synth {
namespace {

void check_stochastic(const StochasticMatrix& matrix, const char* what) {
  for (std::size_t r = 0; r < kStageCount; ++r) {
    double sum = 0.0;
    for (double v : matrix[r]) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidStochasticMatrix(std::string(what) + " row " +
                                      std::to_string(r) +
                                      " has a negative or non-finite entry");
      }
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw InvalidStochasticMatrix(std::string(what) + " row " +
                                    std::to_string(r) + " sums to " +
                                    std::to_string(sum) + ", not 1");
    }
  }
}

void validate(const SynthSpec& spec) {
  if (spec.stagers.empty()) {
    throw InvalidStochasticMatrix("a synthetic cohort needs at least one "
                                  "stager");
  }
  if (spec.epochs_per_recording == 0) {
    throw InvalidStochasticMatrix("epochs_per_recording must be positive");
  }
  if (!(spec.concentration > 0.0)) {
    throw InvalidStochasticMatrix("concentration must be positive, got " +
                                  std::to_string(spec.concentration));
  }
  check_stochastic(spec.transition, "transition matrix");
  for (const SynthStager& stager : spec.stagers) {
    check_stochastic(stager.confusion,
                     ("confusion matrix of '" + stager.name + "'").c_str());
  }
}

// Dirichlet row with weight (1 + concentration) on the predicted class and
// 1 elsewhere; the predicted class is forced to hold the maximum by a final
// swap, so hardening recovers the prediction.
void dirichlet_row(SplitRng& rng, std::size_t pred, double concentration,
                   double* row) {
  double total = 0.0;
  for (std::size_t c = 0; c < kStageCount; ++c) {
    const double alpha = c == pred ? 1.0 + concentration : 1.0;
    row[c] = rng.gamma(alpha);
    total += row[c];
  }
  for (std::size_t c = 0; c < kStageCount; ++c) row[c] /= total;
  std::size_t argmax = 0;
  for (std::size_t c = 1; c < kStageCount; ++c) {
    if (row[c] > row[argmax]) argmax = c;
  }
  if (argmax != pred) std::swap(row[argmax], row[pred]);
}

}  // namespace

StochasticMatrix default_transition() {
  return StochasticMatrix{{
      {0.90, 0.07, 0.02, 0.005, 0.005},  // W
      {0.05, 0.60, 0.30, 0.02, 0.03},    // N1
      {0.02, 0.05, 0.80, 0.10, 0.03},    // N2
      {0.01, 0.02, 0.15, 0.80, 0.02},    // N3
      {0.03, 0.05, 0.10, 0.02, 0.80},    // R
  }};
}

StochasticMatrix diagonal_confusion(double diag) {
  if (!(diag > 0.0) || !(diag <= 1.0)) {
    throw InvalidStochasticMatrix("confusion diagonal must be in (0, 1], got " +
                                  std::to_string(diag));
  }
  StochasticMatrix m{};
  const double off = (1.0 - diag) / static_cast<double>(kStageCount - 1);
  for (std::size_t r = 0; r < kStageCount; ++r) {
    for (std::size_t c = 0; c < kStageCount; ++c) {
      m[r][c] = r == c ? diag : off;
    }
  }
  return m;
}

SynthCohort generate_synthetic_cohort(const SynthSpec& spec) {
  validate(spec);

  SynthCohort cohort;
  for (const SynthStager& stager : spec.stagers) {
    cohort.stager_names.push_back(stager.name);
  }

  const SplitRng root(spec.seed);
  const std::size_t len = spec.epochs_per_recording;
  const std::array<double, kStageCount> uniform{0.2, 0.2, 0.2, 0.2, 0.2};

  for (std::size_t r = 0; r < spec.n_recordings; ++r) {
    SplitRng rng = root.fork(r);

    SynthRecording rec;
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%04zu", r);
    rec.entry.id = id;
    rec.entry.subset = "synthetic";
    rec.entry.age_years = rng.uniform(5.0, 10.0);
    rec.entry.ahi = std::exp(rng.uniform(std::log(0.2), std::log(40.0)));

    rec.set.truth.stages.resize(len);
    rec.set.truth.stages[0] =
        static_cast<SleepStage>(rng.categorical(uniform));
    for (std::size_t e = 1; e < len; ++e) {
      const auto& row =
          spec.transition[static_cast<std::size_t>(rec.set.truth.stages[e - 1])];
      rec.set.truth.stages[e] = static_cast<SleepStage>(rng.categorical(row));
    }

    for (const SynthStager& stager : spec.stagers) {
      std::vector<double> rows(len * kStageCount);
      for (std::size_t e = 0; e < len; ++e) {
        const auto& conf_row =
            stager.confusion[static_cast<std::size_t>(rec.set.truth.stages[e])];
        const std::size_t pred = rng.categorical(conf_row);
        dirichlet_row(rng, pred, spec.concentration,
                      rows.data() + e * kStageCount);
      }
      rec.set.stager_names.push_back(stager.name);
      rec.set.outputs.emplace_back(std::move(rows));
    }

    cohort.recordings.push_back(std::move(rec));
  }
  return cohort;
}

}  // namespace stagerbench::synth
