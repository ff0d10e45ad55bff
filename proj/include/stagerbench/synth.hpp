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
#include <string>
#include <vector>

#include "stagerbench/error.hpp"
#include "stagerbench/stages.hpp"

namespace stagerbench::synth {

// Seeded synthetic cohorts for exercising the full evaluation path without
// patient data. Reference hypnograms follow a first-order Markov chain over
// the five stages; each simulated stager draws its prediction from its
// confusion row for the true stage and then a Dirichlet probability row
// peaked on that prediction, so its hard output is exactly the hardened
// version of its soft output.

struct InvalidStochasticMatrix final : Error {
  using Error::Error;
};

// Row-stochastic: every row nonnegative, summing to 1 within 1e-9.
using StochasticMatrix =
    std::array<std::array<double, kStageCount>, kStageCount>;

// A plausible stage-to-stage transition structure: strong self-transitions,
// light sleep exchanging with deep and REM sleep.
StochasticMatrix default_transition();

// Confusion with `diag` on the diagonal and the remainder spread evenly.
StochasticMatrix diagonal_confusion(double diag);

struct SynthStager {
  std::string name;
  StochasticMatrix confusion;
};

struct SynthSpec {
  std::size_t n_recordings = 50;
  std::size_t epochs_per_recording = 960;  // 8 h of 30 s epochs
  StochasticMatrix transition = default_transition();
  std::vector<SynthStager> stagers;
  // Dirichlet weight added to the predicted class; larger = more confident
  // probability rows. Must be positive.
  double concentration = 20.0;
  std::uint64_t seed = 0;
};

struct SynthRecording {
  RecordingEntry entry;  // id, age, AHI, subset; paths left empty
  StagerSet set;         // truth plus per-stager probability rows
};

struct SynthCohort {
  std::vector<std::string> stager_names;
  std::vector<SynthRecording> recordings;
};

// Deterministic for a fixed spec: recording r consumes only the stream
// forked at index r, so the cohort is identical regardless of generation
// order. Ages are uniform on [5, 10) years and AHI log-uniform on
// [0.2, 40) events/hour, covering every severity class.
SynthCohort generate_synthetic_cohort(const SynthSpec& spec);

}  // namespace stagerbench::synth
