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
#include <span>
#include <vector>

#include "stagerbench/error.hpp"
#include "stagerbench/stages.hpp"

namespace stagerbench::ensemble {

// Combining the probability outputs of several stagers into one. Two
// schemes: a plain per-epoch average, and a weighted scheme whose one weight
// per stager is fit by gradient descent on cross-entropy against reference
// labels; the weighted per-class scores pass through a softmax so the output
// rows are proper distributions.

struct WeightDimensionMismatch final : Error {
  using Error::Error;
};
struct NoLabels final : Error {
  using Error::Error;
};

// Per-epoch, per-class arithmetic mean of the stager outputs.
ProbSeq average_probs(const StagerSet& set);

struct TrainConfig {
  double learning_rate = 0.5;
  std::size_t max_passes = 100;
  std::size_t patience = 10;       // passes without improvement before stop
  double min_improvement = 1e-6;   // on the mean cross-entropy
};

struct TrainedWeights {
  std::vector<std::string> stager_names;
  std::vector<double> weights;
  std::vector<double> loss_log;  // mean cross-entropy, initial then per pass
};

// Mean cross-entropy of the softmax-combined output against the labels.
double weighted_loss(const StagerSet& set, std::span<const double> weights);

// d(weighted_loss)/d(weights), same length as weights.
std::vector<double> weighted_loss_gradient(const StagerSet& set,
                                           std::span<const double> weights);

// Softmax of the weighted per-class scores, one row per epoch.
ProbSeq apply_weights(const StagerSet& set, std::span<const double> weights);

// Full-batch gradient descent from uniform weights; returns the weights with
// the best loss seen. Training labels come from set.truth.
TrainedWeights train_weights(const StagerSet& set,
                             const TrainConfig& config = {});

}  // namespace stagerbench::ensemble
