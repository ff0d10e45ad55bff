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

#include "stagerbench/ensemble.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "stagerbench/kernels.hpp"

namespace stagerbench::ensemble {
namespace {

constexpr double kProbFloor = 1e-12;

void check_weights(const StagerSet& set, std::span<const double> weights) {
  if (weights.size() != set.stager_count()) {
    throw WeightDimensionMismatch(
        std::to_string(weights.size()) + " weights for " +
        std::to_string(set.stager_count()) + " stagers");
  }
}

void require_labels(const StagerSet& set) {
  if (set.truth.empty()) {
    throw NoLabels("weight fitting needs reference labels");
  }
}

// Stable softmax over one row of class scores.
std::array<double, kStageCount> softmax_row(const double* z) {
  std::array<double, kStageCount> out;
  double zmax = z[0];
  for (std::size_t c = 1; c < kStageCount; ++c) zmax = std::max(zmax, z[c]);
  double sum = 0.0;
  for (std::size_t c = 0; c < kStageCount; ++c) {
    out[c] = std::exp(z[c] - zmax);
    sum += out[c];
  }
  for (std::size_t c = 0; c < kStageCount; ++c) out[c] /= sum;
  return out;
}

void weighted_scores(const StagerSet& set, std::span<const double> weights,
                     std::size_t epoch, double* z) {
  std::fill(z, z + kStageCount, 0.0);
  for (std::size_t m = 0; m < set.stager_count(); ++m) {
    const auto row = set.outputs[m].row(epoch);
    for (std::size_t c = 0; c < kStageCount; ++c) {
      z[c] += weights[m] * row[c];
    }
  }
}

}  // namespace

ProbSeq average_probs(const StagerSet& set) {
  set.validate();
  const std::size_t len = set.length();
  std::vector<double> acc(len * kStageCount, 0.0);
  for (const ProbSeq& probs : set.outputs) {
    kernels::add(acc.data(), probs.values().data(), acc.size());
  }
  kernels::affine(acc.data(), acc.size(),
                  1.0 / static_cast<double>(set.stager_count()), 0.0);
  return ProbSeq(std::move(acc));
}

double weighted_loss(const StagerSet& set, std::span<const double> weights) {
  set.validate();
  require_labels(set);
  check_weights(set, weights);
  const std::size_t len = set.length();
  double total = 0.0;
  double z[kStageCount];
  for (std::size_t e = 0; e < len; ++e) {
    weighted_scores(set, weights, e, z);
    const auto p = softmax_row(z);
    const std::size_t y = static_cast<std::size_t>(set.truth[e]);
    total += -std::log(std::max(p[y], kProbFloor));
  }
  return total / static_cast<double>(len);
}

std::vector<double> weighted_loss_gradient(const StagerSet& set,
                                           std::span<const double> weights) {
  set.validate();
  require_labels(set);
  check_weights(set, weights);
  const std::size_t len = set.length();
  const std::size_t m_count = set.stager_count();
  std::vector<double> grad(m_count, 0.0);
  double z[kStageCount];
  for (std::size_t e = 0; e < len; ++e) {
    weighted_scores(set, weights, e, z);
    const auto p = softmax_row(z);
    const std::size_t y = static_cast<std::size_t>(set.truth[e]);
    for (std::size_t m = 0; m < m_count; ++m) {
      const auto row = set.outputs[m].row(e);
      double g = 0.0;
      for (std::size_t c = 0; c < kStageCount; ++c) {
        const double residual = p[c] - (c == y ? 1.0 : 0.0);
        g += residual * row[c];
      }
      grad[m] += g;
    }
  }
  for (double& g : grad) g /= static_cast<double>(len);
  return grad;
}

ProbSeq apply_weights(const StagerSet& set, std::span<const double> weights) {
  set.validate();
  check_weights(set, weights);
  const std::size_t len = set.length();
  std::vector<double> rows(len * kStageCount);
  double z[kStageCount];
  for (std::size_t e = 0; e < len; ++e) {
    weighted_scores(set, weights, e, z);
    const auto p = softmax_row(z);
    std::copy(p.begin(), p.end(), rows.begin() + static_cast<long>(e * kStageCount));
  }
  return ProbSeq(std::move(rows));
}

TrainedWeights train_weights(const StagerSet& set, const TrainConfig& config) {
  set.validate();
  require_labels(set);
  const std::size_t m_count = set.stager_count();

  TrainedWeights result;
  result.stager_names = set.stager_names;
  std::vector<double> w(m_count, 1.0 / static_cast<double>(m_count));

  double best_loss = weighted_loss(set, w);
  std::vector<double> best_w = w;
  result.loss_log.push_back(best_loss);

  std::size_t stale_passes = 0;
  for (std::size_t pass = 0; pass < config.max_passes; ++pass) {
    const std::vector<double> grad = weighted_loss_gradient(set, w);
    for (std::size_t m = 0; m < m_count; ++m) {
      w[m] -= config.learning_rate * grad[m];
    }
    const double loss = weighted_loss(set, w);
    result.loss_log.push_back(loss);
    if (loss < best_loss - config.min_improvement) {
      best_loss = loss;
      best_w = w;
      stale_passes = 0;
    } else if (++stale_passes >= config.patience) {
      break;
    }
  }

  result.weights = std::move(best_w);
  return result;
}

}  // namespace stagerbench::ensemble
