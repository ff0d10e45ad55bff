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

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "stagerbench/ensemble.hpp"
#include "stagerbench/metrics.hpp"

using namespace stagerbench;
using namespace stagerbench::ensemble;

namespace {

// Random valid ProbSeq rows via normalized uniforms.
ProbSeq random_probs(std::mt19937_64& rng, std::size_t epochs) {
  std::uniform_real_distribution<double> dist(0.01, 1.0);
  std::vector<double> values;
  values.reserve(epochs * kStageCount);
  for (std::size_t e = 0; e < epochs; ++e) {
    std::array<double, kStageCount> row;
    double sum = 0.0;
    for (auto& v : row) {
      v = dist(rng);
      sum += v;
    }
    for (const double v : row) values.push_back(v / sum);
  }
  return ProbSeq(values);
}

Hypnogram random_truth(std::mt19937_64& rng, std::size_t epochs) {
  std::uniform_int_distribution<int> stage(0, 4);
  Hypnogram h;
  for (std::size_t e = 0; e < epochs; ++e)
    h.stages.push_back(stage_from_index(stage(rng)));
  return h;
}

StagerSet random_set(std::mt19937_64& rng, std::size_t stagers,
                     std::size_t epochs) {
  StagerSet set;
  set.truth = random_truth(rng, epochs);
  for (std::size_t m = 0; m < stagers; ++m) {
    set.stager_names.push_back("s" + std::to_string(m));
    set.outputs.push_back(random_probs(rng, epochs));
  }
  return set;
}

// Rows concentrated on the given stages, soft enough to stay valid but with
// an unambiguous argmax.
ProbSeq peaked_probs(const std::vector<int>& stages, double peak = 0.96) {
  std::vector<double> values;
  const double rest = (1.0 - peak) / 4.0;
  for (const int s : stages)
    for (int c = 0; c < 5; ++c) values.push_back(c == s ? peak : rest);
  return ProbSeq(values);
}

}  // namespace

TEST_CASE("average_probs matches hand-averaged rows") {
  StagerSet set;
  set.stager_names = {"a", "b"};
  set.outputs.emplace_back(
      std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0,
                          0.6, 0.1, 0.1, 0.1, 0.1});
  set.outputs.emplace_back(
      std::vector<double>{0.0, 1.0, 0.0, 0.0, 0.0,
                          0.2, 0.2, 0.2, 0.2, 0.2});
  set.truth.stages = {SleepStage::kWake, SleepStage::kWake};

  const auto avg = average_probs(set);
  CHECK(avg.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(avg.at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(avg.at(0, 2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(avg.at(1, 0) == doctest::Approx(0.4).epsilon(1e-12));
  for (std::size_t c = 1; c < 5; ++c)
    CHECK(avg.at(1, c) == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("averaging identical stagers reproduces the input") {
  std::mt19937_64 rng(3);
  const auto probs = random_probs(rng, 40);
  StagerSet set;
  set.stager_names = {"a", "b", "c"};
  set.outputs = {probs, probs, probs};
  set.truth = random_truth(rng, 40);
  const auto avg = average_probs(set);
  for (std::size_t e = 0; e < 40; ++e)
    for (std::size_t c = 0; c < 5; ++c)
      CHECK(avg.at(e, c) == doctest::Approx(probs.at(e, c)).epsilon(1e-12));
}

TEST_CASE("average rows sum to one and stager order does not matter") {
  std::mt19937_64 rng(4);
  auto set = random_set(rng, 4, 60);
  const auto avg = average_probs(set);
  for (std::size_t e = 0; e < 60; ++e) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 5; ++c) sum += avg.at(e, c);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  StagerSet permuted = set;
  std::swap(permuted.outputs[0], permuted.outputs[3]);
  std::swap(permuted.stager_names[0], permuted.stager_names[3]);
  const auto avg2 = average_probs(permuted);
  for (std::size_t e = 0; e < 60; ++e)
    for (std::size_t c = 0; c < 5; ++c)
      CHECK(avg2.at(e, c) == doctest::Approx(avg.at(e, c)).epsilon(1e-12));
}

TEST_CASE("apply_weights evaluates the softmax of weighted scores") {
  StagerSet set;
  set.stager_names = {"a", "b"};
  set.outputs.emplace_back(std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0});
  set.outputs.emplace_back(std::vector<double>{0.0, 1.0, 0.0, 0.0, 0.0});
  set.truth.stages = {SleepStage::kWake};

  SUBCASE("unit weights on one-hot rows give softmax(1,1,0,0,0)") {
    const std::vector<double> w{1.0, 1.0};
    const auto out = apply_weights(set, w);
    const double e = std::exp(1.0);
    const double denom = 2.0 * e + 3.0;
    CHECK(out.at(0, 0) == doctest::Approx(e / denom).epsilon(1e-12));
    CHECK(out.at(0, 1) == doctest::Approx(e / denom).epsilon(1e-12));
    for (std::size_t c = 2; c < 5; ++c)
      CHECK(out.at(0, c) == doctest::Approx(1.0 / denom).epsilon(1e-12));
    CHECK(out.at(0, 0) ==
          doctest::Approx(0.32220249132240225).epsilon(1e-12));
    CHECK(out.at(0, 2) ==
          doctest::Approx(0.11853167245173185).epsilon(1e-12));
  }
  SUBCASE("zero weights give uniform rows") {
    const std::vector<double> w{0.0, 0.0};
    const auto out = apply_weights(set, w);
    for (std::size_t c = 0; c < 5; ++c)
      CHECK(out.at(0, c) == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("wrong weight count is rejected") {
    const std::vector<double> w{1.0};
    CHECK_THROWS_AS(apply_weights(set, w), WeightDimensionMismatch);
  }
}

TEST_CASE("a large single weight preserves one-hot argmax") {
  std::mt19937_64 rng(6);
  StagerSet set;
  set.stager_names = {"only"};
  std::vector<int> stages;
  std::uniform_int_distribution<int> stage(0, 4);
  for (int e = 0; e < 30; ++e) stages.push_back(stage(rng));
  set.outputs.push_back(peaked_probs(stages, 0.999));
  for (const int s : stages) set.truth.stages.push_back(stage_from_index(s));
  const std::vector<double> w{50.0};
  const auto hyp = hardened(apply_weights(set, w));
  for (std::size_t e = 0; e < stages.size(); ++e)
    CHECK(static_cast<int>(hyp[e]) == stages[e]);
}

TEST_CASE("uniform-weight argmax equals average-ensemble argmax") {
  std::mt19937_64 rng(8);
  for (int iter = 0; iter < 30; ++iter) {
    const auto set = random_set(rng, 3, 50);
    const std::vector<double> w(3, 1.0 / 3.0);
    const auto via_softmax = hardened(apply_weights(set, w));
    const auto via_average = hardened(average_probs(set));
    CHECK(via_softmax.stages == via_average.stages);
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> stager_count(1, 8);
  std::uniform_int_distribution<std::size_t> epoch_count(2, 120);
  std::uniform_real_distribution<double> wdist(-1.0, 1.0);
  const double h = 1e-5;
  for (int iter = 0; iter < 30; ++iter) {
    const std::size_t m_count = stager_count(rng);
    const std::size_t epochs = epoch_count(rng);
    const auto set = random_set(rng, m_count, epochs);
    std::vector<double> w(m_count);
    for (auto& v : w) v = wdist(rng);
    const auto grad = weighted_loss_gradient(set, w);
    for (std::size_t m = 0; m < m_count; ++m) {
      auto wp = w;
      auto wm = w;
      wp[m] += h;
      wm[m] -= h;
      const double numeric =
          (weighted_loss(set, wp) - weighted_loss(set, wm)) / (2.0 * h);
      CHECK(grad[m] == doctest::Approx(numeric).epsilon(1e-6));
    }
  }
}

TEST_CASE("training separates a perfect stager from an adversarial one") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> stage(0, 4);
  std::vector<int> truth_stages, wrong_stages;
  for (int e = 0; e < 200; ++e) {
    const int t = stage(rng);
    truth_stages.push_back(t);
    wrong_stages.push_back((t + 1) % 5);
  }
  StagerSet set;
  set.stager_names = {"perfect", "adversarial"};
  set.outputs.push_back(peaked_probs(truth_stages));
  set.outputs.push_back(peaked_probs(wrong_stages));
  for (const int t : truth_stages)
    set.truth.stages.push_back(stage_from_index(t));

  const auto trained = train_weights(set);
  REQUIRE(trained.weights.size() == 2);
  CHECK(trained.stager_names == set.stager_names);
  CHECK(trained.weights[0] > trained.weights[1]);

  // Initial loss plus at most one entry per pass, and the returned weights
  // realize the best loss seen.
  CHECK(trained.loss_log.size() >= 2);
  CHECK(trained.loss_log.size() <= 101);
  const double best = *std::min_element(trained.loss_log.begin(),
                                        trained.loss_log.end());
  CHECK(weighted_loss(set, trained.weights) ==
        doctest::Approx(best).epsilon(1e-12));
  CHECK(best < trained.loss_log.front());

  // The combined output nails every epoch.
  const auto combined = hardened(apply_weights(set, trained.weights));
  const auto cm = metrics::confusion(combined, set.truth);
  CHECK(metrics::accuracy(cm) == 1.0);
}

TEST_CASE("training on permuted stagers permutes the weights") {
  std::mt19937_64 rng(14);
  auto set = random_set(rng, 3, 80);
  const auto trained = train_weights(set);
  StagerSet permuted = set;
  std::rotate(permuted.outputs.begin(), permuted.outputs.begin() + 1,
              permuted.outputs.end());
  std::rotate(permuted.stager_names.begin(),
              permuted.stager_names.begin() + 1, permuted.stager_names.end());
  const auto trained2 = train_weights(permuted);
  REQUIRE(trained2.weights.size() == 3);
  CHECK(trained2.weights[0] ==
        doctest::Approx(trained.weights[1]).epsilon(1e-6));
  CHECK(trained2.weights[1] ==
        doctest::Approx(trained.weights[2]).epsilon(1e-6));
  CHECK(trained2.weights[2] ==
        doctest::Approx(trained.weights[0]).epsilon(1e-6));
}

TEST_CASE("training requires labels and stagers") {
  StagerSet no_labels;
  no_labels.stager_names = {"a"};
  no_labels.outputs.emplace_back();  // zero epochs, matching empty truth
  CHECK_THROWS_AS(train_weights(no_labels), NoLabels);

  StagerSet no_stagers;
  CHECK_THROWS_AS(train_weights(no_stagers), EmptyStagerSet);
}
