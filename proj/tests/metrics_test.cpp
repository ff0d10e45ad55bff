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

#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "stagerbench/metrics.hpp"

using namespace stagerbench;
using namespace stagerbench::metrics;

namespace {

Hypnogram from_indices(const std::vector<int>& stages) {
  Hypnogram h;
  for (const int s : stages) h.stages.push_back(stage_from_index(s));
  return h;
}

Hypnogram random_hyp(std::mt19937_64& rng, std::size_t epochs, int classes = 5) {
  std::uniform_int_distribution<int> stage(0, classes - 1);
  Hypnogram h;
  for (std::size_t e = 0; e < epochs; ++e)
    h.stages.push_back(stage_from_index(stage(rng)));
  return h;
}

ProbSeq random_probs(std::mt19937_64& rng, std::size_t epochs) {
  std::uniform_real_distribution<double> dist(0.001, 1.0);
  std::vector<double> values;
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

// Pred/truth sequences realizing the requested discordant counts against an
// always-wake reference, padded with concordant epochs.
void discordant_pair(std::uint64_t only_a, std::uint64_t only_b,
                     std::uint64_t both_ok, Hypnogram& a, Hypnogram& b,
                     Hypnogram& truth) {
  a.stages.clear();
  b.stages.clear();
  truth.stages.clear();
  for (std::uint64_t i = 0; i < only_a; ++i) {
    truth.stages.push_back(SleepStage::kWake);
    a.stages.push_back(SleepStage::kWake);
    b.stages.push_back(SleepStage::kN2);
  }
  for (std::uint64_t i = 0; i < only_b; ++i) {
    truth.stages.push_back(SleepStage::kWake);
    a.stages.push_back(SleepStage::kN2);
    b.stages.push_back(SleepStage::kWake);
  }
  for (std::uint64_t i = 0; i < both_ok; ++i) {
    truth.stages.push_back(SleepStage::kWake);
    a.stages.push_back(SleepStage::kWake);
    b.stages.push_back(SleepStage::kWake);
  }
}

}  // namespace

TEST_CASE("confusion matrix is truth-major and sums match") {
  const auto pred = from_indices({0, 0, 2, 2});
  const auto truth = from_indices({0, 2, 2, 2});
  const auto cm = confusion(pred, truth);
  CHECK(cm.at(0, 0) == 1);  // wake scored wake
  CHECK(cm.at(2, 0) == 1);  // N2 scored wake
  CHECK(cm.at(2, 2) == 2);
  CHECK(cm.total() == 4);
  CHECK(cm.row_sum(2) == 3);
  CHECK(cm.col_sum(0) == 2);
  CHECK_THROWS_AS(confusion(from_indices({0}), truth), LengthMismatch);
}

TEST_CASE("worked agreement example: accuracy 0.75, kappa 0.5") {
  const auto pred = from_indices({0, 0, 2, 2});
  const auto truth = from_indices({0, 2, 2, 2});
  const auto cm = confusion(pred, truth);
  CHECK(accuracy(cm) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(cohen_kappa(cm) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("metrics agree with naive loop implementations") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> len_dist(1, 200);
  std::uniform_int_distribution<int> class_dist(1, 5);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t len = len_dist(rng);
    // Sometimes restrict the alphabet so absent classes actually occur.
    const int classes = class_dist(rng);
    const auto pred = random_hyp(rng, len, classes);
    const auto truth = random_hyp(rng, len, classes);
    const auto probs = random_probs(rng, len);
    const auto cm = confusion(pred, truth);

    CHECK(accuracy(cm) ==
          doctest::Approx(oracles::loop_accuracy(pred, truth)).epsilon(1e-9));
    // Degenerate marginals make the naive ratio 0/0; the library returns 1
    // there by convention, so only compare when the oracle is finite.
    const double naive_kappa = oracles::loop_kappa(pred, truth);
    if (std::isfinite(naive_kappa)) {
      CHECK(cohen_kappa(cm) == doctest::Approx(naive_kappa).epsilon(1e-9));
    }
    CHECK(nll(probs, truth) ==
          doctest::Approx(oracles::loop_nll(probs, truth)).epsilon(1e-12));
    CHECK(brier(probs, truth) ==
          doctest::Approx(oracles::loop_brier(probs, truth)).epsilon(1e-12));

    for (const bool exclude : {true, false}) {
      const auto policy = exclude ? AbsentClassPolicy::kExcludeAbsent
                                  : AbsentClassPolicy::kScoreZeroAbsent;
      const auto report = overall_metrics(cm, &probs, &truth, policy);
      const auto naive = oracles::loop_macro(pred, truth, exclude);
      CHECK(report.mf1 == doctest::Approx(naive.mf1).epsilon(1e-9));
      CHECK(report.sensitivity ==
            doctest::Approx(naive.sensitivity).epsilon(1e-9));
      CHECK(report.specificity ==
            doctest::Approx(naive.specificity).epsilon(1e-9));
      CHECK(report.accuracy ==
            doctest::Approx(oracles::loop_accuracy(pred, truth)).epsilon(1e-9));
      CHECK(report.has_probs);
      CHECK(report.nll ==
            doctest::Approx(oracles::loop_nll(probs, truth)).epsilon(1e-12));
      CHECK(report.brier ==
            doctest::Approx(oracles::loop_brier(probs, truth)).epsilon(1e-12));
    }
  }
}

TEST_CASE("uniform probabilities score ln 5 and 0.16") {
  const std::size_t len = 17;
  std::vector<double> values(len * kStageCount, 0.2);
  const ProbSeq probs(values);
  std::mt19937_64 rng(23);
  const auto truth = random_hyp(rng, len);
  CHECK(nll(probs, truth) ==
        doctest::Approx(1.6094379124341003).epsilon(1e-12));
  CHECK(brier(probs, truth) == doctest::Approx(0.16).epsilon(1e-12));
}

TEST_CASE("one-hot probabilities on the truth score zero loss") {
  std::mt19937_64 rng(24);
  const auto truth = random_hyp(rng, 50);
  std::vector<double> values(50 * kStageCount, 0.0);
  for (std::size_t e = 0; e < 50; ++e)
    values[e * kStageCount + static_cast<std::size_t>(truth[e])] = 1.0;
  const ProbSeq probs(values);
  CHECK(nll(probs, truth) == doctest::Approx(0.0));
  CHECK(brier(probs, truth) == doctest::Approx(0.0));
}

TEST_CASE("kappa is 1 exactly for agreement and relabel-invariant") {
  std::mt19937_64 rng(25);
  const auto truth = random_hyp(rng, 300);
  CHECK(cohen_kappa(confusion(truth, truth)) == 1.0);

  const auto pred = random_hyp(rng, 300);
  const double base = cohen_kappa(confusion(pred, truth));
  // Relabel both sides with the same permutation of the classes.
  const std::array<int, 5> perm{3, 0, 4, 1, 2};
  Hypnogram pred2, truth2;
  for (std::size_t e = 0; e < 300; ++e) {
    pred2.stages.push_back(stage_from_index(perm[static_cast<int>(pred[e])]));
    truth2.stages.push_back(
        stage_from_index(perm[static_cast<int>(truth[e])]));
  }
  CHECK(cohen_kappa(confusion(pred2, truth2)) ==
        doctest::Approx(base).epsilon(1e-12));
  CHECK(accuracy(confusion(pred2, truth2)) ==
        doctest::Approx(accuracy(confusion(pred, truth))).epsilon(1e-12));
}

TEST_CASE("constant identical sequences have kappa 1 by convention") {
  Hypnogram all_wake;
  all_wake.stages.assign(40, SleepStage::kWake);
  CHECK(cohen_kappa(confusion(all_wake, all_wake)) == 1.0);
  CHECK(accuracy(confusion(all_wake, all_wake)) == 1.0);
}

TEST_CASE("empty inputs are rejected") {
  Hypnogram empty;
  const auto cm = confusion(empty, empty);
  CHECK(cm.total() == 0);
  CHECK_THROWS_AS(accuracy(cm), Error);
  CHECK_THROWS_AS(cohen_kappa(cm), Error);
  CHECK_THROWS_AS(nll(ProbSeq(), empty), Error);
  CHECK_THROWS_AS(brier(ProbSeq(), empty), Error);
}

TEST_CASE("single-class perfect prediction under both absent policies") {
  Hypnogram all_n2;
  all_n2.stages.assign(60, SleepStage::kN2);
  const auto cm = confusion(all_n2, all_n2);

  const auto excl = overall_metrics(cm, nullptr, nullptr,
                                    AbsentClassPolicy::kExcludeAbsent);
  CHECK(excl.mf1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(excl.sensitivity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(excl.specificity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(excl.class_present[2]);
  CHECK_FALSE(excl.class_present[0]);
  CHECK(std::isnan(excl.nll));
  CHECK(std::isnan(excl.brier));
  CHECK_FALSE(excl.has_probs);

  const auto zero = overall_metrics(cm, nullptr, nullptr,
                                    AbsentClassPolicy::kScoreZeroAbsent);
  CHECK(zero.mf1 == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(zero.sensitivity == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(zero.specificity == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("mcnemar matches the frozen reference values") {
  Hypnogram a, b, truth;
  discordant_pair(10, 2, 38, a, b, truth);

  SUBCASE("continuity-corrected chi-squared") {
    const auto result = mcnemar(a, b, truth);
    CHECK(result.only_a_correct == 10);
    CHECK(result.only_b_correct == 2);
    CHECK_FALSE(result.exact);
    CHECK(result.statistic == doctest::Approx(49.0 / 12.0).epsilon(1e-12));
    CHECK(result.p_value ==
          doctest::Approx(0.04330814281079206).epsilon(1e-9));
    CHECK(result.p_value ==
          doctest::Approx(oracles::chi2_tail_1df(result.statistic))
              .epsilon(1e-9));
  }
  SUBCASE("swapping the systems swaps the counts only") {
    const auto fwd = mcnemar(a, b, truth);
    const auto rev = mcnemar(b, a, truth);
    CHECK(rev.only_a_correct == fwd.only_b_correct);
    CHECK(rev.only_b_correct == fwd.only_a_correct);
    CHECK(rev.statistic == doctest::Approx(fwd.statistic).epsilon(1e-12));
    CHECK(rev.p_value == doctest::Approx(fwd.p_value).epsilon(1e-12));
  }
  SUBCASE("exact binomial below the threshold") {
    const auto result = mcnemar(a, b, truth, 25);
    CHECK(result.exact);
    CHECK(result.p_value == doctest::Approx(0.03857421875).epsilon(1e-12));
    CHECK(result.p_value ==
          doctest::Approx(oracles::binom_two_sided_p(2, 12)).epsilon(1e-9));
    // The statistic stays the chi-squared value.
    CHECK(result.statistic == doctest::Approx(49.0 / 12.0).epsilon(1e-12));
  }
  SUBCASE("threshold equal to the discordant count stays asymptotic") {
    const auto result = mcnemar(a, b, truth, 12);
    CHECK_FALSE(result.exact);
  }
}

TEST_CASE("mcnemar with balanced discordants") {
  Hypnogram a, b, truth;
  discordant_pair(8, 8, 20, a, b, truth);
  const auto result = mcnemar(a, b, truth);
  CHECK(result.statistic == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(result.p_value ==
        doctest::Approx(0.8025873486341526).epsilon(1e-9));
}

TEST_CASE("mcnemar with no discordant epochs") {
  Hypnogram a, b, truth;
  discordant_pair(0, 0, 15, a, b, truth);
  const auto result = mcnemar(a, b, truth);
  CHECK(result.only_a_correct == 0);
  CHECK(result.only_b_correct == 0);
  CHECK(result.statistic == 0.0);
  CHECK(result.p_value == 1.0);
  CHECK_FALSE(result.exact);
  // Even with an exact threshold, zero discordants short-circuit.
  CHECK_FALSE(mcnemar(a, b, truth, 100).exact);
}

TEST_CASE("mcnemar p-values track the chi-squared tail oracle") {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<std::uint64_t> count(0, 60);
  for (int iter = 0; iter < 50; ++iter) {
    const std::uint64_t only_a = count(rng);
    const std::uint64_t only_b = count(rng);
    if (only_a + only_b == 0) continue;
    Hypnogram a, b, truth;
    discordant_pair(only_a, only_b, 10, a, b, truth);
    const auto result = mcnemar(a, b, truth);
    CHECK(result.p_value ==
          doctest::Approx(oracles::chi2_tail_1df(result.statistic))
              .epsilon(1e-9));
  }
}

TEST_CASE("pairwise kappa matrix shape, symmetry and exact diagonal") {
  std::mt19937_64 rng(31);
  std::vector<Hypnogram> systems;
  for (int s = 0; s < 3; ++s) systems.push_back(random_hyp(rng, 400));
  const auto truth = random_hyp(rng, 400);
  const auto matrix = pairwise_kappa(systems, truth);
  REQUIRE(matrix.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(matrix[i].size() == 4);
    CHECK(matrix[i][i] == 1.0);
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(matrix[i][j] == doctest::Approx(matrix[j][i]).epsilon(1e-15));
  }
  // Last row/column is agreement with the reference.
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(matrix[i][3] ==
          doctest::Approx(kappa_between(systems[i], truth)).epsilon(1e-15));
  }
  CHECK(matrix[0][1] ==
        doctest::Approx(kappa_between(systems[0], systems[1])).epsilon(1e-15));
}

TEST_CASE("independent uniform sequences have near-zero kappa") {
  std::mt19937_64 rng(33);
  const auto a = random_hyp(rng, 100000);
  const auto b = random_hyp(rng, 100000);
  CHECK(std::fabs(kappa_between(a, b)) < 0.02);
}

namespace {

RecordingEval make_eval(std::string id, double age, std::optional<double> ahi,
                        const Hypnogram& pred, const Hypnogram& truth,
                        const ProbSeq& probs) {
  RecordingEval eval;
  eval.id = std::move(id);
  eval.age_years = age;
  eval.ahi = ahi;
  eval.cm = confusion(pred, truth);
  eval.nll_sum = nll(probs, truth) * static_cast<double>(truth.length());
  eval.brier_sum = brier(probs, truth) * static_cast<double>(truth.length());
  eval.prob_epochs = truth.length();
  eval.has_probs = true;
  return eval;
}

}  // namespace

TEST_CASE("a single stratum covering everything equals the overall report") {
  std::mt19937_64 rng(35);
  std::vector<RecordingEval> evals;
  ConfusionMatrix pooled_cm;
  double nll_sum = 0.0, brier_sum = 0.0;
  std::uint64_t prob_epochs = 0;
  for (int r = 0; r < 5; ++r) {
    const auto truth = random_hyp(rng, 120);
    const auto pred = random_hyp(rng, 120);
    const auto probs = random_probs(rng, 120);
    evals.push_back(make_eval("rec" + std::to_string(r), 6.0 + r, 2.0, pred,
                              truth, probs));
    pooled_cm += evals.back().cm;
    nll_sum += evals.back().nll_sum;
    brier_sum += evals.back().brier_sum;
    prob_epochs += evals.back().prob_epochs;
  }
  const std::vector<double> edges{0.0, 100.0};
  const auto strata = stratify_by_age(evals, edges);
  REQUIRE(strata.size() == 1);
  CHECK(strata[0].label == "age:[0,100)");
  CHECK(strata[0].recording_count == 5);
  CHECK(strata[0].epoch_count == 600);

  const auto overall =
      pooled_report(pooled_cm, AbsentClassPolicy::kExcludeAbsent, nll_sum,
                    brier_sum, prob_epochs, true);
  CHECK(strata[0].report.accuracy ==
        doctest::Approx(overall.accuracy).epsilon(1e-15));
  CHECK(strata[0].report.kappa ==
        doctest::Approx(overall.kappa).epsilon(1e-15));
  CHECK(strata[0].report.mf1 == doctest::Approx(overall.mf1).epsilon(1e-15));
  CHECK(strata[0].report.nll == doctest::Approx(overall.nll).epsilon(1e-15));
  CHECK(strata[0].report.brier ==
        doctest::Approx(overall.brier).epsilon(1e-15));
}

TEST_CASE("age strata use half-open bins and drop out-of-range recordings") {
  std::mt19937_64 rng(37);
  std::vector<RecordingEval> evals;
  const std::vector<double> ages{3.9, 4.0, 7.99, 8.0, 12.0, 17.9, 18.0};
  for (std::size_t r = 0; r < ages.size(); ++r) {
    const auto truth = random_hyp(rng, 50);
    const auto pred = random_hyp(rng, 50);
    const auto probs = random_probs(rng, 50);
    evals.push_back(make_eval("rec" + std::to_string(r), ages[r], std::nullopt,
                              pred, truth, probs));
  }
  const std::vector<double> edges{4.0, 8.0, 18.0};
  const auto strata = stratify_by_age(evals, edges);
  REQUIRE(strata.size() == 2);
  CHECK(strata[0].label == "age:[4,8)");
  CHECK(strata[0].recording_count == 2);  // 4.0 and 7.99
  CHECK(strata[1].label == "age:[8,18)");
  CHECK(strata[1].recording_count == 3);  // 8.0, 12.0, 17.9
  // 3.9 and 18.0 fall outside every bin.
  CHECK(strata[0].epoch_count + strata[1].epoch_count == 5 * 50);

  CHECK_THROWS_AS(
      stratify_by_age(evals, std::vector<double>{4.0}), Error);
  CHECK_THROWS_AS(
      stratify_by_age(evals, std::vector<double>{8.0, 8.0}), Error);
  CHECK_THROWS_AS(
      stratify_by_age(evals, std::vector<double>{8.0, 4.0}), Error);
}

TEST_CASE("severity strata cover every class including unknown") {
  std::mt19937_64 rng(39);
  std::vector<RecordingEval> evals;
  const std::vector<std::optional<double>> ahis{
      0.5, 0.0, 3.0, 7.5, 22.0, std::nullopt};
  for (std::size_t r = 0; r < ahis.size(); ++r) {
    const auto truth = random_hyp(rng, 40);
    const auto pred = random_hyp(rng, 40);
    const auto probs = random_probs(rng, 40);
    evals.push_back(make_eval("rec" + std::to_string(r), 9.0, ahis[r], pred,
                              truth, probs));
  }
  const auto strata = stratify_by_severity(evals);
  REQUIRE(strata.size() == 5);
  CHECK(strata[0].label == "osa:none");
  CHECK(strata[0].recording_count == 2);  // AHI 0.5 and 0.0
  CHECK(strata[1].label == "osa:mild");
  CHECK(strata[2].label == "osa:moderate");
  CHECK(strata[3].label == "osa:severe");
  CHECK(strata[4].label == "osa:unknown");
  CHECK(strata[4].recording_count == 1);

  std::uint64_t epochs = 0;
  for (const auto& s : strata) epochs += s.epoch_count;
  CHECK(epochs == 6 * 40);
}

TEST_CASE("empty strata are omitted") {
  std::mt19937_64 rng(41);
  std::vector<RecordingEval> evals;
  const auto truth = random_hyp(rng, 30);
  const auto pred = random_hyp(rng, 30);
  const auto probs = random_probs(rng, 30);
  evals.push_back(make_eval("only", 10.0, 30.0, pred, truth, probs));
  const auto severity = stratify_by_severity(evals);
  REQUIRE(severity.size() == 1);
  CHECK(severity[0].label == "osa:severe");
  const std::vector<double> edges{0.0, 5.0, 15.0};
  const auto age = stratify_by_age(evals, edges);
  REQUIRE(age.size() == 1);
  CHECK(age[0].label == "age:[5,15)");
}

TEST_CASE("pooled report without probabilities reports NaN losses") {
  Hypnogram h;
  h.stages.assign(10, SleepStage::kN2);
  const auto cm = confusion(h, h);
  const auto report =
      pooled_report(cm, AbsentClassPolicy::kExcludeAbsent, 0.0, 0.0, 0, false);
  CHECK_FALSE(report.has_probs);
  CHECK(std::isnan(report.nll));
  CHECK(std::isnan(report.brier));
}
