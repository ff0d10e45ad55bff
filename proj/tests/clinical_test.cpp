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

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "stagerbench/clinical.hpp"

using namespace stagerbench;
using namespace stagerbench::clinical;

namespace {

Hypnogram from_indices(const std::vector<int>& stages) {
  Hypnogram h;
  for (const int s : stages) h.stages.push_back(stage_from_index(s));
  return h;
}

Hypnogram random_hyp(std::mt19937_64& rng, std::size_t epochs) {
  std::uniform_int_distribution<int> stage(0, 4);
  Hypnogram h;
  for (std::size_t e = 0; e < epochs; ++e)
    h.stages.push_back(stage_from_index(stage(rng)));
  return h;
}

}  // namespace

TEST_CASE("worked measures example") {
  // W W N2 N2 R W: onset at epoch 2, four scored sleep-period epochs.
  const auto h = from_indices({0, 0, 2, 2, 4, 0});
  const auto m = clinical_measures(h);
  CHECK(m.total_sleep_time_min == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(m.wake_after_sleep_onset_min == doctest::Approx(0.0).epsilon(1e-12));
  REQUIRE(m.rem_latency_min.has_value());
  CHECK(*m.rem_latency_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.sleep_efficiency_pct == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("wake strictly inside the sleep period counts as WASO") {
  // Onset at 1; the wake epochs at 3 and 4 lie between onset and the last
  // sleep epoch, the trailing wake at 6 does not.
  const auto h = from_indices({0, 2, 2, 0, 0, 3, 0});
  const auto m = clinical_measures(h);
  CHECK(m.total_sleep_time_min == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(m.wake_after_sleep_onset_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(m.rem_latency_min.has_value());
  CHECK(m.sleep_efficiency_pct ==
        doctest::Approx(100.0 * 1.5 / 3.5).epsilon(1e-12));
}

TEST_CASE("all-wake recording degenerates to zeros") {
  Hypnogram h;
  h.stages.assign(20, SleepStage::kWake);
  const auto m = clinical_measures(h);
  CHECK(m.total_sleep_time_min == 0.0);
  CHECK(m.wake_after_sleep_onset_min == 0.0);
  CHECK_FALSE(m.rem_latency_min.has_value());
  CHECK(m.sleep_efficiency_pct == 0.0);
}

TEST_CASE("uninterrupted sleep uses the whole night") {
  Hypnogram h;
  h.stages.assign(960, SleepStage::kN2);
  const auto m = clinical_measures(h);
  CHECK(m.total_sleep_time_min == doctest::Approx(480.0).epsilon(1e-12));
  CHECK(m.wake_after_sleep_onset_min == 0.0);
  CHECK(m.sleep_efficiency_pct == doctest::Approx(100.0).epsilon(1e-12));
  CHECK_FALSE(m.rem_latency_min.has_value());
}

TEST_CASE("empty hypnogram is rejected") {
  CHECK_THROWS_AS(clinical_measures(Hypnogram{}), EmptyHypnogram);
}

TEST_CASE("sleep time conservation and WASO bounds on random nights") {
  std::mt19937_64 rng(43);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t len = 20 + iter;
    const auto h = random_hyp(rng, len);
    const auto m = clinical_measures(h);

    std::size_t wake = 0, sleep = 0, rem = 0;
    for (std::size_t e = 0; e < len; ++e) {
      if (h[e] == SleepStage::kWake) {
        ++wake;
      } else {
        ++sleep;
        if (h[e] == SleepStage::kRem) ++rem;
      }
    }
    // Every epoch is either sleep (TST) or wake.
    CHECK(m.total_sleep_time_min ==
          doctest::Approx(0.5 * static_cast<double>(sleep)).epsilon(1e-12));
    // WASO is a subset of the wake epochs.
    CHECK(m.wake_after_sleep_onset_min <=
          0.5 * static_cast<double>(wake) + 1e-12);
    CHECK(m.rem_latency_min.has_value() == (rem > 0));
    CHECK(m.sleep_efficiency_pct >= 0.0);
    CHECK(m.sleep_efficiency_pct <= 100.0);
    // Full efficiency exactly when no epoch is wake.
    CHECK((m.sleep_efficiency_pct == doctest::Approx(100.0)) == (wake == 0));
    if (m.rem_latency_min.has_value()) CHECK(*m.rem_latency_min >= 0.0);
  }
}

TEST_CASE("relative errors on a frozen pair") {
  ClinicalMeasures ref;
  ref.total_sleep_time_min = 400.0;
  ref.wake_after_sleep_onset_min = 50.0;
  ref.rem_latency_min = 80.0;
  ref.sleep_efficiency_pct = 90.0;
  ClinicalMeasures pred;
  pred.total_sleep_time_min = 440.0;
  pred.wake_after_sleep_onset_min = 40.0;
  pred.rem_latency_min = 100.0;
  pred.sleep_efficiency_pct = 99.0;

  const auto err = relative_errors(pred, ref);
  REQUIRE(err.total_sleep_time_pct.has_value());
  CHECK(*err.total_sleep_time_pct == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(*err.wake_after_sleep_onset_pct ==
        doctest::Approx(20.0).epsilon(1e-12));
  CHECK(*err.rem_latency_pct == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(*err.sleep_efficiency_pct == doctest::Approx(10.0).epsilon(1e-12));

  // Identical measures give zero error everywhere.
  const auto zero = relative_errors(ref, ref);
  CHECK(*zero.total_sleep_time_pct == 0.0);
  CHECK(*zero.wake_after_sleep_onset_pct == 0.0);
  CHECK(*zero.rem_latency_pct == 0.0);
  CHECK(*zero.sleep_efficiency_pct == 0.0);
}

TEST_CASE("relative errors are symmetric in magnitude scaling") {
  ClinicalMeasures ref;
  ref.total_sleep_time_min = 200.0;
  ref.wake_after_sleep_onset_min = 30.0;
  ref.rem_latency_min = 60.0;
  ref.sleep_efficiency_pct = 80.0;
  ClinicalMeasures pred = ref;
  pred.total_sleep_time_min = 250.0;
  pred.wake_after_sleep_onset_min = 24.0;

  const auto base = relative_errors(pred, ref);
  // Scaling both sides of a measure leaves its percentage error unchanged.
  ClinicalMeasures ref2 = ref;
  ClinicalMeasures pred2 = pred;
  ref2.total_sleep_time_min *= 3.0;
  pred2.total_sleep_time_min *= 3.0;
  const auto scaled = relative_errors(pred2, ref2);
  CHECK(*scaled.total_sleep_time_pct ==
        doctest::Approx(*base.total_sleep_time_pct).epsilon(1e-12));
}

TEST_CASE("zero or missing references suppress error terms") {
  ClinicalMeasures ref;
  ref.total_sleep_time_min = 0.0;
  ref.wake_after_sleep_onset_min = 0.0;
  ref.rem_latency_min = std::nullopt;
  ref.sleep_efficiency_pct = 0.0;
  ClinicalMeasures pred;
  pred.total_sleep_time_min = 100.0;
  pred.wake_after_sleep_onset_min = 10.0;
  pred.rem_latency_min = 50.0;
  pred.sleep_efficiency_pct = 40.0;

  const auto err = relative_errors(pred, ref);
  CHECK_FALSE(err.total_sleep_time_pct.has_value());
  CHECK_FALSE(err.wake_after_sleep_onset_pct.has_value());
  CHECK_FALSE(err.rem_latency_pct.has_value());
  CHECK_FALSE(err.sleep_efficiency_pct.has_value());

  // REM latency also drops when only the prediction lacks REM.
  ClinicalMeasures ref_rem;
  ref_rem.total_sleep_time_min = 100.0;
  ref_rem.rem_latency_min = 50.0;
  ref_rem.sleep_efficiency_pct = 50.0;
  ClinicalMeasures pred_no_rem = ref_rem;
  pred_no_rem.rem_latency_min = std::nullopt;
  CHECK_FALSE(
      relative_errors(pred_no_rem, ref_rem).rem_latency_pct.has_value());
}

TEST_CASE("paired t-test matches frozen reference values") {
  const std::vector<std::optional<double>> a{1.0, 2.0, 3.0, 4.0};
  const std::vector<std::optional<double>> b{2.0, 2.0, 4.0, 4.0};
  const auto result = paired_t_test(a, b);
  CHECK(result.pairs == 4);
  CHECK(result.t == doctest::Approx(-1.7320508075688774).epsilon(1e-9));
  CHECK(result.p_value == doctest::Approx(0.18169011381620923).epsilon(1e-9));
  CHECK(result.p_value ==
        doctest::Approx(oracles::t_two_sided_p(result.t, 3)).epsilon(1e-6));

  // Swapping the sides flips t and keeps p.
  const auto reversed = paired_t_test(b, a);
  CHECK(reversed.t == doctest::Approx(-result.t).epsilon(1e-12));
  CHECK(reversed.p_value == doctest::Approx(result.p_value).epsilon(1e-12));
}

TEST_CASE("paired t-test p-values track the quadrature oracle") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> value(0.0, 100.0);
  std::uniform_int_distribution<std::size_t> n_dist(3, 30);
  for (int iter = 0; iter < 25; ++iter) {
    const std::size_t n = n_dist(rng);
    std::vector<std::optional<double>> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = value(rng);
      b[i] = value(rng);
    }
    const auto result = paired_t_test(a, b);
    if (!std::isfinite(result.t)) continue;  // zero-variance degenerate
    CHECK(result.p_value ==
          doctest::Approx(oracles::t_two_sided_p(
                              result.t, static_cast<int>(result.pairs) - 1))
              .epsilon(1e-6));
  }
}

TEST_CASE("paired t-test drops incomplete pairs") {
  const std::vector<std::optional<double>> a{1.0, std::nullopt, 3.0, 4.0, 5.0};
  const std::vector<std::optional<double>> b{2.0, 7.0, std::nullopt, 4.5, 5.5};
  const auto result = paired_t_test(a, b);
  CHECK(result.pairs == 3);  // indices 0, 3, 4 survive

  const std::vector<std::optional<double>> sparse_a{1.0, std::nullopt};
  const std::vector<std::optional<double>> sparse_b{2.0, 3.0};
  CHECK_THROWS_AS(paired_t_test(sparse_a, sparse_b), TooFewPairs);
  CHECK_THROWS_AS(
      paired_t_test(std::vector<std::optional<double>>{},
                    std::vector<std::optional<double>>{}),
      TooFewPairs);
}

TEST_CASE("degenerate difference variance") {
  SUBCASE("identical sides give t = 0, p = 1") {
    const std::vector<std::optional<double>> a{3.0, 5.0, 9.0};
    const auto result = paired_t_test(a, a);
    CHECK(result.t == 0.0);
    CHECK(result.p_value == 1.0);
  }
  SUBCASE("constant nonzero difference gives infinite t, p = 0") {
    const std::vector<std::optional<double>> a{3.0, 5.0, 9.0};
    const std::vector<std::optional<double>> b{2.0, 4.0, 8.0};
    const auto result = paired_t_test(a, b);
    CHECK(std::isinf(result.t));
    CHECK(result.t > 0.0);
    CHECK(result.p_value == 0.0);
    const auto negated = paired_t_test(b, a);
    CHECK(std::isinf(negated.t));
    CHECK(negated.t < 0.0);
    CHECK(negated.p_value == 0.0);
  }
}
