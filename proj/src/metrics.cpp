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

#include "stagerbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

namespace stagerbench::metrics {
namespace {

constexpr double kProbFloor = 1e-12;

void require_nonempty(const ConfusionMatrix& cm) {
  if (cm.total() == 0) {
    throw Error("metrics need at least one scored epoch");
  }
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw LengthMismatch(std::string(what) + ": " + std::to_string(a) +
                         " vs " + std::to_string(b) + " epochs");
  }
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (std::uint64_t c : counts) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t t = 0;
  for (std::size_t p = 0; p < kStageCount; ++p) t += at(truth, p);
  return t;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::uint64_t t = 0;
  for (std::size_t r = 0; r < kStageCount; ++r) t += at(r, pred);
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

ConfusionMatrix confusion(const Hypnogram& pred, const Hypnogram& truth) {
  require_same_length(pred.length(), truth.length(), "confusion");
  ConfusionMatrix cm;
  for (std::size_t e = 0; e < truth.length(); ++e) {
    ++cm.at(static_cast<std::size_t>(truth[e]),
            static_cast<std::size_t>(pred[e]));
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  std::uint64_t agree = 0;
  for (std::size_t c = 0; c < kStageCount; ++c) agree += cm.at(c, c);
  return static_cast<double>(agree) / static_cast<double>(cm.total());
}

double cohen_kappa(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  const double total = static_cast<double>(cm.total());
  double agree = 0.0;
  double chance = 0.0;
  for (std::size_t c = 0; c < kStageCount; ++c) {
    agree += static_cast<double>(cm.at(c, c));
    chance += static_cast<double>(cm.row_sum(c)) *
              static_cast<double>(cm.col_sum(c));
  }
  const double p_o = agree / total;
  const double p_e = chance / (total * total);
  if (p_e > 1.0 - 1e-12) {
    if (p_o > 1.0 - 1e-12) return 1.0;
    throw DegenerateKappa("chance agreement is 1 but observed agreement is " +
                          std::to_string(p_o));
  }
  return (p_o - p_e) / (1.0 - p_e);
}

double nll(const ProbSeq& probs, const Hypnogram& truth) {
  require_same_length(probs.length(), truth.length(), "nll");
  if (truth.empty()) throw Error("nll needs at least one epoch");
  double total = 0.0;
  for (std::size_t e = 0; e < truth.length(); ++e) {
    const double p = probs.at(e, static_cast<std::size_t>(truth[e]));
    total += -std::log(std::max(p, kProbFloor));
  }
  return total / static_cast<double>(truth.length());
}

double brier(const ProbSeq& probs, const Hypnogram& truth) {
  require_same_length(probs.length(), truth.length(), "brier");
  if (truth.empty()) throw Error("brier needs at least one epoch");
  double total = 0.0;
  for (std::size_t e = 0; e < truth.length(); ++e) {
    const std::size_t y = static_cast<std::size_t>(truth[e]);
    double sq = 0.0;
    for (std::size_t c = 0; c < kStageCount; ++c) {
      const double diff = (c == y ? 1.0 : 0.0) - probs.at(e, c);
      sq += diff * diff;
    }
    total += sq / static_cast<double>(kStageCount);
  }
  return total / static_cast<double>(truth.length());
}

MetricReport pooled_report(const ConfusionMatrix& cm, AbsentClassPolicy policy,
                           double nll_sum, double brier_sum,
                           std::uint64_t prob_epochs, bool has_probs) {
  require_nonempty(cm);
  MetricReport report;
  report.accuracy = accuracy(cm);
  report.kappa = cohen_kappa(cm);

  const double total = static_cast<double>(cm.total());
  double f1_total = 0.0, sens_total = 0.0, spec_total = 0.0;
  std::size_t included = 0;
  for (std::size_t c = 0; c < kStageCount; ++c) {
    const double tp = static_cast<double>(cm.at(c, c));
    const double row = static_cast<double>(cm.row_sum(c));
    const double col = static_cast<double>(cm.col_sum(c));
    const bool present = row > 0.0 || col > 0.0;
    report.class_present[c] = present;

    const double f1_den = row + col;  // 2TP + FP + FN
    const double f1 = f1_den > 0.0 ? 2.0 * tp / f1_den : 0.0;
    report.class_f1[c] = f1;

    // Recall over truth positives; a class predicted but never true scores 0.
    const double sens = row > 0.0 ? tp / row : 0.0;
    // True negatives over truth negatives; no negatives means vacuously 1.
    const double negatives = total - row;
    const double spec =
        negatives > 0.0 ? (total - row - col + tp) / negatives : 1.0;

    if (policy == AbsentClassPolicy::kScoreZeroAbsent || present) {
      f1_total += present ? f1 : 0.0;
      sens_total += present ? sens : 0.0;
      spec_total += present ? spec : 0.0;
      ++included;
    }
  }
  report.mf1 = f1_total / static_cast<double>(included);
  report.sensitivity = sens_total / static_cast<double>(included);
  report.specificity = spec_total / static_cast<double>(included);

  report.has_probs = has_probs && prob_epochs > 0;
  if (report.has_probs) {
    report.nll = nll_sum / static_cast<double>(prob_epochs);
    report.brier = brier_sum / static_cast<double>(prob_epochs);
  } else {
    report.nll = std::numeric_limits<double>::quiet_NaN();
    report.brier = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

MetricReport overall_metrics(const ConfusionMatrix& cm, const ProbSeq* probs,
                             const Hypnogram* truth, AbsentClassPolicy policy) {
  double nll_sum = 0.0, brier_sum = 0.0;
  std::uint64_t prob_epochs = 0;
  bool has_probs = false;
  if (probs != nullptr && truth != nullptr) {
    const std::size_t len = truth->length();
    nll_sum = nll(*probs, *truth) * static_cast<double>(len);
    brier_sum = brier(*probs, *truth) * static_cast<double>(len);
    prob_epochs = len;
    has_probs = true;
  }
  return pooled_report(cm, policy, nll_sum, brier_sum, prob_epochs, has_probs);
}

McNemarResult mcnemar(const Hypnogram& a, const Hypnogram& b,
                      const Hypnogram& truth,
                      std::optional<std::uint64_t> exact_threshold) {
  require_same_length(a.length(), truth.length(), "mcnemar");
  require_same_length(b.length(), truth.length(), "mcnemar");

  McNemarResult result;
  for (std::size_t e = 0; e < truth.length(); ++e) {
    const bool a_ok = a[e] == truth[e];
    const bool b_ok = b[e] == truth[e];
    if (a_ok && !b_ok) ++result.only_a_correct;
    if (!a_ok && b_ok) ++result.only_b_correct;
  }

  const std::uint64_t discordant =
      result.only_a_correct + result.only_b_correct;
  if (discordant == 0) {
    result.statistic = 0.0;
    result.p_value = 1.0;
    return result;
  }

  const double diff = std::fabs(static_cast<double>(result.only_a_correct) -
                                static_cast<double>(result.only_b_correct));
  const double corrected = diff - 1.0;
  result.statistic =
      corrected * corrected / static_cast<double>(discordant);

  if (exact_threshold.has_value() && discordant < *exact_threshold) {
    const boost::math::binomial dist(static_cast<double>(discordant), 0.5);
    const std::uint64_t k =
        std::min(result.only_a_correct, result.only_b_correct);
    result.p_value =
        std::min(1.0, 2.0 * boost::math::cdf(dist, static_cast<double>(k)));
    result.exact = true;
  } else {
    const boost::math::chi_squared dist(1.0);
    result.p_value =
        boost::math::cdf(boost::math::complement(dist, result.statistic));
  }
  return result;
}

double kappa_between(const Hypnogram& a, const Hypnogram& b) {
  return cohen_kappa(confusion(b, a));
}

std::vector<std::vector<double>> pairwise_kappa(
    std::span<const Hypnogram> systems, const Hypnogram& truth) {
  std::vector<const Hypnogram*> all;
  for (const Hypnogram& h : systems) all.push_back(&h);
  all.push_back(&truth);

  const std::size_t n = all.size();
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = kappa_between(*all[i], *all[j]);
      matrix[i][j] = k;
      matrix[j][i] = k;
    }
  }
  return matrix;
}

namespace {

std::string age_label(double lo, double hi) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "age:[%g,%g)", lo, hi);
  return buf;
}

StratumMetrics pool_stratum(std::string label,
                            std::span<const RecordingEval* const> members,
                            AbsentClassPolicy policy) {
  StratumMetrics stratum;
  stratum.label = std::move(label);
  stratum.recording_count = members.size();
  ConfusionMatrix cm;
  double nll_sum = 0.0, brier_sum = 0.0;
  std::uint64_t prob_epochs = 0;
  bool has_probs = true;
  for (const RecordingEval* rec : members) {
    cm += rec->cm;
    nll_sum += rec->nll_sum;
    brier_sum += rec->brier_sum;
    prob_epochs += rec->prob_epochs;
    has_probs = has_probs && rec->has_probs;
  }
  stratum.epoch_count = cm.total();
  stratum.report =
      pooled_report(cm, policy, nll_sum, brier_sum, prob_epochs, has_probs);
  return stratum;
}

}  // namespace

std::vector<StratumMetrics> stratify_by_age(
    std::span<const RecordingEval> recordings, std::span<const double> edges,
    AbsentClassPolicy policy) {
  if (edges.size() < 2) {
    throw Error("age stratification needs at least two bin edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw Error("age bin edges must be strictly ascending");
    }
  }

  std::vector<StratumMetrics> out;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    std::vector<const RecordingEval*> members;
    for (const RecordingEval& rec : recordings) {
      if (rec.age_years >= edges[b] && rec.age_years < edges[b + 1]) {
        members.push_back(&rec);
      }
    }
    if (members.empty()) continue;
    out.push_back(
        pool_stratum(age_label(edges[b], edges[b + 1]), members, policy));
  }
  return out;
}

std::vector<StratumMetrics> stratify_by_severity(
    std::span<const RecordingEval> recordings, AbsentClassPolicy policy) {
  std::vector<StratumMetrics> out;
  for (int s = 0; s <= static_cast<int>(SeverityClass::kUnknown); ++s) {
    const SeverityClass severity = static_cast<SeverityClass>(s);
    std::vector<const RecordingEval*> members;
    for (const RecordingEval& rec : recordings) {
      if (severity_of(rec.ahi) == severity) members.push_back(&rec);
    }
    if (members.empty()) continue;
    out.push_back(pool_stratum(std::string("osa:") + to_string(severity),
                               members, policy));
  }
  return out;
}

}  // namespace stagerbench::metrics
