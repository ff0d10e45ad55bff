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

#include "stagerbench/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <thread>
#include <utility>

#include <json.hpp>

#include "stagerbench/clinical.hpp"
#include "stagerbench/edf.hpp"
#include "stagerbench/ensemble.hpp"
#include "stagerbench/error_analysis.hpp"
#include "stagerbench/table_io.hpp"

namespace stagerbench::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Fixed cell format so bundles are byte-stable; NaN renders as an empty
// cell, infinities (degenerate t statistics) by name.
std::string fmt_cell(double value) {
  if (std::isnan(value)) return "";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

// RFC 4180 quoting for free-text cells: stager names and stratum labels can
// carry commas (age bins render as half-open intervals).
std::string csv_cell(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (const char c : text) {
    quoted += c;
    if (c == '"') quoted += '"';
  }
  quoted += '"';
  return quoted;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("short write to '" + path.string() + "'");
}

// Index-ordered fan-out; fn must not throw (per-item failures are captured
// in the item's own slot), so the reduction stays deterministic.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t count = workers != 0 ? workers : std::thread::hardware_concurrency();
  if (count == 0) count = 1;
  count = std::min(count, n);
  if (count == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& thread : pool) thread.join();
}

struct RecordingWork {
  bool ok = false;
  std::string failure;
  Hypnogram truth;
  std::vector<ProbSeq> outputs;  // one per stager, name-sorted order
};

void run_prep(const fs::path& manifest_path, const RecordingEntry& entry,
              const PrepSettings& prep, const fs::path& prep_dir) {
  const fs::path edf_path =
      table_io::resolve_manifest_path(manifest_path, entry.edf_path);
  const auto bytes = edf::read_file_bytes(edf_path);
  const auto parsed = edf::parse_edf_header(bytes);
  std::vector<SignalTrace> channels;
  channels.reserve(prep.channels.size());
  for (const auto& aliases : prep.channels) {
    const int index = edf::find_channel(parsed.signals, aliases);
    if (index < 0)
      throw Error("channel '" + aliases.front() + "' not found in '" +
                  entry.edf_path + "'");
    channels.push_back(
        edf::read_signal(bytes, parsed, static_cast<std::size_t>(index)));
  }
  sigprep::PrepParams params = prep.params;
  params.recording_id = entry.id;
  const auto result = sigprep::preprocess_recording(std::move(channels), params);
  table_io::write_quality_json(prep_dir / (entry.id + "_quality.json"),
                               result.quality);
  if (!result.quality.passed) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", result.quality.good_seconds);
    throw Error(std::string("quality gate rejected the recording (") + buf +
                " usable seconds)");
  }
  table_io::write_epoch_grid(prep_dir / (entry.id + "_epochs.f32le"),
                             result.epochs);
}

void load_recording(const fs::path& manifest_path, const RecordingEntry& entry,
                    std::span<const std::string> stager_names,
                    const RunConfig& config, const fs::path& prep_dir,
                    RecordingWork* out) {
  try {
    if (config.prep && !entry.edf_path.empty())
      run_prep(manifest_path, entry, *config.prep, prep_dir);
    if (entry.truth_path.empty())
      throw Error("no reference hypnogram path");
    out->truth = table_io::read_hypnogram_csv(
        table_io::resolve_manifest_path(manifest_path, entry.truth_path));
    if (out->truth.empty()) throw Error("reference hypnogram is empty");
    if (entry.stager_paths.size() != stager_names.size())
      throw Error("stager set differs from the first recording's");
    out->outputs.reserve(stager_names.size());
    for (const auto& name : stager_names) {
      const auto it = entry.stager_paths.find(name);
      if (it == entry.stager_paths.end())
        throw Error("missing output for stager '" + name + "'");
      auto seq = table_io::read_probseq_csv(
          table_io::resolve_manifest_path(manifest_path, it->second));
      if (seq.length() != out->truth.length())
        throw LengthMismatch("stager '" + name + "' scored " +
                             std::to_string(seq.length()) + " epochs, not " +
                             std::to_string(out->truth.length()));
      out->outputs.push_back(std::move(seq));
    }
    out->ok = true;
  } catch (const std::exception& e) {
    out->failure = e.what();
  }
}

struct OptionalStats {
  std::size_t n = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
};

OptionalStats summarize(std::span<const std::optional<double>> values) {
  OptionalStats stats;
  double sum = 0.0;
  for (const auto& v : values)
    if (v) {
      ++stats.n;
      sum += *v;
    }
  if (stats.n == 0) return stats;
  stats.mean = sum / static_cast<double>(stats.n);
  if (stats.n < 2) return stats;
  double ss = 0.0;
  for (const auto& v : values)
    if (v) {
      const double d = *v - stats.mean;
      ss += d * d;
    }
  stats.sd = std::sqrt(ss / static_cast<double>(stats.n - 1));
  return stats;
}

void accumulate(error_analysis::DistanceHistogram* into,
                const error_analysis::DistanceHistogram& from) {
  into->rapid += from.rapid;
  for (std::size_t k = 0; k < 4; ++k) {
    into->before[k] += from.before[k];
    into->after[k] += from.after[k];
  }
  into->beyond += from.beyond;
}

const char* policy_label(metrics::AbsentClassPolicy policy) {
  return policy == metrics::AbsentClassPolicy::kExcludeAbsent ? "exclude"
                                                              : "zero";
}

void add_diag(std::vector<Diagnostic>* diags, Diagnostic::Severity severity,
              std::string message) {
  if (diags != nullptr) diags->push_back({severity, std::move(message)});
}

double require_number(const json& j, const char* key) {
  if (!j.is_number()) throw Error(std::string("'") + key + "' must be a number");
  return j.get<double>();
}

}  // namespace

RunConfig load_run_config(const fs::path& path,
                          std::vector<Diagnostic>* diagnostics) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("invalid JSON in '" + path.string() + "': " + e.what());
  }
  if (!j.is_object()) throw Error("run config must be a JSON object");

  static const std::set<std::string> kKnown = {
      "manifest",        "ensemble",       "validation_ids",
      "validation_fraction", "age_bins",   "absent_classes",
      "include_ensemble_in_errors", "mcnemar_exact_below",
      "workers",         "seed",           "out",
      "prep"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kKnown.count(key))
      add_diag(diagnostics, Diagnostic::Severity::kWarning,
               "unknown config key '" + key + "' ignored");
  }

  RunConfig config;
  if (j.contains("manifest")) {
    if (!j["manifest"].is_string()) throw Error("'manifest' must be a string");
    config.manifest_path = j["manifest"].get<std::string>();
  }
  if (j.contains("ensemble")) {
    if (!j["ensemble"].is_string()) throw Error("'ensemble' must be a string");
    config.ensemble_mode = j["ensemble"].get<std::string>();
  }
  if (j.contains("validation_ids")) {
    if (!j["validation_ids"].is_array())
      throw Error("'validation_ids' must be an array of strings");
    for (const auto& id : j["validation_ids"]) {
      if (!id.is_string())
        throw Error("'validation_ids' must be an array of strings");
      config.validation_ids.push_back(id.get<std::string>());
    }
  }
  if (j.contains("validation_fraction"))
    config.validation_fraction =
        require_number(j["validation_fraction"], "validation_fraction");
  if (j.contains("age_bins")) {
    if (!j["age_bins"].is_array())
      throw Error("'age_bins' must be an array of numbers");
    for (const auto& edge : j["age_bins"])
      config.age_edges.push_back(require_number(edge, "age_bins"));
  }
  if (j.contains("absent_classes")) {
    const std::string policy = j["absent_classes"].is_string()
                                   ? j["absent_classes"].get<std::string>()
                                   : std::string();
    if (policy == "exclude")
      config.absent_policy = metrics::AbsentClassPolicy::kExcludeAbsent;
    else if (policy == "zero")
      config.absent_policy = metrics::AbsentClassPolicy::kScoreZeroAbsent;
    else
      throw Error("'absent_classes' must be \"exclude\" or \"zero\"");
  }
  if (j.contains("include_ensemble_in_errors")) {
    if (!j["include_ensemble_in_errors"].is_boolean())
      throw Error("'include_ensemble_in_errors' must be a boolean");
    config.include_ensemble_in_errors =
        j["include_ensemble_in_errors"].get<bool>();
  }
  if (j.contains("mcnemar_exact_below")) {
    const double v = require_number(j["mcnemar_exact_below"],
                                    "mcnemar_exact_below");
    if (v < 0 || v != std::floor(v))
      throw Error("'mcnemar_exact_below' must be a nonnegative integer");
    config.mcnemar_exact_threshold = static_cast<std::uint64_t>(v);
  }
  if (j.contains("workers")) {
    const double v = require_number(j["workers"], "workers");
    if (v < 0 || v != std::floor(v))
      throw Error("'workers' must be a nonnegative integer");
    config.workers = static_cast<std::size_t>(v);
  }
  if (j.contains("seed")) {
    const double v = require_number(j["seed"], "seed");
    if (v < 0 || v != std::floor(v)) throw Error("'seed' must be a nonnegative integer");
    config.seed = static_cast<std::uint64_t>(v);
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) throw Error("'out' must be a string");
    config.out_dir = j["out"].get<std::string>();
  }
  if (j.contains("prep")) {
    const json& p = j["prep"];
    if (!p.is_object()) throw Error("'prep' must be an object");
    static const std::set<std::string> kPrepKnown = {
        "channels",  "target_rate", "clip_sigma",      "low",
        "high",      "epsilon",     "required_seconds"};
    for (const auto& [key, value] : p.items()) {
      (void)value;
      if (!kPrepKnown.count(key))
        add_diag(diagnostics, Diagnostic::Severity::kWarning,
                 "unknown config key 'prep." + key + "' ignored");
    }
    PrepSettings prep;
    if (!p.contains("channels") || !p["channels"].is_array())
      throw Error("'prep.channels' must be an array");
    for (const auto& channel : p["channels"]) {
      std::vector<std::string> aliases;
      if (channel.is_string()) {
        aliases.push_back(channel.get<std::string>());
      } else if (channel.is_array()) {
        for (const auto& alias : channel) {
          if (!alias.is_string())
            throw Error("'prep.channels' entries must be strings or string arrays");
          aliases.push_back(alias.get<std::string>());
        }
      } else {
        throw Error("'prep.channels' entries must be strings or string arrays");
      }
      prep.channels.push_back(std::move(aliases));
    }
    if (p.contains("target_rate"))
      prep.params.target_rate = require_number(p["target_rate"], "prep.target_rate");
    if (p.contains("clip_sigma"))
      prep.params.clip_sigma = require_number(p["clip_sigma"], "prep.clip_sigma");
    if (p.contains("low")) prep.params.low_hz = require_number(p["low"], "prep.low");
    if (p.contains("high")) prep.params.high_hz = require_number(p["high"], "prep.high");
    if (p.contains("epsilon"))
      prep.params.epsilon = require_number(p["epsilon"], "prep.epsilon");
    if (p.contains("required_seconds"))
      prep.params.required_seconds =
          require_number(p["required_seconds"], "prep.required_seconds");
    config.prep = std::move(prep);
  }
  return config;
}

std::vector<Diagnostic> validate_config(const RunConfig& config) {
  std::vector<Diagnostic> diags;
  const auto error = [&](std::string msg) {
    add_diag(&diags, Diagnostic::Severity::kError, std::move(msg));
  };
  const auto warning = [&](std::string msg) {
    add_diag(&diags, Diagnostic::Severity::kWarning, std::move(msg));
  };

  if (config.manifest_path.empty())
    error("manifest path is empty");
  else if (!fs::exists(config.manifest_path))
    error("manifest '" + config.manifest_path + "' does not exist");
  if (config.out_dir.empty()) error("output directory is empty");
  if (config.ensemble_mode != "avg" && config.ensemble_mode != "learned")
    error("ensemble mode '" + config.ensemble_mode +
          "' is not \"avg\" or \"learned\"");
  if (config.ensemble_mode == "learned" && config.validation_ids.empty() &&
      !(config.validation_fraction > 0.0 && config.validation_fraction <= 1.0))
    error("validation_fraction must be in (0, 1]");
  if (!config.validation_ids.empty()) {
    std::set<std::string> seen;
    for (const auto& id : config.validation_ids)
      if (!seen.insert(id).second)
        warning("validation id '" + id + "' listed more than once");
    if (config.ensemble_mode != "learned")
      warning("validation_ids are ignored in avg mode");
  }
  if (config.age_edges.size() == 1)
    error("age_bins needs at least two edges");
  for (std::size_t i = 1; i < config.age_edges.size(); ++i)
    if (!(config.age_edges[i - 1] < config.age_edges[i])) {
      error("age_bins must be strictly ascending");
      break;
    }
  if (config.workers > 1024)
    warning("workers = " + std::to_string(config.workers) +
            " is likely a mistake");
  if (config.prep) {
    const auto& prep = *config.prep;
    if (prep.channels.empty()) error("prep.channels is empty");
    for (const auto& aliases : prep.channels)
      if (aliases.empty() || aliases.front().empty()) {
        error("every prep channel needs at least one label");
        break;
      }
    const auto& p = prep.params;
    if (!(p.target_rate > 0)) error("prep.target_rate must be positive");
    if (!(p.clip_sigma > 0)) error("prep.clip_sigma must be positive");
    if (!(p.epsilon > 0)) error("prep.epsilon must be positive");
    if (p.required_seconds < 0) error("prep.required_seconds must be nonnegative");
    if (p.target_rate > 0 &&
        !(p.low_hz > 0 && p.low_hz < p.high_hz &&
          p.high_hz < p.target_rate / 2))
      error("prep band must satisfy 0 < low < high < target_rate / 2");
  }
  return diags;
}

RunSummary run_pipeline(const RunConfig& config) {
  {
    std::string problems;
    for (const auto& d : validate_config(config))
      if (d.severity == Diagnostic::Severity::kError) {
        if (!problems.empty()) problems += "; ";
        problems += d.message;
      }
    if (!problems.empty()) throw Error("invalid run config: " + problems);
  }

  const fs::path manifest_path = config.manifest_path;
  const CohortManifest manifest = table_io::read_manifest_json(manifest_path);
  if (manifest.recordings.empty()) throw Error("manifest lists no recordings");

  std::vector<std::string> stager_names;
  for (const auto& [name, path] : manifest.recordings.front().stager_paths) {
    (void)path;
    stager_names.push_back(name);
  }
  if (stager_names.empty())
    throw Error("first recording lists no stager outputs");
  const std::string ensemble_name = "ensemble-" + config.ensemble_mode;
  for (const auto& name : stager_names)
    if (name == ensemble_name)
      throw Error("stager name '" + name + "' collides with the ensemble");

  const fs::path out_dir = config.out_dir;
  fs::create_directories(out_dir);
  const fs::path prep_dir = out_dir / "prep";
  if (config.prep) fs::create_directories(prep_dir);

  // Per-recording loading, parallel into index-ordered slots.
  const std::size_t n_recordings = manifest.recordings.size();
  std::vector<RecordingWork> works(n_recordings);
  parallel_for(n_recordings, config.workers, [&](std::size_t i) {
    load_recording(manifest_path, manifest.recordings[i], stager_names, config,
                   prep_dir, &works[i]);
  });

  RunSummary summary;
  summary.recordings_total = n_recordings;
  summary.ensemble_name = ensemble_name;
  std::vector<std::size_t> evaluated;  // indices into works, manifest order
  for (std::size_t i = 0; i < n_recordings; ++i) {
    if (works[i].ok) {
      evaluated.push_back(i);
    } else {
      summary.failures.push_back(manifest.recordings[i].id + ": " +
                                 works[i].failure);
    }
  }
  summary.recordings_evaluated = evaluated.size();
  summary.recordings_failed = n_recordings - evaluated.size();
  if (evaluated.empty())
    throw Error("every recording failed; first failure: " +
                summary.failures.front());

  const std::size_t n_eval = evaluated.size();
  const std::size_t n_stagers = stager_names.size();
  const std::size_t n_systems = n_stagers + 1;  // ensemble first

  // Ensemble outputs per evaluated recording.
  std::vector<ProbSeq> ensemble_probs;
  ensemble_probs.reserve(n_eval);
  std::vector<std::string> training_ids;
  if (config.ensemble_mode == "learned") {
    std::vector<std::size_t> training;  // positions into evaluated
    if (!config.validation_ids.empty()) {
      for (const auto& id : config.validation_ids) {
        bool found = false;
        for (std::size_t e = 0; e < n_eval; ++e) {
          if (manifest.recordings[evaluated[e]].id == id) {
            training.push_back(e);
            found = true;
            break;
          }
        }
        if (!found)
          throw Error("validation recording '" + id + "' is not available");
      }
    } else {
      std::size_t k = static_cast<std::size_t>(std::ceil(
          config.validation_fraction * static_cast<double>(n_eval)));
      k = std::clamp<std::size_t>(k, 1, n_eval);
      for (std::size_t e = 0; e < k; ++e) training.push_back(e);
    }
    StagerSet pool;
    pool.stager_names = stager_names;
    std::vector<std::vector<double>> pooled_values(n_stagers);
    for (const std::size_t e : training) {
      const RecordingWork& work = works[evaluated[e]];
      training_ids.push_back(manifest.recordings[evaluated[e]].id);
      for (std::size_t m = 0; m < n_stagers; ++m) {
        const auto values = work.outputs[m].values();
        pooled_values[m].insert(pooled_values[m].end(), values.begin(),
                                values.end());
      }
      pool.truth.stages.insert(pool.truth.stages.end(),
                               work.truth.stages.begin(),
                               work.truth.stages.end());
    }
    for (auto& values : pooled_values)
      pool.outputs.emplace_back(std::move(values));
    const auto trained = ensemble::train_weights(pool);
    summary.ensemble_weights = trained.weights;
    for (const std::size_t i : evaluated) {
      StagerSet set{stager_names, works[i].outputs, works[i].truth};
      ensemble_probs.push_back(
          ensemble::apply_weights(set, trained.weights));
    }
  } else {
    for (const std::size_t i : evaluated) {
      StagerSet set{stager_names, works[i].outputs, works[i].truth};
      ensemble_probs.push_back(ensemble::average_probs(set));
    }
  }

  std::vector<std::string> system_names;
  system_names.push_back(ensemble_name);
  system_names.insert(system_names.end(), stager_names.begin(),
                      stager_names.end());

  const auto probs_of = [&](std::size_t system, std::size_t e) -> const ProbSeq& {
    return system == 0 ? ensemble_probs[e]
                       : works[evaluated[e]].outputs[system - 1];
  };

  // Harden every system on every recording and accumulate per-recording
  // evaluations for the pooled and stratified reports.
  std::vector<std::vector<Hypnogram>> sys_hyps(n_systems);
  std::vector<std::vector<metrics::RecordingEval>> sys_evals(n_systems);
  for (std::size_t s = 0; s < n_systems; ++s) {
    sys_hyps[s].resize(n_eval);
    sys_evals[s].resize(n_eval);
  }
  parallel_for(n_eval, config.workers, [&](std::size_t e) {
    const RecordingWork& work = works[evaluated[e]];
    const RecordingEntry& entry = manifest.recordings[evaluated[e]];
    const auto len = static_cast<std::uint64_t>(work.truth.length());
    for (std::size_t s = 0; s < n_systems; ++s) {
      const ProbSeq& probs = probs_of(s, e);
      sys_hyps[s][e] = hardened(probs);
      metrics::RecordingEval& eval = sys_evals[s][e];
      eval.id = entry.id;
      eval.age_years = entry.age_years;
      eval.ahi = entry.ahi;
      eval.cm = metrics::confusion(sys_hyps[s][e], work.truth);
      eval.nll_sum = metrics::nll(probs, work.truth) * static_cast<double>(len);
      eval.brier_sum =
          metrics::brier(probs, work.truth) * static_cast<double>(len);
      eval.prob_epochs = len;
      eval.has_probs = true;
    }
  });

  // Pooled per-system reports.
  std::uint64_t total_epochs = 0;
  for (const std::size_t i : evaluated)
    total_epochs += static_cast<std::uint64_t>(works[i].truth.length());
  summary.epochs = total_epochs;
  for (std::size_t s = 0; s < n_systems; ++s) {
    metrics::ConfusionMatrix cm;
    double nll_sum = 0.0;
    double brier_sum = 0.0;
    for (std::size_t e = 0; e < n_eval; ++e) {
      cm += sys_evals[s][e].cm;
      nll_sum += sys_evals[s][e].nll_sum;
      brier_sum += sys_evals[s][e].brier_sum;
    }
    summary.systems.push_back(
        {system_names[s],
         metrics::pooled_report(cm, config.absent_policy, nll_sum, brier_sum,
                                total_epochs, true)});
  }

  // Concatenated label sequences for the agreement matrix and paired tests.
  Hypnogram truth_concat;
  truth_concat.stages.reserve(total_epochs);
  for (const std::size_t i : evaluated)
    truth_concat.stages.insert(truth_concat.stages.end(),
                               works[i].truth.stages.begin(),
                               works[i].truth.stages.end());
  std::vector<Hypnogram> sys_concat(n_systems);
  for (std::size_t s = 0; s < n_systems; ++s) {
    sys_concat[s].stages.reserve(total_epochs);
    for (std::size_t e = 0; e < n_eval; ++e)
      sys_concat[s].stages.insert(sys_concat[s].stages.end(),
                                  sys_hyps[s][e].stages.begin(),
                                  sys_hyps[s][e].stages.end());
  }
  const auto kappa_matrix = metrics::pairwise_kappa(sys_concat, truth_concat);

  // Age bin edges default to whole years spanning the evaluated cohort.
  std::vector<double> age_edges = config.age_edges;
  if (age_edges.empty()) {
    double lo = manifest.recordings[evaluated.front()].age_years;
    double hi = lo;
    for (const std::size_t i : evaluated) {
      lo = std::min(lo, manifest.recordings[i].age_years);
      hi = std::max(hi, manifest.recordings[i].age_years);
    }
    lo = std::floor(lo);
    hi = std::ceil(hi);
    if (!(hi > lo)) hi = lo + 1.0;
    for (double edge = lo; edge <= hi; edge += 1.0) age_edges.push_back(edge);
  }

  // Clinical measures per system per recording, as relative errors against
  // the reference hypnogram's measures.
  std::vector<clinical::ClinicalMeasures> truth_measures(n_eval);
  for (std::size_t e = 0; e < n_eval; ++e)
    truth_measures[e] = clinical::clinical_measures(works[evaluated[e]].truth);
  // [system][measure][recording]
  constexpr std::size_t kMeasures = 4;
  static const char* const kMeasureNames[kMeasures] = {
      "tst", "waso", "rem_latency", "sleep_efficiency"};
  std::vector<std::array<std::vector<std::optional<double>>, kMeasures>>
      clin_errors(n_systems);
  for (std::size_t s = 0; s < n_systems; ++s) {
    for (auto& per_measure : clin_errors[s]) per_measure.resize(n_eval);
    for (std::size_t e = 0; e < n_eval; ++e) {
      const auto measures = clinical::clinical_measures(sys_hyps[s][e]);
      const auto errors =
          clinical::relative_errors(measures, truth_measures[e]);
      clin_errors[s][0][e] = errors.total_sleep_time_pct;
      clin_errors[s][1][e] = errors.wake_after_sleep_onset_pct;
      clin_errors[s][2][e] = errors.rem_latency_pct;
      clin_errors[s][3][e] = errors.sleep_efficiency_pct;
    }
  }

  // Error structure over the chosen systems (at least two needed).
  std::vector<std::size_t> err_systems;
  if (config.include_ensemble_in_errors)
    for (std::size_t s = 0; s < n_systems; ++s) err_systems.push_back(s);
  else
    for (std::size_t s = 1; s < n_systems; ++s) err_systems.push_back(s);
  error_analysis::DistanceHistogram common_hist;
  std::vector<error_analysis::DistanceHistogram> other_hist(
      err_systems.size());
  std::map<error_analysis::StagePattern, std::uint64_t> common_patterns;
  std::uint64_t common_total = 0;
  if (err_systems.size() >= 2) {
    std::vector<std::string> err_names;
    for (const std::size_t s : err_systems)
      err_names.push_back(system_names[s]);
    for (std::size_t e = 0; e < n_eval; ++e) {
      const Hypnogram& truth = works[evaluated[e]].truth;
      std::vector<Hypnogram> predictions;
      predictions.reserve(err_systems.size());
      for (const std::size_t s : err_systems)
        predictions.push_back(sys_hyps[s][e]);
      const auto classified =
          error_analysis::classify_errors(predictions, err_names, truth);
      std::vector<std::size_t> common_epochs;
      std::vector<std::vector<std::size_t>> other_epochs(err_systems.size());
      for (const auto& record : classified.records) {
        if (record.is_common) {
          common_epochs.push_back(record.epoch);
          continue;
        }
        for (std::size_t k = 0; k < err_systems.size(); ++k)
          if (record.predictions[k] != record.truth_stage)
            other_epochs[k].push_back(record.epoch);
      }
      accumulate(&common_hist,
                 error_analysis::distance_histogram(truth, common_epochs));
      for (std::size_t k = 0; k < err_systems.size(); ++k)
        accumulate(&other_hist[k],
                   error_analysis::distance_histogram(truth, other_epochs[k]));
      for (const auto& [pattern, count] :
           error_analysis::pattern_counts(truth, common_epochs))
        common_patterns[pattern] += count;
      common_total += common_epochs.size();
    }
  }

  // ---- Bundle writers ----

  {  // metrics_overall.csv
    std::string csv =
        "system,epochs,accuracy,kappa,mf1,sensitivity,specificity,nll,brier\n";
    for (const auto& sys : summary.systems) {
      const auto& r = sys.report;
      csv += csv_cell(sys.name) + "," + std::to_string(total_epochs) + "," +
             fmt_cell(r.accuracy) + "," + fmt_cell(r.kappa) + "," +
             fmt_cell(r.mf1) + "," + fmt_cell(r.sensitivity) + "," +
             fmt_cell(r.specificity) + "," + fmt_cell(r.nll) + "," +
             fmt_cell(r.brier) + "\n";
    }
    write_text_file(out_dir / "metrics_overall.csv", csv);
  }

  {  // metrics_classwise.csv
    std::string csv = "system,stage,f1,present\n";
    for (const auto& sys : summary.systems)
      for (std::size_t c = 0; c < kStageCount; ++c)
        csv += csv_cell(sys.name) + "," +
               to_string(stage_from_index(static_cast<int>(c))) + "," +
               fmt_cell(sys.report.class_f1[c]) + "," +
               (sys.report.class_present[c] ? "1" : "0") + "\n";
    write_text_file(out_dir / "metrics_classwise.csv", csv);
  }

  {  // metrics_stratified.csv
    std::string csv =
        "system,stratum,recordings,epochs,accuracy,kappa,mf1,sensitivity,"
        "specificity,nll,brier\n";
    for (std::size_t s = 0; s < n_systems; ++s) {
      auto strata =
          metrics::stratify_by_age(sys_evals[s], age_edges, config.absent_policy);
      const auto severity =
          metrics::stratify_by_severity(sys_evals[s], config.absent_policy);
      strata.insert(strata.end(), severity.begin(), severity.end());
      for (const auto& stratum : strata) {
        const auto& r = stratum.report;
        csv += csv_cell(system_names[s]) + "," + csv_cell(stratum.label) + "," +
               std::to_string(stratum.recording_count) + "," +
               std::to_string(stratum.epoch_count) + "," +
               fmt_cell(r.accuracy) + "," + fmt_cell(r.kappa) + "," +
               fmt_cell(r.mf1) + "," + fmt_cell(r.sensitivity) + "," +
               fmt_cell(r.specificity) + "," + fmt_cell(r.nll) + "," +
               fmt_cell(r.brier) + "\n";
      }
    }
    write_text_file(out_dir / "metrics_stratified.csv", csv);
  }

  {  // kappa_matrix.csv
    std::string csv = "system";
    for (const auto& name : system_names) csv += "," + csv_cell(name);
    csv += ",truth\n";
    const auto row_name = [&](std::size_t i) {
      return i < n_systems ? csv_cell(system_names[i]) : std::string("truth");
    };
    for (std::size_t i = 0; i < kappa_matrix.size(); ++i) {
      csv += row_name(i);
      for (const double value : kappa_matrix[i]) csv += "," + fmt_cell(value);
      csv += "\n";
    }
    write_text_file(out_dir / "kappa_matrix.csv", csv);
  }

  {  // mcnemar.csv
    std::string csv =
        "system_a,system_b,only_a_correct,only_b_correct,statistic,p_value,"
        "exact\n";
    for (std::size_t a = 0; a < n_systems; ++a)
      for (std::size_t b = a + 1; b < n_systems; ++b) {
        const auto result =
            metrics::mcnemar(sys_concat[a], sys_concat[b], truth_concat,
                             config.mcnemar_exact_threshold);
        csv += csv_cell(system_names[a]) + "," + csv_cell(system_names[b]) + "," +
               std::to_string(result.only_a_correct) + "," +
               std::to_string(result.only_b_correct) + "," +
               fmt_cell(result.statistic) + "," + fmt_cell(result.p_value) +
               "," + (result.exact ? "1" : "0") + "\n";
      }
    write_text_file(out_dir / "mcnemar.csv", csv);
  }

  {  // clinical.csv: relative-error summaries plus paired tests vs ensemble
    std::string csv =
        "system,measure,recordings,mean_abs_err_pct,sd_abs_err_pct,"
        "t_vs_ensemble,p_vs_ensemble\n";
    for (std::size_t s = 0; s < n_systems; ++s)
      for (std::size_t m = 0; m < kMeasures; ++m) {
        const auto stats = summarize(clin_errors[s][m]);
        std::string t_cell, p_cell;
        if (s != 0) {
          try {
            const auto test =
                clinical::paired_t_test(clin_errors[s][m], clin_errors[0][m]);
            t_cell = fmt_cell(test.t);
            p_cell = fmt_cell(test.p_value);
          } catch (const clinical::TooFewPairs&) {
          }
        }
        csv += csv_cell(system_names[s]) + "," + kMeasureNames[m] + "," +
               std::to_string(stats.n) + "," + fmt_cell(stats.mean) + "," +
               fmt_cell(stats.sd) + "," + t_cell + "," + p_cell + "\n";
      }
    write_text_file(out_dir / "clinical.csv", csv);
  }

  {  // errors_histogram.csv
    static const char* const kBuckets[] = {"rapid", "-4", "-3", "-2", "-1",
                                           "+1",    "+2", "+3", "+4", "beyond"};
    const auto bucket_counts =
        [](const error_analysis::DistanceHistogram& hist) {
          return std::array<std::uint64_t, 10>{
              hist.rapid,     hist.before[3], hist.before[2], hist.before[1],
              hist.before[0], hist.after[0],  hist.after[1],  hist.after[2],
              hist.after[3],  hist.beyond};
        };
    std::string csv = "scope,bucket,count,fraction\n";
    const auto emit = [&](const std::string& scope,
                          const error_analysis::DistanceHistogram& hist) {
      const auto counts = bucket_counts(hist);
      const std::uint64_t total = hist.total();
      for (std::size_t k = 0; k < counts.size(); ++k) {
        const double fraction =
            total == 0 ? 0.0
                       : static_cast<double>(counts[k]) /
                             static_cast<double>(total);
        csv += csv_cell(scope) + "," + kBuckets[k] + "," + std::to_string(counts[k]) +
               "," + fmt_cell(fraction) + "\n";
      }
    };
    if (err_systems.size() >= 2) {
      emit("common", common_hist);
      for (std::size_t k = 0; k < err_systems.size(); ++k)
        emit(system_names[err_systems[k]], other_hist[k]);
    }
    write_text_file(out_dir / "errors_histogram.csv", csv);
  }

  {  // error_patterns.csv: common-error stage context, most frequent first
    std::vector<std::pair<error_analysis::StagePattern, std::uint64_t>> rows(
        common_patterns.begin(), common_patterns.end());
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) {
                       return a.second > b.second;
                     });
    std::string csv = "prev,self,next,count,fraction\n";
    for (const auto& [pattern, count] : rows) {
      const double fraction =
          common_total == 0
              ? 0.0
              : static_cast<double>(count) / static_cast<double>(common_total);
      csv += std::string(to_string(pattern[0])) + "," + to_string(pattern[1]) +
             "," + to_string(pattern[2]) + "," + std::to_string(count) + "," +
             fmt_cell(fraction) + "\n";
    }
    write_text_file(out_dir / "error_patterns.csv", csv);
  }

  {  // summary.json
    json j;
    j["absent_class_policy"] = policy_label(config.absent_policy);
    j["seed"] = config.seed;
    j["epochs"] = total_epochs;
    j["recordings"] = {{"total", summary.recordings_total},
                       {"evaluated", summary.recordings_evaluated},
                       {"failed", summary.recordings_failed}};
    j["failures"] = summary.failures;
    json ens;
    ens["mode"] = config.ensemble_mode;
    ens["name"] = ensemble_name;
    if (config.ensemble_mode == "learned") {
      json weights = json::object();
      for (std::size_t m = 0; m < n_stagers; ++m)
        weights[stager_names[m]] = summary.ensemble_weights[m];
      ens["weights"] = weights;
      ens["training_recordings"] = training_ids;
    } else {
      ens["weights"] = nullptr;
      ens["training_recordings"] = nullptr;
    }
    j["ensemble"] = ens;
    json systems = json::array();
    for (const auto& sys : summary.systems) {
      const auto& r = sys.report;
      json entry;
      entry["name"] = sys.name;
      entry["accuracy"] = r.accuracy;
      entry["kappa"] = r.kappa;
      entry["mf1"] = r.mf1;
      entry["sensitivity"] = r.sensitivity;
      entry["specificity"] = r.specificity;
      entry["nll"] = r.nll;
      entry["brier"] = r.brier;
      json f1s = json::object();
      for (std::size_t c = 0; c < kStageCount; ++c)
        f1s[to_string(stage_from_index(static_cast<int>(c)))] =
            r.class_present[c] ? json(r.class_f1[c]) : json(nullptr);
      entry["class_f1"] = f1s;
      systems.push_back(entry);
    }
    j["systems"] = systems;
    write_text_file(out_dir / "summary.json", j.dump(2) + "\n");
  }

  return summary;
}

}  // namespace stagerbench::pipeline
