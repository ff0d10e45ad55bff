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

// Command-line front end: preprocess recordings, build ensembles, score
// stagers, summarize clinical agreement, analyze error structure, generate
// synthetic cohorts, and run the whole evaluation bundle.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stagerbench/clinical.hpp"
#include "stagerbench/edf.hpp"
#include "stagerbench/ensemble.hpp"
#include "stagerbench/error_analysis.hpp"
#include "stagerbench/kernels.hpp"
#include "stagerbench/metrics.hpp"
#include "stagerbench/pipeline.hpp"
#include "stagerbench/sigprep.hpp"
#include "stagerbench/synth.hpp"
#include "stagerbench/table_io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace stagerbench;

std::string fmt(double value) {
  if (std::isnan(value)) return "";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("short write to '" + path.string() + "'");
}

// Splits "label,alias,alias" into an alias list.
std::vector<std::string> split_aliases(const std::string& spec) {
  std::vector<std::string> aliases;
  std::string current;
  for (const char c : spec) {
    if (c == ',') {
      aliases.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  aliases.push_back(current);
  return aliases;
}

struct LoadedCohort {
  fs::path manifest_path;
  CohortManifest manifest;
  std::vector<std::string> stager_names;
  // Parallel to manifest.recordings.
  std::vector<Hypnogram> truths;
  std::vector<std::vector<ProbSeq>> outputs;  // [recording][stager]
};

// Strict loader for the single-purpose subcommands: any unreadable
// recording is an error (the full pipeline is the layer with per-recording
// failure tolerance).
LoadedCohort load_cohort(const std::string& manifest_arg) {
  LoadedCohort cohort;
  cohort.manifest_path = manifest_arg;
  cohort.manifest = table_io::read_manifest_json(cohort.manifest_path);
  if (cohort.manifest.recordings.empty())
    throw Error("manifest lists no recordings");
  for (const auto& [name, path] :
       cohort.manifest.recordings.front().stager_paths) {
    (void)path;
    cohort.stager_names.push_back(name);
  }
  if (cohort.stager_names.empty())
    throw Error("first recording lists no stager outputs");
  for (const auto& entry : cohort.manifest.recordings) {
    if (entry.truth_path.empty())
      throw Error("recording '" + entry.id + "' has no reference hypnogram");
    Hypnogram truth = table_io::read_hypnogram_csv(
        table_io::resolve_manifest_path(cohort.manifest_path, entry.truth_path));
    if (truth.empty())
      throw Error("recording '" + entry.id + "' has an empty reference");
    std::vector<ProbSeq> outputs;
    for (const auto& name : cohort.stager_names) {
      const auto it = entry.stager_paths.find(name);
      if (it == entry.stager_paths.end())
        throw Error("recording '" + entry.id + "' lacks stager '" + name + "'");
      auto seq = table_io::read_probseq_csv(
          table_io::resolve_manifest_path(cohort.manifest_path, it->second));
      if (seq.length() != truth.length())
        throw LengthMismatch("recording '" + entry.id + "', stager '" + name +
                             "': " + std::to_string(seq.length()) +
                             " epochs vs " + std::to_string(truth.length()));
      outputs.push_back(std::move(seq));
    }
    cohort.truths.push_back(std::move(truth));
    cohort.outputs.push_back(std::move(outputs));
  }
  return cohort;
}

StagerSet recording_set(const LoadedCohort& cohort, std::size_t r) {
  return StagerSet{cohort.stager_names, cohort.outputs[r], cohort.truths[r]};
}

StagerSet pooled_set(const LoadedCohort& cohort,
                     const std::vector<std::size_t>& recordings) {
  StagerSet pool;
  pool.stager_names = cohort.stager_names;
  std::vector<std::vector<double>> values(cohort.stager_names.size());
  for (const std::size_t r : recordings) {
    for (std::size_t m = 0; m < values.size(); ++m) {
      const auto row = cohort.outputs[r][m].values();
      values[m].insert(values[m].end(), row.begin(), row.end());
    }
    pool.truth.stages.insert(pool.truth.stages.end(),
                             cohort.truths[r].stages.begin(),
                             cohort.truths[r].stages.end());
  }
  for (auto& v : values) pool.outputs.emplace_back(std::move(v));
  return pool;
}

void emit_or_print(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
}

// ---- prep ----

int cmd_prep(const std::string& edf_arg,
             const std::vector<std::string>& channel_specs,
             const std::string& id, const std::string& out_dir,
             const sigprep::PrepParams& params) {
  const auto bytes = edf::read_file_bytes(edf_arg);
  const auto parsed = edf::parse_edf_header(bytes);
  std::vector<SignalTrace> channels;
  for (const auto& spec : channel_specs) {
    const auto aliases = split_aliases(spec);
    const int index = edf::find_channel(parsed.signals, aliases);
    if (index < 0)
      throw Error("channel '" + aliases.front() + "' not found in '" +
                  edf_arg + "'");
    channels.push_back(
        edf::read_signal(bytes, parsed, static_cast<std::size_t>(index)));
  }
  sigprep::PrepParams effective = params;
  effective.recording_id =
      id.empty() ? fs::path(edf_arg).stem().string() : id;
  const auto result =
      sigprep::preprocess_recording(std::move(channels), effective);
  fs::create_directories(out_dir);
  const fs::path base = fs::path(out_dir) / effective.recording_id;
  table_io::write_quality_json(base.string() + "_quality.json",
                               result.quality);
  if (!result.quality.passed) {
    std::cerr << effective.recording_id << ": quality gate failed ("
              << fmt(result.quality.good_seconds) << " usable seconds)\n";
    return 2;
  }
  table_io::write_epoch_grid(base.string() + "_epochs.f32le", result.epochs);
  std::cout << effective.recording_id << ": " << result.epochs.epoch_count()
            << " epochs, " << fmt(result.quality.good_seconds)
            << " usable seconds\n";
  return 0;
}

// ---- ensemble ----

int cmd_ensemble(const std::string& manifest_arg, const std::string& mode,
                 const std::vector<std::string>& train_ids, double fraction,
                 const std::string& weights_out, const std::string& emit_dir) {
  const auto cohort = load_cohort(manifest_arg);
  const std::size_t n = cohort.manifest.recordings.size();
  std::vector<double> weights;
  if (mode == "learned") {
    std::vector<std::size_t> training;
    if (!train_ids.empty()) {
      for (const auto& id : train_ids) {
        bool found = false;
        for (std::size_t r = 0; r < n; ++r)
          if (cohort.manifest.recordings[r].id == id) {
            training.push_back(r);
            found = true;
            break;
          }
        if (!found) throw Error("training recording '" + id + "' not found");
      }
    } else {
      std::size_t k = static_cast<std::size_t>(
          std::ceil(fraction * static_cast<double>(n)));
      k = std::clamp<std::size_t>(k, 1, n);
      for (std::size_t r = 0; r < k; ++r) training.push_back(r);
    }
    const auto trained =
        ensemble::train_weights(pooled_set(cohort, training));
    weights = trained.weights;
    std::cerr << "trained on " << training.size() << " recording(s), "
              << trained.loss_log.size() - 1 << " pass(es), final loss "
              << fmt(trained.loss_log.back()) << "\n";
  } else {
    weights.assign(cohort.stager_names.size(),
                   1.0 / static_cast<double>(cohort.stager_names.size()));
  }
  if (!weights_out.empty())
    table_io::write_weights_json(weights_out,
                                 {cohort.stager_names, weights});
  if (!emit_dir.empty()) {
    fs::create_directories(emit_dir);
    for (std::size_t r = 0; r < n; ++r) {
      const auto set = recording_set(cohort, r);
      const ProbSeq combined = mode == "learned"
                                   ? ensemble::apply_weights(set, weights)
                                   : ensemble::average_probs(set);
      table_io::write_probseq_csv(
          fs::path(emit_dir) / (cohort.manifest.recordings[r].id + ".csv"),
          combined);
    }
  }
  for (std::size_t m = 0; m < cohort.stager_names.size(); ++m)
    std::cout << cohort.stager_names[m] << "," << fmt(weights[m]) << "\n";
  return 0;
}

// ---- eval ----

int cmd_eval(const std::string& manifest_arg, const std::string& absent,
             const std::string& out) {
  const auto cohort = load_cohort(manifest_arg);
  const auto policy = absent == "zero"
                          ? metrics::AbsentClassPolicy::kScoreZeroAbsent
                          : metrics::AbsentClassPolicy::kExcludeAbsent;
  std::string csv =
      "system,epochs,accuracy,kappa,mf1,sensitivity,specificity,nll,brier\n";
  for (std::size_t m = 0; m < cohort.stager_names.size(); ++m) {
    metrics::ConfusionMatrix cm;
    double nll_sum = 0.0;
    double brier_sum = 0.0;
    std::uint64_t epochs = 0;
    for (std::size_t r = 0; r < cohort.manifest.recordings.size(); ++r) {
      const Hypnogram pred = hardened(cohort.outputs[r][m]);
      cm += metrics::confusion(pred, cohort.truths[r]);
      const auto len = static_cast<double>(cohort.truths[r].length());
      nll_sum += metrics::nll(cohort.outputs[r][m], cohort.truths[r]) * len;
      brier_sum +=
          metrics::brier(cohort.outputs[r][m], cohort.truths[r]) * len;
      epochs += cohort.truths[r].length();
    }
    const auto report =
        metrics::pooled_report(cm, policy, nll_sum, brier_sum, epochs, true);
    csv += cohort.stager_names[m] + "," + std::to_string(epochs) + "," +
           fmt(report.accuracy) + "," + fmt(report.kappa) + "," +
           fmt(report.mf1) + "," + fmt(report.sensitivity) + "," +
           fmt(report.specificity) + "," + fmt(report.nll) + "," +
           fmt(report.brier) + "\n";
  }
  emit_or_print(out, csv);
  return 0;
}

// ---- clinical ----

int cmd_clinical(const std::string& manifest_arg, const std::string& out) {
  const auto cohort = load_cohort(manifest_arg);
  std::string csv =
      "recording,system,tst_min,waso_min,rem_latency_min,"
      "sleep_efficiency_pct,tst_err_pct,waso_err_pct,rem_latency_err_pct,"
      "sleep_efficiency_err_pct\n";
  const auto cell = [](const std::optional<double>& v) {
    return v ? fmt(*v) : std::string();
  };
  for (std::size_t r = 0; r < cohort.manifest.recordings.size(); ++r) {
    const auto& id = cohort.manifest.recordings[r].id;
    const auto reference = clinical::clinical_measures(cohort.truths[r]);
    csv += id + ",reference," + fmt(reference.total_sleep_time_min) + "," +
           fmt(reference.wake_after_sleep_onset_min) + "," +
           cell(reference.rem_latency_min) + "," +
           fmt(reference.sleep_efficiency_pct) + ",,,,\n";
    for (std::size_t m = 0; m < cohort.stager_names.size(); ++m) {
      const auto measures =
          clinical::clinical_measures(hardened(cohort.outputs[r][m]));
      const auto errors = clinical::relative_errors(measures, reference);
      csv += id + "," + cohort.stager_names[m] + "," +
             fmt(measures.total_sleep_time_min) + "," +
             fmt(measures.wake_after_sleep_onset_min) + "," +
             cell(measures.rem_latency_min) + "," +
             fmt(measures.sleep_efficiency_pct) + "," +
             cell(errors.total_sleep_time_pct) + "," +
             cell(errors.wake_after_sleep_onset_pct) + "," +
             cell(errors.rem_latency_pct) + "," +
             cell(errors.sleep_efficiency_pct) + "\n";
    }
  }
  emit_or_print(out, csv);
  return 0;
}

// ---- errors ----

int cmd_errors(const std::string& manifest_arg, const std::string& out_dir) {
  const auto cohort = load_cohort(manifest_arg);
  if (cohort.stager_names.size() < 2)
    throw Error("error structure needs at least two stagers");
  error_analysis::DistanceHistogram common_hist;
  std::vector<error_analysis::DistanceHistogram> other_hist(
      cohort.stager_names.size());
  std::map<error_analysis::StagePattern, std::uint64_t> patterns;
  std::uint64_t common_total = 0;
  const auto add = [](error_analysis::DistanceHistogram* into,
                      const error_analysis::DistanceHistogram& from) {
    into->rapid += from.rapid;
    for (std::size_t k = 0; k < 4; ++k) {
      into->before[k] += from.before[k];
      into->after[k] += from.after[k];
    }
    into->beyond += from.beyond;
  };
  for (std::size_t r = 0; r < cohort.manifest.recordings.size(); ++r) {
    const Hypnogram& truth = cohort.truths[r];
    std::vector<Hypnogram> predictions;
    for (const auto& seq : cohort.outputs[r])
      predictions.push_back(hardened(seq));
    const auto classified = error_analysis::classify_errors(
        predictions, cohort.stager_names, truth);
    std::vector<std::size_t> common_epochs;
    std::vector<std::vector<std::size_t>> other_epochs(predictions.size());
    for (const auto& record : classified.records) {
      if (record.is_common) {
        common_epochs.push_back(record.epoch);
        continue;
      }
      for (std::size_t m = 0; m < predictions.size(); ++m)
        if (record.predictions[m] != record.truth_stage)
          other_epochs[m].push_back(record.epoch);
    }
    add(&common_hist,
        error_analysis::distance_histogram(truth, common_epochs));
    for (std::size_t m = 0; m < predictions.size(); ++m)
      add(&other_hist[m],
          error_analysis::distance_histogram(truth, other_epochs[m]));
    for (const auto& [pattern, count] :
         error_analysis::pattern_counts(truth, common_epochs))
      patterns[pattern] += count;
    common_total += common_epochs.size();
  }

  fs::create_directories(out_dir);
  static const char* const kBuckets[] = {"rapid", "-4", "-3", "-2", "-1",
                                         "+1",    "+2", "+3", "+4", "beyond"};
  std::string hist_csv = "scope,bucket,count,fraction\n";
  const auto emit = [&](const std::string& scope,
                        const error_analysis::DistanceHistogram& hist) {
    const std::array<std::uint64_t, 10> counts{
        hist.rapid,     hist.before[3], hist.before[2], hist.before[1],
        hist.before[0], hist.after[0],  hist.after[1],  hist.after[2],
        hist.after[3],  hist.beyond};
    const std::uint64_t total = hist.total();
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double fraction = total == 0 ? 0.0
                                         : static_cast<double>(counts[k]) /
                                               static_cast<double>(total);
      hist_csv += scope + "," + kBuckets[k] + "," +
                  std::to_string(counts[k]) + "," + fmt(fraction) + "\n";
    }
  };
  emit("common", common_hist);
  for (std::size_t m = 0; m < cohort.stager_names.size(); ++m)
    emit(cohort.stager_names[m], other_hist[m]);
  write_text(fs::path(out_dir) / "errors_histogram.csv", hist_csv);

  std::vector<std::pair<error_analysis::StagePattern, std::uint64_t>> rows(
      patterns.begin(), patterns.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  std::string pat_csv = "prev,self,next,count,fraction\n";
  for (const auto& [pattern, count] : rows) {
    const double fraction =
        common_total == 0
            ? 0.0
            : static_cast<double>(count) / static_cast<double>(common_total);
    pat_csv += std::string(to_string(pattern[0])) + "," +
               to_string(pattern[1]) + "," + to_string(pattern[2]) + "," +
               std::to_string(count) + "," + fmt(fraction) + "\n";
  }
  write_text(fs::path(out_dir) / "error_patterns.csv", pat_csv);
  std::cout << common_total << " common error epoch(s) across "
            << cohort.manifest.recordings.size() << " recording(s)\n";
  return 0;
}

// ---- synth ----

int cmd_synth(const std::string& out_dir, std::size_t recordings,
              std::size_t epochs, const std::vector<std::string>& stager_specs,
              double concentration, std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.n_recordings = recordings;
  spec.epochs_per_recording = epochs;
  spec.concentration = concentration;
  spec.seed = seed;
  for (const auto& raw : stager_specs) {
    const auto eq = raw.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error("stager spec '" + raw + "' is not name=diagonal");
    const std::string name = raw.substr(0, eq);
    char* end = nullptr;
    const double diag = std::strtod(raw.c_str() + eq + 1, &end);
    if (end == nullptr || *end != '\0')
      throw Error("stager spec '" + raw + "' has a malformed diagonal");
    spec.stagers.push_back({name, synth::diagonal_confusion(diag)});
  }
  if (spec.stagers.empty()) {
    spec.stagers.push_back({"stager-a", synth::diagonal_confusion(0.85)});
    spec.stagers.push_back({"stager-b", synth::diagonal_confusion(0.80)});
    spec.stagers.push_back({"stager-c", synth::diagonal_confusion(0.75)});
    spec.stagers.push_back({"stager-d", synth::diagonal_confusion(0.70)});
  }
  auto cohort = synth::generate_synthetic_cohort(spec);

  const fs::path root = out_dir;
  fs::create_directories(root / "truth");
  for (const auto& name : cohort.stager_names)
    fs::create_directories(root / "probs" / name);
  CohortManifest manifest;
  for (auto& recording : cohort.recordings) {
    RecordingEntry entry = recording.entry;
    entry.truth_path = "truth/" + entry.id + ".csv";
    table_io::write_hypnogram_csv(root / entry.truth_path,
                                  recording.set.truth);
    for (std::size_t m = 0; m < cohort.stager_names.size(); ++m) {
      const auto& name = cohort.stager_names[m];
      entry.stager_paths[name] = "probs/" + name + "/" + entry.id + ".csv";
      table_io::write_probseq_csv(root / entry.stager_paths[name],
                                  recording.set.outputs[m]);
    }
    manifest.recordings.push_back(std::move(entry));
  }
  table_io::write_manifest_json(root / "manifest.json", manifest);
  std::cout << "wrote " << manifest.recordings.size() << " recording(s), "
            << cohort.stager_names.size() << " stager(s) to " << out_dir
            << "\n";
  return 0;
}

// ---- run ----

int cmd_run(const std::string& config_path, const std::string& out_override,
            const std::optional<std::uint64_t>& seed_override,
            const std::optional<std::size_t>& workers_override) {
  std::vector<pipeline::Diagnostic> diags;
  pipeline::RunConfig config = pipeline::load_run_config(config_path, &diags);
  // Paths in the config resolve against the config file's directory, like
  // manifest entries against the manifest.
  const fs::path config_dir = fs::path(config_path).parent_path();
  if (!config.manifest_path.empty() &&
      !fs::path(config.manifest_path).is_absolute())
    config.manifest_path = (config_dir / config.manifest_path).string();
  if (!out_override.empty())
    config.out_dir = out_override;
  else if (!config.out_dir.empty() && !fs::path(config.out_dir).is_absolute())
    config.out_dir = (config_dir / config.out_dir).string();
  if (seed_override) config.seed = *seed_override;
  if (workers_override) config.workers = *workers_override;
  for (const auto& d : validate_config(config)) diags.push_back(d);
  bool fatal = false;
  for (const auto& d : diags) {
    const char* tag =
        d.severity == pipeline::Diagnostic::Severity::kError ? "error"
        : d.severity == pipeline::Diagnostic::Severity::kWarning ? "warning"
                                                                 : "note";
    std::cerr << tag << ": " << d.message << "\n";
    fatal = fatal || d.severity == pipeline::Diagnostic::Severity::kError;
  }
  if (fatal) return 1;
  const auto summary = pipeline::run_pipeline(config);
  std::cout << summary.recordings_evaluated << "/"
            << summary.recordings_total << " recording(s), "
            << summary.epochs << " epochs; wrote " << config.out_dir << "\n";
  for (const auto& sys : summary.systems)
    std::cout << "  " << sys.name << ": accuracy " << fmt(sys.report.accuracy)
              << ", kappa " << fmt(sys.report.kappa) << ", mf1 "
              << fmt(sys.report.mf1) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sleep staging evaluation toolkit"};
  app.require_subcommand(1);

  // prep
  auto* prep = app.add_subcommand(
      "prep", "Condition one EDF recording into scored epochs");
  std::string prep_edf, prep_id, prep_out = ".";
  std::vector<std::string> prep_channels;
  sigprep::PrepParams prep_params;
  prep->add_option("--edf", prep_edf, "EDF file")->required();
  prep->add_option("--channel", prep_channels,
                   "channel label with optional comma-separated aliases")
      ->required();
  prep->add_option("--id", prep_id, "recording id (default: EDF stem)");
  prep->add_option("--out", prep_out, "output directory");
  prep->add_option("--rate", prep_params.target_rate, "target rate, Hz");
  prep->add_option("--low", prep_params.low_hz, "band-pass low cut, Hz");
  prep->add_option("--high", prep_params.high_hz, "band-pass high cut, Hz");
  prep->add_option("--clip-sigma", prep_params.clip_sigma,
                   "outlier clip width, standard deviations");
  prep->add_option("--epsilon", prep_params.epsilon,
                   "flatline threshold relative to the recording peak");
  prep->add_option("--required-seconds", prep_params.required_seconds,
                   "usable seconds required to pass the quality gate");

  // ensemble
  auto* ens = app.add_subcommand(
      "ensemble", "Combine stager probabilities over a cohort");
  std::string ens_manifest, ens_mode = "avg", ens_weights, ens_emit;
  std::vector<std::string> ens_train;
  double ens_fraction = 0.1;
  ens->add_option("--manifest", ens_manifest, "cohort manifest JSON")
      ->required();
  ens->add_option("--mode", ens_mode, "avg or learned")
      ->check(CLI::IsMember({"avg", "learned"}));
  ens->add_option("--train", ens_train,
                  "recording ids to fit weights on (learned mode)");
  ens->add_option("--fraction", ens_fraction,
                  "fraction of recordings to fit on when --train is empty");
  ens->add_option("--weights-out", ens_weights, "write weights JSON here");
  ens->add_option("--emit", ens_emit,
                  "write per-recording combined probabilities here");

  // eval
  auto* eval = app.add_subcommand(
      "eval", "Score each stager against the reference hypnograms");
  std::string eval_manifest, eval_absent = "exclude", eval_out;
  eval->add_option("--manifest", eval_manifest, "cohort manifest JSON")
      ->required();
  eval->add_option("--absent", eval_absent,
                   "absent-class policy: exclude or zero")
      ->check(CLI::IsMember({"exclude", "zero"}));
  eval->add_option("--out", eval_out, "write CSV here instead of stdout");

  // clinical
  auto* clin = app.add_subcommand(
      "clinical", "Whole-night measures and relative errors per recording");
  std::string clin_manifest, clin_out;
  clin->add_option("--manifest", clin_manifest, "cohort manifest JSON")
      ->required();
  clin->add_option("--out", clin_out, "write CSV here instead of stdout");

  // errors
  auto* err = app.add_subcommand(
      "errors", "Common-vs-individual error structure across stagers");
  std::string err_manifest, err_out = ".";
  err->add_option("--manifest", err_manifest, "cohort manifest JSON")
      ->required();
  err->add_option("--out", err_out, "output directory");

  // synth
  auto* syn = app.add_subcommand(
      "synth", "Generate a seeded synthetic cohort");
  std::string syn_out;
  std::size_t syn_recordings = 50, syn_epochs = 960;
  std::vector<std::string> syn_stagers;
  double syn_concentration = 20.0;
  std::uint64_t syn_seed = 0;
  syn->add_option("--out", syn_out, "output directory")->required();
  syn->add_option("--recordings", syn_recordings, "number of recordings");
  syn->add_option("--epochs", syn_epochs, "epochs per recording");
  syn->add_option("--stager", syn_stagers,
                  "name=diagonal accuracy, e.g. alpha=0.85 (repeatable)");
  syn->add_option("--concentration", syn_concentration,
                  "probability row sharpness");
  syn->add_option("--seed", syn_seed, "cohort seed");

  // run
  auto* run = app.add_subcommand(
      "run", "Full evaluation: manifest to report bundle");
  std::string run_config, run_out;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::size_t> run_workers;
  run->add_option("--config", run_config, "run config JSON")->required();
  run->add_option("--out", run_out, "output directory (overrides config)");
  run->add_option("--seed", run_seed, "seed (overrides config)");
  run->add_option("--workers", run_workers, "worker threads (overrides config)");

  // backends
  auto* back = app.add_subcommand(
      "backends", "List compute kernel backends on this machine");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prep->parsed())
      return cmd_prep(prep_edf, prep_channels, prep_id, prep_out, prep_params);
    if (ens->parsed())
      return cmd_ensemble(ens_manifest, ens_mode, ens_train, ens_fraction,
                          ens_weights, ens_emit);
    if (eval->parsed()) return cmd_eval(eval_manifest, eval_absent, eval_out);
    if (clin->parsed()) return cmd_clinical(clin_manifest, clin_out);
    if (err->parsed()) return cmd_errors(err_manifest, err_out);
    if (syn->parsed())
      return cmd_synth(syn_out, syn_recordings, syn_epochs, syn_stagers,
                       syn_concentration, syn_seed);
    if (run->parsed()) return cmd_run(run_config, run_out, run_seed, run_workers);
    if (back->parsed()) {
      for (const auto backend : kernels::available_backends())
        std::cout << kernels::name(backend)
                  << (backend == kernels::active_backend() ? " (active)" : "")
                  << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
