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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stagerbench/error.hpp"
#include "stagerbench/metrics.hpp"
#include "stagerbench/sigprep.hpp"
#include "stagerbench/stages.hpp"

namespace stagerbench::pipeline {

// The whole-cohort evaluation run: load a manifest, optionally precondition
// raw EDF recordings, build the ensemble, and write the report bundle
// (summary.json plus the CSV tables). A fixed config and seed produce
// byte-identical bundles regardless of worker count: recordings are
// processed into index-ordered slots and reduced sequentially.

struct Diagnostic {
  enum class Severity { kInfo, kWarning, kError };
  Severity severity = Severity::kInfo;
  std::string message;
};

struct PrepSettings {
  // Each entry is one channel to extract: a list of acceptable EDF labels,
  // first entry canonical.
  std::vector<std::vector<std::string>> channels;
  sigprep::PrepParams params;
};

struct RunConfig {
  std::string manifest_path;
  std::string ensemble_mode = "avg";  // "avg" or "learned"
  // Learned mode fits weights on these recordings; when empty, the first
  // ceil(validation_fraction * N) evaluated recordings are used.
  std::vector<std::string> validation_ids;
  double validation_fraction = 0.1;
  // Age bin edges for stratified metrics; empty means whole years spanning
  // the observed ages.
  std::vector<double> age_edges;
  metrics::AbsentClassPolicy absent_policy =
      metrics::AbsentClassPolicy::kExcludeAbsent;
  bool include_ensemble_in_errors = true;
  // When set, McNemar p-values switch to the exact binomial below this many
  // discordant epochs.
  std::optional<std::uint64_t> mcnemar_exact_threshold;
  std::size_t workers = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 0;
  std::string out_dir;
  std::optional<PrepSettings> prep;
};

// Reads the JSON config; unrecognized keys become warnings in diagnostics
// (when given) so typos surface instead of silently using defaults.
RunConfig load_run_config(const std::filesystem::path& path,
                          std::vector<Diagnostic>* diagnostics = nullptr);

// Static checks (field domains, file existence); kError entries make
// run_pipeline refuse to start.
std::vector<Diagnostic> validate_config(const RunConfig& config);

struct SystemSummary {
  std::string name;
  metrics::MetricReport report;
};

struct RunSummary {
  std::size_t recordings_total = 0;
  std::size_t recordings_evaluated = 0;
  std::size_t recordings_failed = 0;
  std::uint64_t epochs = 0;
  std::string ensemble_name;
  std::vector<SystemSummary> systems;  // ensemble first, then stagers
  std::vector<double> ensemble_weights;  // learned mode only
  std::vector<std::string> failures;     // "id: reason"
};

// Runs the full evaluation and writes the bundle into config.out_dir:
// summary.json, metrics_overall.csv, metrics_classwise.csv,
// metrics_stratified.csv, kappa_matrix.csv, mcnemar.csv, clinical.csv,
// errors_histogram.csv, error_patterns.csv.
RunSummary run_pipeline(const RunConfig& config);

}  // namespace stagerbench::pipeline
