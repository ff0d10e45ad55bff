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
#include <filesystem>
#include <string>
#include <vector>

#include "stagerbench/error.hpp"
#include "stagerbench/sigprep.hpp"
#include "stagerbench/stages.hpp"

namespace stagerbench::table_io {

// The on-disk formats: hypnograms as one stage code per line, probability
// sequences as five comma-separated values per line, cohort manifests and
// ensemble weights as JSON, epoch grids as raw float32 plus a JSON sidecar.
// All writers emit deterministic bytes for identical inputs.

Hypnogram read_hypnogram_csv(const std::filesystem::path& path);
void write_hypnogram_csv(const std::filesystem::path& path,
                         const Hypnogram& hypnogram);

// renormalized (optional) reports how many rows needed renormalizing.
ProbSeq read_probseq_csv(const std::filesystem::path& path,
                         std::size_t* renormalized = nullptr);
void write_probseq_csv(const std::filesystem::path& path,
                       const ProbSeq& probs);

// Manifest entries keep their paths exactly as written in the file; resolve
// them with resolve_manifest_path before opening.
CohortManifest read_manifest_json(const std::filesystem::path& path);
void write_manifest_json(const std::filesystem::path& path,
                         const CohortManifest& manifest);

// Relative entry paths resolve against the manifest's directory.
std::filesystem::path resolve_manifest_path(
    const std::filesystem::path& manifest_path, const std::string& entry_path);

struct NamedWeights {
  std::vector<std::string> names;
  std::vector<double> weights;
};

NamedWeights read_weights_json(const std::filesystem::path& path);
void write_weights_json(const std::filesystem::path& path,
                        const NamedWeights& weights);

void write_quality_json(const std::filesystem::path& path,
                        const sigprep::QualityReport& report);

// Epoch grid as float32 little-endian, epoch-major then channel-major, with
// geometry and provenance in a sidecar (extension replaced by ".json").
void write_epoch_grid(const std::filesystem::path& f32le_path,
                      const sigprep::EpochGrid& grid);
sigprep::EpochGrid read_epoch_grid(const std::filesystem::path& f32le_path);

}  // namespace stagerbench::table_io
