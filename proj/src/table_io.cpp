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

#include "stagerbench/table_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stagerbench::table_io {
namespace {

using nlohmann::json;

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // A trailing newline produces no extra entry; interior blank lines are
  // format errors handled by the callers.
  return lines;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

double parse_double_token(const std::string& token,
                          const std::filesystem::path& path,
                          std::size_t line_no) {
  char* tail = nullptr;
  const double value = std::strtod(token.c_str(), &tail);
  if (tail == token.c_str() || *tail != '\0') {
    throw Error("'" + path.string() + "' line " + std::to_string(line_no) +
                ": '" + token + "' is not a number");
  }
  return value;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw Error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void dump_json(const std::filesystem::path& path, const json& j) {
  auto out = open_for_write(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed to write '" + path.string() + "'");
}

}  // namespace

Hypnogram read_hypnogram_csv(const std::filesystem::path& path) {
  Hypnogram hypnogram;
  std::size_t line_no = 0;
  for (const std::string& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) {
      throw Error("'" + path.string() + "' line " + std::to_string(line_no) +
                  " is blank");
    }
    hypnogram.stages.push_back(stage_from_code(line));
  }
  return hypnogram;
}

void write_hypnogram_csv(const std::filesystem::path& path,
                         const Hypnogram& hypnogram) {
  auto out = open_for_write(path);
  for (SleepStage stage : hypnogram.stages) {
    out << to_string(stage) << '\n';
  }
  if (!out) throw Error("failed to write '" + path.string() + "'");
}

ProbSeq read_probseq_csv(const std::filesystem::path& path,
                         std::size_t* renormalized) {
  std::vector<double> values;
  std::size_t line_no = 0;
  for (const std::string& line : read_lines(path)) {
    ++line_no;
    std::stringstream ss(line);
    std::string token;
    std::size_t fields = 0;
    while (std::getline(ss, token, ',')) {
      values.push_back(parse_double_token(token, path, line_no));
      ++fields;
    }
    if (fields != kStageCount) {
      throw Error("'" + path.string() + "' line " + std::to_string(line_no) +
                  " has " + std::to_string(fields) + " fields, expected " +
                  std::to_string(kStageCount));
    }
  }
  return ProbSeq(std::move(values), renormalized);
}

void write_probseq_csv(const std::filesystem::path& path,
                       const ProbSeq& probs) {
  auto out = open_for_write(path);
  char buf[32];
  for (std::size_t e = 0; e < probs.length(); ++e) {
    for (std::size_t c = 0; c < kStageCount; ++c) {
      std::snprintf(buf, sizeof(buf), "%.12g", probs.at(e, c));
      out << buf << (c + 1 < kStageCount ? "," : "\n");
    }
  }
  if (!out) throw Error("failed to write '" + path.string() + "'");
}

CohortManifest read_manifest_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.is_array()) {
    throw Error("manifest '" + path.string() +
                "' must be a JSON array of recordings");
  }
  CohortManifest manifest;
  for (const json& item : j) {
    if (!item.is_object() || !item.contains("id") ||
        !item["id"].is_string()) {
      throw Error("manifest '" + path.string() +
                  "': every recording needs a string 'id'");
    }
    RecordingEntry entry;
    entry.id = item["id"].get<std::string>();
    if (!item.contains("age") || !item["age"].is_number()) {
      throw Error("manifest recording '" + entry.id +
                  "' needs a numeric 'age'");
    }
    entry.age_years = item["age"].get<double>();
    if (item.contains("ahi") && !item["ahi"].is_null()) {
      if (!item["ahi"].is_number()) {
        throw Error("manifest recording '" + entry.id +
                    "': 'ahi' must be a number or null");
      }
      entry.ahi = item["ahi"].get<double>();
    }
    entry.subset = item.value("subset", "");
    entry.truth_path = item.value("truth", "");
    if (item.contains("stagers")) {
      if (!item["stagers"].is_object()) {
        throw Error("manifest recording '" + entry.id +
                    "': 'stagers' must be an object of name -> path");
      }
      for (const auto& [name, p] : item["stagers"].items()) {
        if (!p.is_string()) {
          throw Error("manifest recording '" + entry.id + "': stager '" +
                      name + "' path must be a string");
        }
        entry.stager_paths[name] = p.get<std::string>();
      }
    }
    entry.edf_path = item.value("edf", "");
    manifest.recordings.push_back(std::move(entry));
  }
  return manifest;
}

void write_manifest_json(const std::filesystem::path& path,
                         const CohortManifest& manifest) {
  json j = json::array();
  for (const RecordingEntry& entry : manifest.recordings) {
    json item;
    item["id"] = entry.id;
    item["age"] = entry.age_years;
    if (entry.ahi.has_value()) {
      item["ahi"] = *entry.ahi;
    } else {
      item["ahi"] = nullptr;
    }
    if (!entry.subset.empty()) item["subset"] = entry.subset;
    if (!entry.truth_path.empty()) item["truth"] = entry.truth_path;
    if (!entry.stager_paths.empty()) {
      json stagers;
      for (const auto& [name, p] : entry.stager_paths) stagers[name] = p;
      item["stagers"] = stagers;
    }
    if (!entry.edf_path.empty()) item["edf"] = entry.edf_path;
    j.push_back(std::move(item));
  }
  dump_json(path, j);
}

std::filesystem::path resolve_manifest_path(
    const std::filesystem::path& manifest_path,
    const std::string& entry_path) {
  const std::filesystem::path p(entry_path);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

NamedWeights read_weights_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.is_object() || !j.contains("names") || !j.contains("w") ||
      !j["names"].is_array() || !j["w"].is_array() ||
      j["names"].size() != j["w"].size()) {
    throw Error("weights file '" + path.string() +
                "' must hold parallel 'names' and 'w' arrays");
  }
  NamedWeights out;
  for (const json& name : j["names"]) {
    if (!name.is_string()) {
      throw Error("weights file '" + path.string() +
                  "': 'names' must be strings");
    }
    out.names.push_back(name.get<std::string>());
  }
  for (const json& w : j["w"]) {
    if (!w.is_number()) {
      throw Error("weights file '" + path.string() +
                  "': 'w' must be numbers");
    }
    out.weights.push_back(w.get<double>());
  }
  return out;
}

void write_weights_json(const std::filesystem::path& path,
                        const NamedWeights& weights) {
  if (weights.names.size() != weights.weights.size()) {
    throw LengthMismatch("weights and names differ in length");
  }
  json j;
  j["names"] = weights.names;
  j["w"] = weights.weights;
  dump_json(path, j);
}

void write_quality_json(const std::filesystem::path& path,
                        const sigprep::QualityReport& report) {
  json j;
  j["good_seconds"] = report.good_seconds;
  j["passed"] = report.passed;
  json spans = json::array();
  for (const auto& [start, end] : report.discarded_spans) {
    spans.push_back(json::array({start, end}));
  }
  j["discarded_spans"] = spans;
  dump_json(path, j);
}

void write_epoch_grid(const std::filesystem::path& f32le_path,
                      const sigprep::EpochGrid& grid) {
  std::vector<unsigned char> bytes(grid.data.size() * 4);
  for (std::size_t i = 0; i < grid.data.size(); ++i) {
    const std::uint32_t u =
        std::bit_cast<std::uint32_t>(static_cast<float>(grid.data[i]));
    bytes[4 * i] = static_cast<unsigned char>(u & 0xff);
    bytes[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
    bytes[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
    bytes[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
  }
  std::ofstream out(f32le_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open '" + f32le_path.string() + "' for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed to write '" + f32le_path.string() + "'");

  json meta;
  meta["recording_id"] = grid.recording_id;
  meta["channels"] = grid.channel_labels;
  meta["rate"] = grid.rate;
  meta["samples_per_epoch"] = grid.samples_per_epoch;
  meta["epochs"] = grid.epoch_count();
  meta["source_epoch_index"] = grid.source_epoch_index;
  meta["history"] = grid.history;
  std::filesystem::path sidecar = f32le_path;
  sidecar.replace_extension(".json");
  dump_json(sidecar, meta);
}

sigprep::EpochGrid read_epoch_grid(const std::filesystem::path& f32le_path) {
  std::filesystem::path sidecar = f32le_path;
  sidecar.replace_extension(".json");
  const json meta = load_json(sidecar);

  sigprep::EpochGrid grid;
  grid.recording_id = meta.value("recording_id", "");
  if (!meta.contains("channels") || !meta["channels"].is_array() ||
      !meta.contains("samples_per_epoch") || !meta.contains("rate")) {
    throw Error("epoch grid sidecar '" + sidecar.string() +
                "' lacks channels/rate/samples_per_epoch");
  }
  for (const json& label : meta["channels"]) {
    grid.channel_labels.push_back(label.get<std::string>());
  }
  grid.rate = meta["rate"].get<double>();
  grid.samples_per_epoch = meta["samples_per_epoch"].get<std::size_t>();
  if (meta.contains("source_epoch_index")) {
    for (const json& idx : meta["source_epoch_index"]) {
      grid.source_epoch_index.push_back(idx.get<std::size_t>());
    }
  }
  if (meta.contains("history")) {
    for (const json& tag : meta["history"]) {
      grid.history.push_back(tag.get<std::string>());
    }
  }

  std::ifstream in(f32le_path, std::ios::binary);
  if (!in) {
    throw Error("cannot open '" + f32le_path.string() + "' for reading");
  }
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw Error("failed to read '" + f32le_path.string() + "'");

  const std::size_t expected = grid.epoch_count() * grid.channel_count() *
                               grid.samples_per_epoch * 4;
  if (bytes.size() != expected) {
    throw Error("epoch grid '" + f32le_path.string() + "' holds " +
                std::to_string(bytes.size()) + " bytes, sidecar expects " +
                std::to_string(expected));
  }
  grid.data.resize(bytes.size() / 4);
  for (std::size_t i = 0; i < grid.data.size(); ++i) {
    const std::uint32_t u = static_cast<std::uint32_t>(bytes[4 * i]) |
                            (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes[4 * i + 2])
                             << 16) |
                            (static_cast<std::uint32_t>(bytes[4 * i + 3])
                             << 24);
    grid.data[i] = static_cast<double>(std::bit_cast<float>(u));
  }
  return grid;
}

}  // namespace stagerbench::table_io
