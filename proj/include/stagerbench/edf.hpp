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
#include <span>
#include <string>
#include <vector>

#include "stagerbench/error.hpp"
#include "stagerbench/signal.hpp"

namespace stagerbench::edf {

// Reader and writer for 16-bit EDF polysomnography files, plus a raw-float
// fallback (.f32le file with a JSON sidecar) for signals that never lived in
// EDF. The EDF header is pure ASCII: a 256-byte fixed block followed by one
// 256-byte block per signal, stored field-major. Samples follow as
// little-endian int16, grouped into data records and mapped to physical
// units by a per-signal affine transform.

// File shorter than its header claims.
struct TruncatedHeader final : Error {
  using Error::Error;
};
// A numeric header field that does not parse as a number.
struct MalformedNumericField final : Error {
  using Error::Error;
};
// header_bytes disagrees with 256 * (1 + n_signals).
struct InconsistentHeaderBytes final : Error {
  using Error::Error;
};
// The sample area ends mid-record for the requested signal.
struct TruncatedRecord final : Error {
  using Error::Error;
};
// Raw-float file whose size is not a multiple of 4.
struct OddByteCount final : Error {
  using Error::Error;
};
// A field that parses but violates its constraints (zero record duration,
// inverted digital range, non-finite physical bounds, ...).
struct InvalidFieldValue final : Error {
  using Error::Error;
};

struct EdfHeader {
  std::string version = "0";
  std::string patient_id;
  std::string recording_id;
  std::string start_date = "01.01.00";  // dd.mm.yy
  std::string start_time = "00.00.00";  // hh.mm.ss
  long header_bytes = 0;
  // Resolved record count. When the file stores -1 ("unknown"), the parser
  // derives the count from the file size and keeps the raw value here.
  long n_records = 0;
  long n_records_raw = 0;
  double record_duration_s = 30.0;
  int n_signals = 0;
};

struct EdfSignalSpec {
  std::string label;
  std::string transducer;
  std::string physical_dimension;
  double physical_min = 0.0;
  double physical_max = 0.0;
  int digital_min = 0;
  int digital_max = 0;
  std::string prefiltering;
  int samples_per_record = 0;

  double sample_rate(double record_duration_s) const {
    return static_cast<double>(samples_per_record) / record_duration_s;
  }
};

struct ParsedEdf {
  EdfHeader header;
  std::vector<EdfSignalSpec> signals;
};

// Parses the full header from the file bytes. The byte span must cover the
// whole file so that an unknown record count can be resolved from its size.
ParsedEdf parse_edf_header(std::span<const unsigned char> bytes);

struct ReadStats {
  // Raw values outside [digital_min, digital_max]; decoded anyway.
  std::size_t digital_out_of_range = 0;
};

// Decodes one signal to physical units. rate = samples_per_record /
// record_duration_s, exactly.
SignalTrace read_signal(std::span<const unsigned char> bytes,
                        const ParsedEdf& parsed, std::size_t signal_index,
                        ReadStats* stats = nullptr);

// Serializes header + signals. physical[i] holds signal i's samples in
// physical units, length a common multiple of samples_per_record across
// signals (same record count everywhere). Values are quantized to the
// signal's digital grid (round half away from zero, clamped to the digital
// range), so a write/parse round trip reproduces samples to within one
// digital quantum. header.n_records_raw == -1 is preserved in the file;
// otherwise the actual record count is written.
std::vector<unsigned char> write_edf(
    const EdfHeader& header, std::span<const EdfSignalSpec> signals,
    const std::vector<std::vector<double>>& physical);

// Returns the index of the first signal whose trimmed label equals one of
// the aliases case-insensitively, or -1 when absent.
int find_channel(std::span<const EdfSignalSpec> signals,
                 std::span<const std::string> aliases);

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const unsigned char> bytes);

ParsedEdf parse_edf_header_file(const std::filesystem::path& path);
SignalTrace read_signal_file(const std::filesystem::path& path,
                             std::size_t signal_index,
                             ReadStats* stats = nullptr);

// Raw-float fallback: 32-bit little-endian floats, no header. Metadata
// lives in a JSON sidecar {"rate": Hz, "label": ..., "unit": ...} stored
// next to the data file with the extension replaced by ".json".
SignalTrace read_raw_float(const std::filesystem::path& path, double rate,
                           std::string label, std::string unit = "");
SignalTrace read_raw_float_auto(const std::filesystem::path& path);
void write_raw_float(const std::filesystem::path& path,
                     const SignalTrace& trace);

}  // namespace stagerbench::edf
