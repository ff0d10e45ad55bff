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

#include "stagerbench/edf.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "stagerbench/kernels.hpp"

namespace stagerbench::edf {
namespace {

constexpr std::size_t kFixedHeaderBytes = 256;
constexpr std::size_t kPerSignalHeaderBytes = 256;

// Field widths of the fixed header, in order.
constexpr std::size_t kVersionLen = 8;
constexpr std::size_t kPatientLen = 80;
constexpr std::size_t kRecordingLen = 80;
constexpr std::size_t kDateLen = 8;
constexpr std::size_t kTimeLen = 8;
constexpr std::size_t kHeaderBytesLen = 8;
constexpr std::size_t kReservedLen = 44;
constexpr std::size_t kNRecordsLen = 8;
constexpr std::size_t kDurationLen = 8;
constexpr std::size_t kNSignalsLen = 4;

std::string trimmed(std::span<const unsigned char> bytes, std::size_t offset,
                    std::size_t len) {
  const char* p = reinterpret_cast<const char*>(bytes.data()) + offset;
  std::size_t begin = 0;
  std::size_t end = len;
  while (begin < end && (p[begin] == ' ' || p[begin] == '\0')) ++begin;
  while (end > begin && (p[end - 1] == ' ' || p[end - 1] == '\0')) --end;
  return std::string(p + begin, end - begin);
}

long parse_long_field(std::span<const unsigned char> bytes, std::size_t offset,
                      std::size_t len, const char* what) {
  const std::string text = trimmed(bytes, offset, len);
  if (text.empty()) {
    throw MalformedNumericField(std::string(what) + " field is blank");
  }
  char* tail = nullptr;
  errno = 0;
  const long value = std::strtol(text.c_str(), &tail, 10);
  if (errno != 0 || tail == text.c_str() || *tail != '\0') {
    throw MalformedNumericField(std::string(what) + " field '" + text +
                                "' is not an integer");
  }
  return value;
}

double parse_double_field(std::span<const unsigned char> bytes,
                          std::size_t offset, std::size_t len,
                          const char* what) {
  const std::string text = trimmed(bytes, offset, len);
  if (text.empty()) {
    throw MalformedNumericField(std::string(what) + " field is blank");
  }
  char* tail = nullptr;
  errno = 0;
  const double value = std::strtod(text.c_str(), &tail);
  if (errno != 0 || tail == text.c_str() || *tail != '\0' ||
      !std::isfinite(value)) {
    throw MalformedNumericField(std::string(what) + " field '" + text +
                                "' is not a finite number");
  }
  return value;
}

std::size_t record_bytes(const ParsedEdf& parsed) {
  std::size_t total = 0;
  for (const auto& sig : parsed.signals) {
    total += static_cast<std::size_t>(sig.samples_per_record) * 2;
  }
  return total;
}

void put_field(std::vector<unsigned char>& out, std::size_t offset,
               std::size_t len, const std::string& text, const char* what) {
  if (text.size() > len) {
    throw InvalidFieldValue(std::string(what) + " '" + text +
                            "' exceeds its " + std::to_string(len) +
                            "-byte field");
  }
  std::memcpy(out.data() + offset, text.data(), text.size());
}

std::string format_long(long value, std::size_t len, const char* what) {
  const std::string text = std::to_string(value);
  if (text.size() > len) {
    throw InvalidFieldValue(std::string(what) + " value " + text +
                            " exceeds its field width");
  }
  return text;
}

// Shortest decimal form of value that fits the field and parses back to the
// same double; falls back to the tightest fit when no form round-trips.
std::string format_double(double value, std::size_t len, const char* what) {
  char buf[64];
  if (value == std::floor(value) && std::fabs(value) < 1e15) {
    const std::string text = std::to_string(static_cast<long long>(value));
    if (text.size() <= len) return text;
  }
  std::string fallback;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    const std::string text(buf);
    if (text.size() > len) break;
    fallback = text;
    if (std::strtod(text.c_str(), nullptr) == value) return text;
  }
  if (fallback.empty()) {
    throw InvalidFieldValue(std::string(what) + " value does not fit its " +
                            std::to_string(len) + "-byte field");
  }
  return fallback;
}

std::uint32_t load_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32le(unsigned char* p, std::uint32_t v) {
  p[0] = static_cast<unsigned char>(v & 0xff);
  p[1] = static_cast<unsigned char>((v >> 8) & 0xff);
  p[2] = static_cast<unsigned char>((v >> 16) & 0xff);
  p[3] = static_cast<unsigned char>((v >> 24) & 0xff);
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p.replace_extension(".json");
  return p;
}

}  // namespace

ParsedEdf parse_edf_header(std::span<const unsigned char> bytes) {
  if (bytes.size() < kFixedHeaderBytes) {
    throw TruncatedHeader("file holds " + std::to_string(bytes.size()) +
                          " bytes, short of the 256-byte fixed header");
  }

  ParsedEdf parsed;
  EdfHeader& h = parsed.header;
  std::size_t off = 0;
  h.version = trimmed(bytes, off, kVersionLen);
  off += kVersionLen;
  h.patient_id = trimmed(bytes, off, kPatientLen);
  off += kPatientLen;
  h.recording_id = trimmed(bytes, off, kRecordingLen);
  off += kRecordingLen;
  h.start_date = trimmed(bytes, off, kDateLen);
  off += kDateLen;
  h.start_time = trimmed(bytes, off, kTimeLen);
  off += kTimeLen;
  h.header_bytes = parse_long_field(bytes, off, kHeaderBytesLen, "header_bytes");
  off += kHeaderBytesLen + kReservedLen;
  h.n_records_raw = parse_long_field(bytes, off, kNRecordsLen, "n_records");
  off += kNRecordsLen;
  h.record_duration_s =
      parse_double_field(bytes, off, kDurationLen, "record_duration");
  off += kDurationLen;
  const long n_signals = parse_long_field(bytes, off, kNSignalsLen, "n_signals");

  if (n_signals < 1) {
    throw InvalidFieldValue("n_signals must be at least 1, got " +
                            std::to_string(n_signals));
  }
  h.n_signals = static_cast<int>(n_signals);
  if (h.record_duration_s <= 0.0) {
    throw InvalidFieldValue("record_duration must be positive, got " +
                            std::to_string(h.record_duration_s));
  }
  if (h.n_records_raw < -1) {
    throw InvalidFieldValue("n_records must be -1 or nonnegative, got " +
                            std::to_string(h.n_records_raw));
  }

  const std::size_t ns = static_cast<std::size_t>(h.n_signals);
  const std::size_t expected_header =
      kFixedHeaderBytes + ns * kPerSignalHeaderBytes;
  if (h.header_bytes != static_cast<long>(expected_header)) {
    throw InconsistentHeaderBytes(
        "header_bytes is " + std::to_string(h.header_bytes) + " but " +
        std::to_string(n_signals) + " signals require " +
        std::to_string(expected_header));
  }
  if (bytes.size() < expected_header) {
    throw TruncatedHeader("file holds " + std::to_string(bytes.size()) +
                          " bytes, short of the " +
                          std::to_string(expected_header) +
                          "-byte header it declares");
  }

  // Per-signal arrays are field-major: all labels, then all transducers, ...
  parsed.signals.resize(ns);
  std::size_t base = kFixedHeaderBytes;
  for (std::size_t i = 0; i < ns; ++i) {
    parsed.signals[i].label = trimmed(bytes, base + i * 16, 16);
  }
  base += ns * 16;
  for (std::size_t i = 0; i < ns; ++i) {
    parsed.signals[i].transducer = trimmed(bytes, base + i * 80, 80);
  }
  base += ns * 80;
  for (std::size_t i = 0; i < ns; ++i) {
    parsed.signals[i].physical_dimension = trimmed(bytes, base + i * 8, 8);
  }
  base += ns * 8;
  for (std::size_t i = 0; i < ns; ++i) {
    parsed.signals[i].physical_min =
        parse_double_field(bytes, base + i * 8, 8, "physical_min");
  }
  base += ns * 8;
  for (std::size_t i = 0; i < ns; ++i) {
    parsed.signals[i].physical_max =
        parse_double_field(bytes, base + i * 8, 8, "physical_max");
  }
  base += ns * 8;
  for (std::size_t i = 0; i < ns; ++i) {
    parsed.signals[i].digital_min = static_cast<int>(
        parse_long_field(bytes, base + i * 8, 8, "digital_min"));
  }
  base += ns * 8;
  for (std::size_t i = 0; i < ns; ++i) {
    parsed.signals[i].digital_max = static_cast<int>(
        parse_long_field(bytes, base + i * 8, 8, "digital_max"));
  }
  base += ns * 8;
  for (std::size_t i = 0; i < ns; ++i) {
    parsed.signals[i].prefiltering = trimmed(bytes, base + i * 80, 80);
  }
  base += ns * 80;
  for (std::size_t i = 0; i < ns; ++i) {
    parsed.signals[i].samples_per_record = static_cast<int>(
        parse_long_field(bytes, base + i * 8, 8, "samples_per_record"));
  }

  for (std::size_t i = 0; i < ns; ++i) {
    const EdfSignalSpec& sig = parsed.signals[i];
    if (sig.samples_per_record < 1) {
      throw InvalidFieldValue("signal " + std::to_string(i) +
                              " has nonpositive samples_per_record");
    }
    if (sig.digital_min >= sig.digital_max) {
      throw InvalidFieldValue("signal " + std::to_string(i) +
                              " has digital_min >= digital_max");
    }
    if (sig.digital_min < -32768 || sig.digital_max > 32767) {
      throw InvalidFieldValue("signal " + std::to_string(i) +
                              " digital range exceeds int16");
    }
    if (sig.physical_min == sig.physical_max) {
      throw InvalidFieldValue("signal " + std::to_string(i) +
                              " has equal physical bounds");
    }
  }

  if (h.n_records_raw == -1) {
    const std::size_t rec = record_bytes(parsed);
    const std::size_t body =
        bytes.size() > expected_header ? bytes.size() - expected_header : 0;
    h.n_records = rec == 0 ? 0 : static_cast<long>(body / rec);
  } else {
    h.n_records = h.n_records_raw;
  }
  return parsed;
}

SignalTrace read_signal(std::span<const unsigned char> bytes,
                        const ParsedEdf& parsed, std::size_t signal_index,
                        ReadStats* stats) {
  if (signal_index >= parsed.signals.size()) {
    throw Error("signal index " + std::to_string(signal_index) +
                " out of range for " + std::to_string(parsed.signals.size()) +
                " signals");
  }
  const EdfHeader& h = parsed.header;
  const EdfSignalSpec& sig = parsed.signals[signal_index];
  const std::size_t rec = record_bytes(parsed);
  std::size_t sig_offset = 0;
  for (std::size_t i = 0; i < signal_index; ++i) {
    sig_offset +=
        static_cast<std::size_t>(parsed.signals[i].samples_per_record) * 2;
  }
  const std::size_t spr = static_cast<std::size_t>(sig.samples_per_record);
  const std::size_t n_records = static_cast<std::size_t>(h.n_records);

  if (n_records > 0) {
    const std::size_t last_needed = static_cast<std::size_t>(h.header_bytes) +
                                    (n_records - 1) * rec + sig_offset +
                                    spr * 2;
    if (bytes.size() < last_needed) {
      throw TruncatedRecord("signal '" + sig.label + "' needs " +
                            std::to_string(last_needed) +
                            " bytes but the file holds " +
                            std::to_string(bytes.size()));
    }
  }

  const double phys_range = sig.physical_max - sig.physical_min;

  SignalTrace trace;
  trace.samples.resize(n_records * spr);
  trace.rate = sig.sample_rate(h.record_duration_s);
  trace.label = sig.label;
  trace.unit = sig.physical_dimension;

  std::size_t out_of_range = 0;
  for (std::size_t r = 0; r < n_records; ++r) {
    const unsigned char* src =
        bytes.data() + static_cast<std::size_t>(h.header_bytes) + r * rec +
        sig_offset;
    out_of_range += kernels::decode_i16le(
        src, spr, sig.digital_min, sig.digital_max, phys_range,
        sig.physical_min, trace.samples.data() + r * spr);
  }
  if (stats != nullptr) stats->digital_out_of_range = out_of_range;
  return trace;
}

std::vector<unsigned char> write_edf(
    const EdfHeader& header, std::span<const EdfSignalSpec> signals,
    const std::vector<std::vector<double>>& physical) {
  if (signals.empty()) {
    throw InvalidFieldValue("an EDF file needs at least one signal");
  }
  if (physical.size() != signals.size()) {
    throw LengthMismatch("sample vectors (" + std::to_string(physical.size()) +
                         ") do not match signal specs (" +
                         std::to_string(signals.size()) + ")");
  }
  if (header.record_duration_s <= 0.0) {
    throw InvalidFieldValue("record_duration must be positive");
  }

  std::size_t n_records = 0;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    const EdfSignalSpec& sig = signals[i];
    if (sig.samples_per_record < 1) {
      throw InvalidFieldValue("signal " + std::to_string(i) +
                              " has nonpositive samples_per_record");
    }
    if (sig.digital_min >= sig.digital_max || sig.digital_min < -32768 ||
        sig.digital_max > 32767) {
      throw InvalidFieldValue("signal " + std::to_string(i) +
                              " has an invalid digital range");
    }
    if (sig.physical_min == sig.physical_max ||
        !std::isfinite(sig.physical_min) || !std::isfinite(sig.physical_max)) {
      throw InvalidFieldValue("signal " + std::to_string(i) +
                              " has invalid physical bounds");
    }
    for (const double v : physical[i]) {
      if (!std::isfinite(v)) {
        throw InvalidFieldValue("signal " + std::to_string(i) +
                                " contains a non-finite sample");
      }
    }
    const std::size_t spr = static_cast<std::size_t>(sig.samples_per_record);
    if (physical[i].size() % spr != 0) {
      throw LengthMismatch("signal " + std::to_string(i) + " holds " +
                           std::to_string(physical[i].size()) +
                           " samples, not a multiple of " +
                           std::to_string(spr));
    }
    const std::size_t records = physical[i].size() / spr;
    if (i == 0) {
      n_records = records;
    } else if (records != n_records) {
      throw LengthMismatch("signal " + std::to_string(i) + " spans " +
                           std::to_string(records) + " records, expected " +
                           std::to_string(n_records));
    }
  }

  const std::size_t ns = signals.size();
  const std::size_t header_bytes =
      kFixedHeaderBytes + ns * kPerSignalHeaderBytes;
  std::size_t rec = 0;
  for (const auto& sig : signals) {
    rec += static_cast<std::size_t>(sig.samples_per_record) * 2;
  }

  // Samples are quantized against the bounds as persisted in the 8-byte
  // header fields, so a reader that parses those fields inverts the mapping
  // exactly instead of chasing the writer's full-precision values.
  std::vector<std::string> pmin_text(ns), pmax_text(ns);
  std::vector<double> pmin_stored(ns), pmax_stored(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    pmin_text[i] = format_double(signals[i].physical_min, 8, "physical_min");
    pmax_text[i] = format_double(signals[i].physical_max, 8, "physical_max");
    pmin_stored[i] = std::strtod(pmin_text[i].c_str(), nullptr);
    pmax_stored[i] = std::strtod(pmax_text[i].c_str(), nullptr);
    if (pmin_stored[i] == pmax_stored[i]) {
      throw InvalidFieldValue("signal " + std::to_string(i) +
                              " physical bounds collapse in their 8-byte "
                              "header fields");
    }
  }

  std::vector<unsigned char> out(header_bytes + n_records * rec, ' ');
  std::memset(out.data() + header_bytes, 0, n_records * rec);

  std::size_t off = 0;
  put_field(out, off, kVersionLen, header.version, "version");
  off += kVersionLen;
  put_field(out, off, kPatientLen, header.patient_id, "patient_id");
  off += kPatientLen;
  put_field(out, off, kRecordingLen, header.recording_id, "recording_id");
  off += kRecordingLen;
  put_field(out, off, kDateLen, header.start_date, "start_date");
  off += kDateLen;
  put_field(out, off, kTimeLen, header.start_time, "start_time");
  off += kTimeLen;
  put_field(out, off, kHeaderBytesLen,
            format_long(static_cast<long>(header_bytes), kHeaderBytesLen,
                        "header_bytes"),
            "header_bytes");
  off += kHeaderBytesLen + kReservedLen;
  const long n_records_field =
      header.n_records_raw == -1 ? -1 : static_cast<long>(n_records);
  put_field(out, off, kNRecordsLen,
            format_long(n_records_field, kNRecordsLen, "n_records"),
            "n_records");
  off += kNRecordsLen;
  put_field(out, off, kDurationLen,
            format_double(header.record_duration_s, kDurationLen,
                          "record_duration"),
            "record_duration");
  off += kDurationLen;
  put_field(out, off, kNSignalsLen,
            format_long(static_cast<long>(ns), kNSignalsLen, "n_signals"),
            "n_signals");

  std::size_t base = kFixedHeaderBytes;
  for (std::size_t i = 0; i < ns; ++i) {
    put_field(out, base + i * 16, 16, signals[i].label, "label");
  }
  base += ns * 16;
  for (std::size_t i = 0; i < ns; ++i) {
    put_field(out, base + i * 80, 80, signals[i].transducer, "transducer");
  }
  base += ns * 80;
  for (std::size_t i = 0; i < ns; ++i) {
    put_field(out, base + i * 8, 8, signals[i].physical_dimension,
              "physical_dimension");
  }
  base += ns * 8;
  for (std::size_t i = 0; i < ns; ++i) {
    put_field(out, base + i * 8, 8, pmin_text[i], "physical_min");
  }
  base += ns * 8;
  for (std::size_t i = 0; i < ns; ++i) {
    put_field(out, base + i * 8, 8, pmax_text[i], "physical_max");
  }
  base += ns * 8;
  for (std::size_t i = 0; i < ns; ++i) {
    put_field(out, base + i * 8, 8,
              format_long(signals[i].digital_min, 8, "digital_min"),
              "digital_min");
  }
  base += ns * 8;
  for (std::size_t i = 0; i < ns; ++i) {
    put_field(out, base + i * 8, 8,
              format_long(signals[i].digital_max, 8, "digital_max"),
              "digital_max");
  }
  base += ns * 8;
  for (std::size_t i = 0; i < ns; ++i) {
    put_field(out, base + i * 80, 80, signals[i].prefiltering, "prefiltering");
  }
  base += ns * 80;
  for (std::size_t i = 0; i < ns; ++i) {
    put_field(out, base + i * 8, 8,
              format_long(signals[i].samples_per_record, 8,
                          "samples_per_record"),
              "samples_per_record");
  }

  for (std::size_t r = 0; r < n_records; ++r) {
    std::size_t cursor = header_bytes + r * rec;
    for (std::size_t i = 0; i < ns; ++i) {
      const EdfSignalSpec& sig = signals[i];
      const std::size_t spr = static_cast<std::size_t>(sig.samples_per_record);
      const double pmin = pmin_stored[i];
      const double phys_range = pmax_stored[i] - pmin;
      const double dig_range = static_cast<double>(sig.digital_max) -
                               static_cast<double>(sig.digital_min);
      for (std::size_t s = 0; s < spr; ++s) {
        const double p = physical[i][r * spr + s];
        long d = std::llround((p - pmin) * dig_range / phys_range) +
                 sig.digital_min;
        d = std::clamp<long>(d, sig.digital_min, sig.digital_max);
        const std::uint16_t u =
            static_cast<std::uint16_t>(static_cast<std::int16_t>(d));
        out[cursor + 2 * s] = static_cast<unsigned char>(u & 0xff);
        out[cursor + 2 * s + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
      }
      cursor += spr * 2;
    }
  }
  return out;
}

int find_channel(std::span<const EdfSignalSpec> signals,
                 std::span<const std::string> aliases) {
  auto fold = [](std::string s) {
    std::size_t begin = s.find_first_not_of(' ');
    if (begin == std::string::npos) return std::string();
    std::size_t end = s.find_last_not_of(' ');
    s = s.substr(begin, end - begin + 1);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
  };
  for (std::size_t i = 0; i < signals.size(); ++i) {
    const std::string label = fold(signals[i].label);
    for (const auto& alias : aliases) {
      if (label == fold(alias)) return static_cast<int>(i);
    }
  }
  return -1;
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
  if (size > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()), size);
  }
  if (!in) throw Error("failed to read '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed to write '" + path.string() + "'");
}

ParsedEdf parse_edf_header_file(const std::filesystem::path& path) {
  return parse_edf_header(read_file_bytes(path));
}

SignalTrace read_signal_file(const std::filesystem::path& path,
                             std::size_t signal_index, ReadStats* stats) {
  const auto bytes = read_file_bytes(path);
  return read_signal(bytes, parse_edf_header(bytes), signal_index, stats);
}

SignalTrace read_raw_float(const std::filesystem::path& path, double rate,
                           std::string label, std::string unit) {
  if (rate <= 0.0 || !std::isfinite(rate)) {
    throw InvalidFieldValue("raw-float rate must be positive, got " +
                            std::to_string(rate));
  }
  const auto bytes = read_file_bytes(path);
  if (bytes.size() % 4 != 0) {
    throw OddByteCount("'" + path.string() + "' holds " +
                       std::to_string(bytes.size()) +
                       " bytes, not a multiple of 4");
  }
  SignalTrace trace;
  trace.rate = rate;
  trace.label = std::move(label);
  trace.unit = std::move(unit);
  trace.samples.resize(bytes.size() / 4);
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const float v = std::bit_cast<float>(load_u32le(bytes.data() + 4 * i));
    if (!std::isfinite(v)) {
      throw InvalidFieldValue("sample " + std::to_string(i) + " in '" +
                              path.string() + "' is not finite");
    }
    trace.samples[i] = static_cast<double>(v);
  }
  return trace;
}

SignalTrace read_raw_float_auto(const std::filesystem::path& path) {
  const auto side = sidecar_path(path);
  nlohmann::json meta;
  try {
    std::ifstream in(side);
    if (!in) throw Error("cannot open sidecar '" + side.string() + "'");
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error("sidecar '" + side.string() + "' is not valid JSON: " +
                e.what());
  }
  if (!meta.contains("rate") || !meta["rate"].is_number()) {
    throw Error("sidecar '" + side.string() + "' lacks a numeric 'rate'");
  }
  return read_raw_float(path, meta["rate"].get<double>(),
                        meta.value("label", ""), meta.value("unit", ""));
}

void write_raw_float(const std::filesystem::path& path,
                     const SignalTrace& trace) {
  std::vector<unsigned char> bytes(trace.samples.size() * 4);
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    store_u32le(bytes.data() + 4 * i,
                std::bit_cast<std::uint32_t>(
                    static_cast<float>(trace.samples[i])));
  }
  write_file_bytes(path, bytes);

  nlohmann::json meta;
  meta["rate"] = trace.rate;
  meta["label"] = trace.label;
  meta["unit"] = trace.unit;
  std::ofstream out(sidecar_path(path), std::ios::trunc);
  if (!out) {
    throw Error("cannot open sidecar '" + sidecar_path(path).string() +
                "' for writing");
  }
  out << meta.dump(2) << '\n';
}

}  // namespace stagerbench::edf
