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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stagerbench/error.hpp"
#include "stagerbench/signal.hpp"

namespace stagerbench::sigprep {

// Signal conditioning from raw polysomnography channels to the 30 s epoch
// grid consumed by the stagers: rational resampling, outlier clipping,
// amplitude normalization, zero-phase band-pass filtering, z-normalization,
// an amplitude-based quality gate, epoch segmentation and a log-magnitude
// spectrogram. Each step appends its name to SignalTrace::history so the
// composition order can be audited.

struct ZeroRate final : Error {
  using Error::Error;
};
struct EmptyTrace final : Error {
  using Error::Error;
};
struct InvalidBand final : Error {
  using Error::Error;
};
struct ZeroVariance final : Error {
  using Error::Error;
};
struct MismatchedChannelLengths final : Error {
  using Error::Error;
};
struct WrongFrameLength final : Error {
  using Error::Error;
};

// Polyphase rational resampler (windowed-sinc low-pass, Blackman window).
// The rate ratio is approximated by the best rational L/M with denominator
// at most 65536, which is exact for the rates EDF can express with small
// rationals. Equal input and output rates short-circuit to a copy. The
// output holds ceil(n * L / M) samples and is stamped with target_rate.
SignalTrace resample(const SignalTrace& trace, double target_rate);

// Clamps samples to mean +- sigma standard deviations (population standard
// deviation over the whole trace). A constant trace has sigma = 0 and the
// clamp degenerates to the identity on it.
SignalTrace clip_outliers(const SignalTrace& trace, double sigma = 6.0);

// Divides by max|x| so the result lies in [-1, 1]. An all-zero trace passes
// through unchanged.
SignalTrace scale_to_unit(const SignalTrace& trace);

struct Biquad {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;  // numerator
  double a1 = 0.0, a2 = 0.0;            // denominator, a0 normalized to 1
};

// 4th-order Butterworth band-pass (order-2 analog prototype, band transform,
// bilinear mapping with frequency prewarping) as two cascaded biquads with
// the overall gain folded into the first section.
std::array<Biquad, 2> design_bandpass(double low_hz, double high_hz,
                                      double rate);

// Zero-phase band-pass: the design above applied forward and backward with
// odd-symmetric edge padding, so passband phase is preserved and the
// effective attenuation doubles. Requires 0 < low < high < rate / 2.
SignalTrace bandpass(const SignalTrace& trace, double low_hz = 0.3,
                     double high_hz = 40.0);

// (x - mean) / sd with the population standard deviation; sd = 0 raises
// ZeroVariance.
SignalTrace znormalize(const SignalTrace& trace);

// Verdict of the amplitude quality gate over non-overlapping 30 s windows.
// A window is discarded when on any channel its peak magnitude is at most
// epsilon times that channel's whole-recording peak. Trailing samples that
// do not fill a window are ignored.
struct QualityReport {
  double good_seconds = 0.0;
  std::vector<std::pair<double, double>> discarded_spans;  // [start, end) s
  bool passed = false;
  std::vector<std::uint8_t> window_kept;  // one flag per complete window
};

QualityReport quality_gate(std::span<const SignalTrace> channels,
                           double epsilon = 1e-4,
                           double required_seconds = 18000.0);

// Kept 30 s epochs of a multichannel recording, epoch-major then
// channel-major: data[(e * C + c) * samples_per_epoch + s].
struct EpochGrid {
  std::string recording_id;
  std::vector<std::string> channel_labels;
  double rate = 0.0;
  std::size_t samples_per_epoch = 0;
  std::vector<std::size_t> source_epoch_index;  // pre-gate epoch numbers
  std::vector<double> data;
  std::vector<std::string> history;

  std::size_t epoch_count() const { return source_epoch_index.size(); }
  std::size_t channel_count() const { return channel_labels.size(); }
  std::span<const double> frame(std::size_t epoch, std::size_t channel) const {
    return {data.data() +
                (epoch * channel_count() + channel) * samples_per_epoch,
            samples_per_epoch};
  }
};

// Cuts aligned channels into 30 s epochs, dropping those the quality report
// rejected. Pass quality = nullptr to keep every complete epoch.
EpochGrid segment_epochs(std::span<const SignalTrace> channels,
                         const QualityReport* quality = nullptr,
                         std::string recording_id = "");

// Log-magnitude short-time spectrum of one 30 s epoch on the 100 Hz grid:
// 2 s Hamming window, 1 s hop, 256-point FFT. 29 frames x 129 bins, values
// ln(max(|X|, 1e-12)).
struct Spectrogram {
  std::size_t frame_count = 0;
  std::size_t bin_count = 0;
  std::vector<double> values;  // frame-major

  double at(std::size_t frame, std::size_t bin) const {
    return values[frame * bin_count + bin];
  }
};

Spectrogram spectrogram(std::span<const double> frame);

struct PrepParams {
  double target_rate = 100.0;
  double clip_sigma = 6.0;
  double low_hz = 0.3;
  double high_hz = 40.0;
  double epsilon = 1e-4;
  double required_seconds = 18000.0;
  std::string recording_id;
};

struct PrepResult {
  EpochGrid epochs;
  QualityReport quality;
};

// The full conditioning chain in fixed order: resample, quality gate, clip,
// scale, band-pass, z-normalize, segment. A recording that fails the gate
// returns its quality report with an empty epoch grid; the remaining stages
// never run on rejected input.
PrepResult preprocess_recording(std::vector<SignalTrace> channels,
                                const PrepParams& params);

}  // namespace stagerbench::sigprep
