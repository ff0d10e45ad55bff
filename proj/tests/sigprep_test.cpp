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
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "stagerbench/sigprep.hpp"

using namespace stagerbench;

namespace {

SignalTrace tone(double freq, double rate, double seconds,
                 double amplitude = 1.0, std::string label = "tone") {
  SignalTrace t;
  t.rate = rate;
  t.label = std::move(label);
  const auto n = static_cast<std::size_t>(seconds * rate);
  t.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    t.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq *
                                        static_cast<double>(i) / rate);
  return t;
}

double rms(std::span<const double> x) {
  double ss = 0.0;
  for (const double v : x) ss += v * v;
  return std::sqrt(ss / static_cast<double>(x.size()));
}

}  // namespace

TEST_CASE("band-pass design matches the frozen reference coefficients") {
  const auto sos = sigprep::design_bandpass(0.3, 40.0, 100.0);
  CHECK(sos[0].b0 == doctest::Approx(0.6302144041328479).epsilon(1e-9));
  CHECK(sos[0].b1 == doctest::Approx(1.2604288082656958).epsilon(1e-9));
  CHECK(sos[0].b2 == doctest::Approx(0.6302144041328479).epsilon(1e-9));
  CHECK(sos[0].a1 == doctest::Approx(1.1416952727719698).epsilon(1e-9));
  CHECK(sos[0].a2 == doctest::Approx(0.4130597572397635).epsilon(1e-9));
  CHECK(sos[1].b0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sos[1].b1 == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(sos[1].b2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sos[1].a1 == doctest::Approx(-1.973343097810542).epsilon(1e-9));
  CHECK(sos[1].a2 == doctest::Approx(0.9736958673309489).epsilon(1e-9));
}

TEST_CASE("band-pass keeps 10 Hz and rejects band-edge tones") {
  const double rate = 100.0;
  const auto passband = sigprep::bandpass(tone(10.0, rate, 120.0));
  // Skip the first and last 5 s to measure steady-state response.
  const std::span<const double> mid_pass{passband.samples.data() + 500,
                                         passband.samples.size() - 1000};
  const double gain_10 = oracles::tone_amplitude(mid_pass, 10.0, rate);
  CHECK(std::fabs(20.0 * std::log10(gain_10)) <= 0.1);

  // The untrimmed projection holds too: zero-phase edge transients must not
  // inflate the signal anywhere.
  const double gain_full =
      oracles::tone_amplitude(passband.samples, 10.0, rate);
  CHECK(std::fabs(20.0 * std::log10(gain_full)) <= 1.0);
  double peak = 0.0;
  for (const double v : passband.samples) peak = std::max(peak, std::fabs(v));
  CHECK(peak <= 2.0);

  const auto low = sigprep::bandpass(tone(0.05, rate, 240.0));
  const double gain_low = oracles::tone_amplitude(
      {low.samples.data() + 2000, low.samples.size() - 4000}, 0.05, rate);
  CHECK(20.0 * std::log10(gain_low) < -20.0);

  const auto high = sigprep::bandpass(tone(49.0, rate, 120.0));
  const double gain_high = oracles::tone_amplitude(
      {high.samples.data() + 500, high.samples.size() - 1000}, 49.0, rate);
  CHECK(20.0 * std::log10(gain_high) < -20.0);
}

TEST_CASE("band-pass is linear") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SignalTrace x, y;
  x.rate = y.rate = 100.0;
  x.samples.resize(3000);
  y.samples.resize(3000);
  for (auto& v : x.samples) v = dist(rng);
  for (auto& v : y.samples) v = dist(rng);

  SignalTrace combo = x;
  for (std::size_t i = 0; i < combo.samples.size(); ++i)
    combo.samples[i] = 2.5 * x.samples[i] - 0.75 * y.samples[i];

  const auto fx = sigprep::bandpass(x);
  const auto fy = sigprep::bandpass(y);
  const auto fcombo = sigprep::bandpass(combo);
  std::vector<double> diff(fcombo.samples.size());
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff[i] =
        fcombo.samples[i] - (2.5 * fx.samples[i] - 0.75 * fy.samples[i]);
  CHECK(rms(diff) < 1e-6);
}

TEST_CASE("band-pass rejects invalid bands") {
  const auto x = tone(1.0, 100.0, 40.0);
  CHECK_THROWS_AS(sigprep::bandpass(x, 0.0, 40.0), sigprep::InvalidBand);
  CHECK_THROWS_AS(sigprep::bandpass(x, 40.0, 0.3), sigprep::InvalidBand);
  CHECK_THROWS_AS(sigprep::bandpass(x, 0.3, 50.0), sigprep::InvalidBand);
}

TEST_CASE("resampler preserves a 10 Hz tone from 256 to 100 Hz") {
  const auto out = sigprep::resample(tone(10.0, 256.0, 60.0), 100.0);
  CHECK(out.rate == 100.0);
  CHECK(out.samples.size() == (15360 * 25 + 63) / 64);  // ceil(n * 25 / 64)
  const std::span<const double> mid{out.samples.data() + 500,
                                    out.samples.size() - 1000};
  // Amplitude within 1 percent.
  CHECK(oracles::tone_amplitude(mid, 10.0, 100.0) ==
        doctest::Approx(1.0).epsilon(0.01));
  // The energy sits at 10 Hz, not at the neighboring bins.
  CHECK(oracles::tone_amplitude(mid, 9.0, 100.0) < 0.01);
  CHECK(oracles::tone_amplitude(mid, 11.0, 100.0) < 0.01);
}

TEST_CASE("resampling to the same rate copies the samples") {
  const auto x = tone(3.0, 100.0, 10.0);
  const auto out = sigprep::resample(x, 100.0);
  REQUIRE(out.samples.size() == x.samples.size());
  for (std::size_t i = 0; i < x.samples.size(); ++i)
    CHECK(out.samples[i] == x.samples[i]);
  CHECK(out.history.back() == "resample");
}

TEST_CASE("resampler output length is ceil(n * L / M)") {
  for (const auto& [from, to, n] :
       {std::tuple{200.0, 100.0, 999}, {100.0, 128.0, 777},
        {512.0, 100.0, 123}, {30.0, 100.0, 10}}) {
    SignalTrace x;
    x.rate = from;
    x.samples.assign(static_cast<std::size_t>(n), 1.0);
    const auto out = sigprep::resample(x, to);
    // Recover L/M from the rates (all exactly rational here).
    std::size_t up = static_cast<std::size_t>(to), down =
        static_cast<std::size_t>(from);
    const std::size_t g = std::gcd(up, down);
    up /= g;
    down /= g;
    CHECK(out.samples.size() ==
          (static_cast<std::size_t>(n) * up + down - 1) / down);
  }
}

TEST_CASE("clip_outliers clamps a spike at the frozen bound") {
  SignalTrace x;
  x.rate = 100.0;
  x.samples.assign(10000, 0.0);
  x.samples.push_back(1000.0);
  const auto out = sigprep::clip_outliers(x, 6.0);
  CHECK(out.samples.back() ==
        doctest::Approx(60.093990600939925).epsilon(1e-12));
  for (std::size_t i = 0; i + 1 < out.samples.size(); ++i)
    CHECK(out.samples[i] == 0.0);
  CHECK(out.history.back() == "clip");
}

TEST_CASE("clip_outliers is the identity on a constant trace") {
  SignalTrace x;
  x.rate = 10.0;
  x.samples.assign(50, 3.25);
  const auto out = sigprep::clip_outliers(x);
  for (const double v : out.samples) CHECK(v == 3.25);
}

TEST_CASE("scale_to_unit and znormalize are idempotent") {
  const auto x = tone(4.0, 100.0, 20.0, 17.0);
  const auto once = sigprep::scale_to_unit(x);
  const auto twice = sigprep::scale_to_unit(once);
  for (std::size_t i = 0; i < once.samples.size(); ++i)
    CHECK(twice.samples[i] == doctest::Approx(once.samples[i]).epsilon(1e-9));
  double peak = 0.0;
  for (const double v : once.samples) peak = std::max(peak, std::fabs(v));
  CHECK(peak == doctest::Approx(1.0));

  const auto z1 = sigprep::znormalize(x);
  const auto z2 = sigprep::znormalize(z1);
  for (std::size_t i = 0; i < z1.samples.size(); ++i)
    CHECK(z2.samples[i] == doctest::Approx(z1.samples[i]).epsilon(1e-9));

  SignalTrace flat;
  flat.rate = 10.0;
  flat.samples.assign(100, 2.0);
  CHECK_THROWS_AS(sigprep::znormalize(flat), sigprep::ZeroVariance);
}

TEST_CASE("quality gate discards flat windows and merges spans") {
  const double rate = 10.0;
  std::vector<SignalTrace> channels(2);
  for (auto& ch : channels) {
    ch.rate = rate;
    ch.samples.assign(5 * 300, 1.0);  // five 30 s windows
  }
  // Channel 1 goes flat (zero) during windows 1 and 2.
  for (std::size_t i = 300; i < 900; ++i) channels[1].samples[i] = 0.0;
  const auto report = sigprep::quality_gate(channels, 1e-4, 60.0);
  CHECK(report.window_kept == std::vector<std::uint8_t>{1, 0, 0, 1, 1});
  CHECK(report.good_seconds == 90.0);
  CHECK(report.passed);
  REQUIRE(report.discarded_spans.size() == 1);
  CHECK(report.discarded_spans[0].first == 30.0);
  CHECK(report.discarded_spans[0].second == 90.0);

  SUBCASE("stricter requirement fails the recording") {
    const auto strict = sigprep::quality_gate(channels, 1e-4, 120.0);
    CHECK(!strict.passed);
  }
  SUBCASE("an all-zero channel fails every window") {
    for (auto& v : channels[0].samples) v = 0.0;
    const auto zero = sigprep::quality_gate(channels, 1e-4, 30.0);
    CHECK(zero.good_seconds == 0.0);
    CHECK(!zero.passed);
  }
  SUBCASE("mismatched channel lengths are rejected") {
    channels[1].samples.pop_back();
    CHECK_THROWS_AS(sigprep::quality_gate(channels, 1e-4, 60.0),
                    sigprep::MismatchedChannelLengths);
  }
}

TEST_CASE("segment_epochs keeps gated epochs and records their origin") {
  const double rate = 10.0;
  std::vector<SignalTrace> channels(2);
  for (std::size_t c = 0; c < 2; ++c) {
    channels[c].rate = rate;
    channels[c].label = c == 0 ? "a" : "b";
    channels[c].samples.resize(4 * 300 + 7);  // 4 epochs plus a ragged tail
    for (std::size_t i = 0; i < channels[c].samples.size(); ++i)
      channels[c].samples[i] =
          static_cast<double>(i) + (c == 0 ? 0.0 : 10000.0);
  }
  sigprep::QualityReport quality;
  quality.window_kept = {1, 0, 1, 1};
  const auto grid = sigprep::segment_epochs(channels, &quality, "rec-1");
  CHECK(grid.recording_id == "rec-1");
  CHECK(grid.channel_labels == std::vector<std::string>{"a", "b"});
  CHECK(grid.epoch_count() == 3);
  CHECK(grid.samples_per_epoch == 300);
  CHECK(grid.source_epoch_index == std::vector<std::size_t>{0, 2, 3});
  // Epoch 1 of the grid is source epoch 2: samples 600..899.
  CHECK(grid.frame(1, 0)[0] == 600.0);
  CHECK(grid.frame(1, 1)[0] == 10600.0);
  CHECK(grid.data.size() == 3 * 2 * 300);

  const auto ungated = sigprep::segment_epochs(channels, nullptr, "rec-1");
  CHECK(ungated.epoch_count() == 4);
}

TEST_CASE("spectrogram shape and content") {
  SignalTrace x = tone(10.0, 100.0, 30.0);
  REQUIRE(x.samples.size() == 3000);
  const auto spec = sigprep::spectrogram(x.samples);
  CHECK(spec.frame_count == 29);
  CHECK(spec.bin_count == 129);
  REQUIRE(spec.values.size() == 29 * 129);

  // One cell against a naive windowed DFT: frame 3 covers samples
  // [300, 500); bin 26 sits near 10 Hz on the 256-point grid.
  std::vector<double> windowed(200);
  for (std::size_t i = 0; i < 200; ++i) {
    const double w =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / 199.0);
    windowed[i] = x.samples[300 + i] * w;
  }
  const double mag = oracles::dft_bin_magnitude(windowed, 26, 256);
  CHECK(spec.at(3, 26) ==
        doctest::Approx(std::log(std::max(mag, 1e-12))).epsilon(1e-6));

  SUBCASE("all-zero epochs hit the log floor") {
    const std::vector<double> zeros(3000, 0.0);
    const auto flat = sigprep::spectrogram(zeros);
    for (const double v : flat.values)
      CHECK(v == doctest::Approx(std::log(1e-12)));
  }
  SUBCASE("wrong frame length is rejected") {
    const std::vector<double> frame(2999, 0.0);
    CHECK_THROWS_AS(sigprep::spectrogram(frame), sigprep::WrongFrameLength);
  }
}

TEST_CASE("preprocess_recording composes the stages in the fixed order") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> noise(-50.0, 50.0);
  std::vector<SignalTrace> channels(2);
  for (std::size_t c = 0; c < 2; ++c) {
    channels[c].rate = 128.0;
    channels[c].label = c == 0 ? "EEG C3-M2" : "EOG E1-M2";
    channels[c].samples.resize(static_cast<std::size_t>(128.0 * 150));
    for (auto& v : channels[c].samples) v = noise(rng);
  }
  sigprep::PrepParams params;
  params.target_rate = 100.0;
  params.required_seconds = 120.0;
  params.recording_id = "rec-7";
  const auto result = sigprep::preprocess_recording(channels, params);
  CHECK(result.quality.passed);
  CHECK(result.epochs.recording_id == "rec-7");
  CHECK(result.epochs.epoch_count() == 5);
  CHECK(result.epochs.samples_per_epoch == 3000);
  CHECK(result.epochs.rate == 100.0);
  CHECK(result.epochs.history ==
        std::vector<std::string>{"resample", "quality", "clip", "scale",
                                 "bandpass", "znormalize", "segment"});
  // Every epoch frame feeds the spectrogram cleanly.
  const auto spec = sigprep::spectrogram(result.epochs.frame(2, 1));
  CHECK(spec.frame_count == 29);
  CHECK(spec.bin_count == 129);
}
