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

#include "stagerbench/sigprep.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "stagerbench/kernels.hpp"

namespace stagerbench::sigprep {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kWindowSeconds = 30.0;
constexpr long kMaxRatioDenominator = 65536;

// Spectrogram geometry on the 100 Hz epoch grid.
constexpr std::size_t kEpochSamples = 3000;
constexpr std::size_t kStftWindow = 200;  // 2 s
constexpr std::size_t kStftHop = 100;     // 1 s
constexpr std::size_t kStftFft = 256;
constexpr std::size_t kStftBins = kStftFft / 2 + 1;
constexpr double kLogFloor = 1e-12;

void require_nonempty(const SignalTrace& trace, const char* op) {
  if (trace.samples.empty()) {
    throw EmptyTrace(std::string(op) + " needs a nonempty trace");
  }
}

void require_rate(const SignalTrace& trace, const char* op) {
  if (!(trace.rate > 0.0) || !std::isfinite(trace.rate)) {
    throw ZeroRate(std::string(op) + " needs a positive sample rate, got " +
                   std::to_string(trace.rate));
  }
}

struct Rational {
  long num = 0;
  long den = 1;
};

// Best rational approximation with bounded denominator, by continued
// fractions. Exact whenever x is a ratio of small integers.
Rational approximate_ratio(double x, long max_den) {
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int it = 0; it < 64; ++it) {
    const double af = std::floor(frac);
    if (af > 1e15) break;
    const long a = static_cast<long>(af);
    const long p2 = a * p1 + p0;
    const long q2 = a * q1 + q0;
    if (q2 > max_den || p2 < 0) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double rem = frac - af;
    if (rem < 1e-12) break;
    frac = 1.0 / rem;
    if (!std::isfinite(frac)) break;
  }
  if (p1 < 1 || q1 < 1) {
    throw ZeroRate("rate ratio " + std::to_string(x) +
                   " has no usable rational approximation");
  }
  return {p1, q1};
}

double mean_of(const SignalTrace& trace, double* sd_out) {
  double sum = 0.0, sumsq = 0.0;
  kernels::sum_sumsq(trace.samples.data(), trace.samples.size(), sum, sumsq);
  const double n = static_cast<double>(trace.samples.size());
  const double mean = sum / n;
  const double var = std::max(0.0, sumsq / n - mean * mean);
  *sd_out = std::sqrt(var);
  return mean;
}

// Transposed direct-form-II update. State is scaled in place.
void biquad_pass(const Biquad& q, double* x, std::size_t n, double s0,
                 double s1) {
  for (std::size_t i = 0; i < n; ++i) {
    const double in = x[i];
    const double out = q.b0 * in + s0;
    s0 = q.b1 * in - q.a1 * out + s1;
    s1 = q.b2 * in - q.a2 * out;
    x[i] = out;
  }
}

double dc_gain(const Biquad& q) {
  return (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
}

// Steady-state unit step response of the filter state, per section: start a
// pass on a constant signal without transient. On a constant input u the
// update above is stationary exactly when out == g*u, s0 == (g - b0)*u and
// s1 == (b2 - a2*g)*u with g the section DC gain. Sections whose numerator
// vanishes at DC get g == 0 exactly, so a near-singular 1 + a1 + a2 never
// inflates the state.
void unit_state(const Biquad& q, double& zi0, double& zi1) {
  const double g = dc_gain(q);
  zi0 = g - q.b0;
  zi1 = q.b2 - q.a2 * g;
}

void cascade_pass(const std::array<Biquad, 2>& sos, double* x, std::size_t n) {
  if (n == 0) return;
  const double x0 = x[0];
  double scale = 1.0;
  for (const Biquad& q : sos) {
    double zi0 = 0.0, zi1 = 0.0;
    unit_state(q, zi0, zi1);
    biquad_pass(q, x, n, zi0 * scale * x0, zi1 * scale * x0);
    scale *= dc_gain(q);
  }
}

double pole_radius(const Biquad& q) {
  const double disc = q.a1 * q.a1 - 4.0 * q.a2;
  if (disc <= 0.0) return std::sqrt(std::max(0.0, q.a2));
  const double root = std::sqrt(disc);
  return std::max(std::fabs(-q.a1 + root), std::fabs(-q.a1 - root)) / 2.0;
}

// Edge padding long enough for the slowest pole's transient to die out
// inside the pad (nine time constants), so narrow low corners do not leak
// startup wiggle into the output.
std::size_t transient_pad(const std::array<Biquad, 2>& sos, std::size_t n) {
  double radius = 0.0;
  for (const Biquad& q : sos) radius = std::max(radius, pole_radius(q));
  std::size_t pad = 15;
  if (radius > 0.0 && radius < 1.0) {
    pad = std::max(pad, static_cast<std::size_t>(
                            std::ceil(-9.0 / std::log(radius))));
  }
  return std::min(pad, n - 1);
}

std::vector<double> filtfilt(const std::array<Biquad, 2>& sos,
                             std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t padlen = transient_pad(sos, n);

  // Odd extension at both edges suppresses startup transients.
  std::vector<double> ext(n + 2 * padlen);
  for (std::size_t i = 0; i < padlen; ++i) {
    ext[i] = 2.0 * x[0] - x[padlen - i];
  }
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<long>(padlen));
  for (std::size_t i = 0; i < padlen; ++i) {
    ext[padlen + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  }

  cascade_pass(sos, ext.data(), ext.size());
  std::reverse(ext.begin(), ext.end());
  cascade_pass(sos, ext.data(), ext.size());
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<long>(padlen),
          ext.begin() + static_cast<long>(padlen + n)};
}

void check_aligned_channels(std::span<const SignalTrace> channels,
                            const char* op) {
  if (channels.empty()) {
    throw EmptyTrace(std::string(op) + " needs at least one channel");
  }
  require_rate(channels[0], op);
  for (std::size_t c = 1; c < channels.size(); ++c) {
    if (channels[c].samples.size() != channels[0].samples.size() ||
        channels[c].rate != channels[0].rate) {
      throw MismatchedChannelLengths(
          std::string(op) + ": channel '" + channels[c].label +
          "' does not align with channel '" + channels[0].label + "'");
    }
  }
}

}  // namespace

SignalTrace resample(const SignalTrace& in, double target_rate) {
  require_rate(in, "resample");
  if (!(target_rate > 0.0) || !std::isfinite(target_rate)) {
    throw ZeroRate("resample target rate must be positive, got " +
                   std::to_string(target_rate));
  }

  SignalTrace out;
  out.label = in.label;
  out.unit = in.unit;
  out.history = in.history;
  out.history.push_back("resample");

  if (std::fabs(target_rate - in.rate) <=
      1e-9 * std::max(target_rate, in.rate)) {
    out.samples = in.samples;
    out.rate = in.rate;
    return out;
  }

  const Rational r =
      approximate_ratio(target_rate / in.rate, kMaxRatioDenominator);
  const long up = r.num;
  const long down = r.den;
  const long max_rate = std::max(up, down);

  // Windowed-sinc low-pass at the common rate: cutoff at the tighter Nyquist
  // frequency, Blackman window, gain `up` to undo zero insertion.
  const long half = 10 * max_rate;
  const long taps = 2 * half + 1;
  const double fc = 0.5 / static_cast<double>(max_rate);
  std::vector<double> h(static_cast<std::size_t>(taps));
  for (long k = 0; k < taps; ++k) {
    const double t = static_cast<double>(k - half);
    const double arg = 2.0 * fc * t;
    const double sinc = arg == 0.0 ? 1.0 : std::sin(kPi * arg) / (kPi * arg);
    const double phase = static_cast<double>(k) / static_cast<double>(taps - 1);
    const double window = 0.42 - 0.5 * std::cos(2.0 * kPi * phase) +
                          0.08 * std::cos(4.0 * kPi * phase);
    h[static_cast<std::size_t>(k)] =
        2.0 * fc * sinc * window * static_cast<double>(up);
  }

  // Polyphase split, taps reversed per phase so the inner loop is a
  // contiguous forward dot product.
  std::vector<std::vector<double>> phases(static_cast<std::size_t>(up));
  for (long p = 0; p < up; ++p) {
    const long count = (taps - 1 - p) / up + 1;
    auto& rev = phases[static_cast<std::size_t>(p)];
    rev.resize(static_cast<std::size_t>(count));
    for (long m = 0; m < count; ++m) {
      rev[static_cast<std::size_t>(count - 1 - m)] =
          h[static_cast<std::size_t>(p + m * up)];
    }
  }

  const std::size_t n = in.samples.size();
  const std::size_t n_out =
      (n * static_cast<std::size_t>(up) + static_cast<std::size_t>(down) - 1) /
      static_cast<std::size_t>(down);
  out.samples.resize(n_out);
  out.rate = target_rate;

  const double* x = in.samples.data();
  for (std::size_t j = 0; j < n_out; ++j) {
    const long p = static_cast<long>(j) * down + half;
    const long q = p / up;
    const auto& rev = phases[static_cast<std::size_t>(p % up)];
    const long count = static_cast<long>(rev.size());
    const long first = q - count + 1;
    const long lo = std::max<long>(0, first);
    const long hi = std::min<long>(q, static_cast<long>(n) - 1);
    double acc = 0.0;
    if (hi >= lo) {
      acc = kernels::dot(rev.data() + (lo - first), x + lo,
                         static_cast<std::size_t>(hi - lo + 1));
    }
    out.samples[j] = acc;
  }
  return out;
}

SignalTrace clip_outliers(const SignalTrace& trace, double sigma) {
  require_nonempty(trace, "clip_outliers");
  SignalTrace out = trace;
  double sd = 0.0;
  const double mean = mean_of(trace, &sd);
  kernels::clamp(out.samples.data(), out.samples.size(), mean - sigma * sd,
                 mean + sigma * sd);
  out.history.push_back("clip");
  return out;
}

SignalTrace scale_to_unit(const SignalTrace& trace) {
  require_nonempty(trace, "scale_to_unit");
  SignalTrace out = trace;
  const double peak =
      kernels::max_abs(out.samples.data(), out.samples.size());
  if (peak > 0.0) {
    kernels::affine(out.samples.data(), out.samples.size(), 1.0 / peak, 0.0);
  }
  out.unit = "norm";
  out.history.push_back("scale");
  return out;
}

std::array<Biquad, 2> design_bandpass(double low_hz, double high_hz,
                                      double rate) {
  using C = std::complex<double>;
  const double fs2 = 2.0 * rate;

  // Prewarp the corner frequencies for the bilinear map.
  const double w1 = fs2 * std::tan(kPi * low_hz / rate);
  const double w2 = fs2 * std::tan(kPi * high_hz / rate);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // Order-2 Butterworth prototype poles on the unit circle.
  const C proto[2] = {std::polar(1.0, 3.0 * kPi / 4.0),
                      std::polar(1.0, 5.0 * kPi / 4.0)};

  // Low-pass to band-pass: each prototype pole splits into two.
  C apoles[4];
  for (int k = 0; k < 2; ++k) {
    const C s = proto[k] * (bw / 2.0);
    const C d = std::sqrt(s * s - C(w0sq, 0.0));
    apoles[2 * k] = s + d;
    apoles[2 * k + 1] = s - d;
  }
  const double k_analog = bw * bw;  // bw^N, zeros at s = 0 carry no gain

  // Bilinear transform. The two analog zeros at s = 0 land on z = +1; the
  // two degree-matching zeros land on z = -1.
  C zpoles[4];
  C den(1.0, 0.0);
  for (int k = 0; k < 4; ++k) {
    zpoles[k] = (C(fs2, 0.0) + apoles[k]) / (C(fs2, 0.0) - apoles[k]);
    den *= C(fs2, 0.0) - apoles[k];
  }
  const double k_digital = k_analog * (C(fs2 * fs2, 0.0) / den).real();

  // Group into conjugate pairs by real part: the pair nearer z = -1 takes
  // the z = -1 zeros and the overall gain, the pair nearer z = +1 takes the
  // z = +1 zeros.
  std::sort(zpoles, zpoles + 4, [](const C& a, const C& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  const auto denom = [](const C& p, double& a1, double& a2) {
    a1 = -2.0 * p.real();
    a2 = std::norm(p);
  };

  std::array<Biquad, 2> sos;
  sos[0].b0 = k_digital;
  sos[0].b1 = 2.0 * k_digital;
  sos[0].b2 = k_digital;
  denom(zpoles[0], sos[0].a1, sos[0].a2);
  sos[1].b0 = 1.0;
  sos[1].b1 = -2.0;
  sos[1].b2 = 1.0;
  denom(zpoles[2], sos[1].a1, sos[1].a2);
  return sos;
}

SignalTrace bandpass(const SignalTrace& trace, double low_hz, double high_hz) {
  require_nonempty(trace, "bandpass");
  require_rate(trace, "bandpass");
  if (!(low_hz > 0.0) || !(high_hz > low_hz) ||
      !(high_hz < trace.rate / 2.0)) {
    throw InvalidBand("band [" + std::to_string(low_hz) + ", " +
                      std::to_string(high_hz) +
                      "] Hz is not inside (0, rate/2) for rate " +
                      std::to_string(trace.rate));
  }
  SignalTrace out = trace;
  out.samples = filtfilt(design_bandpass(low_hz, high_hz, trace.rate),
                         trace.samples);
  out.history.push_back("bandpass");
  return out;
}

SignalTrace znormalize(const SignalTrace& trace) {
  require_nonempty(trace, "znormalize");
  SignalTrace out = trace;
  double sd = 0.0;
  const double mean = mean_of(trace, &sd);
  if (sd == 0.0) {
    throw ZeroVariance("znormalize: trace '" + trace.label +
                       "' has zero variance");
  }
  kernels::affine(out.samples.data(), out.samples.size(), 1.0 / sd,
                  -mean / sd);
  out.history.push_back("znormalize");
  return out;
}

QualityReport quality_gate(std::span<const SignalTrace> channels,
                           double epsilon, double required_seconds) {
  check_aligned_channels(channels, "quality_gate");
  const double rate = channels[0].rate;
  const std::size_t window =
      static_cast<std::size_t>(std::llround(kWindowSeconds * rate));
  if (window == 0) {
    throw ZeroRate("quality_gate: rate too low for a 30 s window");
  }
  const std::size_t n_windows = channels[0].samples.size() / window;

  QualityReport report;
  report.window_kept.assign(n_windows, 1);

  for (const SignalTrace& ch : channels) {
    const double peak =
        kernels::max_abs(ch.samples.data(), ch.samples.size());
    const double floor = epsilon * peak;
    for (std::size_t w = 0; w < n_windows; ++w) {
      if (report.window_kept[w] == 0) continue;
      const double local =
          kernels::max_abs(ch.samples.data() + w * window, window);
      if (local <= floor) report.window_kept[w] = 0;
    }
  }

  std::size_t kept = 0;
  for (std::size_t w = 0; w < n_windows; ++w) {
    if (report.window_kept[w] != 0) {
      ++kept;
      continue;
    }
    const double start = kWindowSeconds * static_cast<double>(w);
    const double end = start + kWindowSeconds;
    if (!report.discarded_spans.empty() &&
        report.discarded_spans.back().second == start) {
      report.discarded_spans.back().second = end;
    } else {
      report.discarded_spans.emplace_back(start, end);
    }
  }
  report.good_seconds = kWindowSeconds * static_cast<double>(kept);
  report.passed = report.good_seconds >= required_seconds;
  return report;
}

EpochGrid segment_epochs(std::span<const SignalTrace> channels,
                         const QualityReport* quality,
                         std::string recording_id) {
  check_aligned_channels(channels, "segment_epochs");
  const double rate = channels[0].rate;
  const std::size_t spe =
      static_cast<std::size_t>(std::llround(kWindowSeconds * rate));
  if (spe == 0) {
    throw ZeroRate("segment_epochs: rate too low for a 30 s epoch");
  }
  const std::size_t n_epochs = channels[0].samples.size() / spe;
  if (quality != nullptr && quality->window_kept.size() != n_epochs) {
    throw MismatchedChannelLengths(
        "quality report covers " +
        std::to_string(quality->window_kept.size()) + " windows but " +
        std::to_string(n_epochs) + " epochs are present");
  }

  EpochGrid grid;
  grid.recording_id = std::move(recording_id);
  grid.rate = rate;
  grid.samples_per_epoch = spe;
  for (const SignalTrace& ch : channels) {
    grid.channel_labels.push_back(ch.label);
  }
  grid.history = channels[0].history;
  grid.history.push_back("segment");

  for (std::size_t e = 0; e < n_epochs; ++e) {
    if (quality != nullptr && quality->window_kept[e] == 0) continue;
    grid.source_epoch_index.push_back(e);
    for (const SignalTrace& ch : channels) {
      const double* src = ch.samples.data() + e * spe;
      grid.data.insert(grid.data.end(), src, src + spe);
    }
  }
  return grid;
}

Spectrogram spectrogram(std::span<const double> frame) {
  if (frame.size() != kEpochSamples) {
    throw WrongFrameLength("spectrogram expects " +
                           std::to_string(kEpochSamples) +
                           " samples per epoch, got " +
                           std::to_string(frame.size()));
  }

  static const std::vector<double> hamming = [] {
    std::vector<double> w(kStftWindow);
    for (std::size_t i = 0; i < kStftWindow; ++i) {
      w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                    static_cast<double>(kStftWindow - 1));
    }
    return w;
  }();

  // One shared plan; execution on per-call arrays is thread-safe as long as
  // they carry the same alignment, which fftw_malloc guarantees.
  static std::mutex plan_mutex;
  static fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    if (plan == nullptr) {
      double* in = fftw_alloc_real(kStftFft);
      fftw_complex* out = fftw_alloc_complex(kStftBins);
      plan = fftw_plan_dft_r2c_1d(static_cast<int>(kStftFft), in, out,
                                  FFTW_ESTIMATE);
      fftw_free(in);
      fftw_free(out);
    }
  }

  double* in = fftw_alloc_real(kStftFft);
  fftw_complex* out = fftw_alloc_complex(kStftBins);

  Spectrogram spec;
  spec.frame_count = (kEpochSamples - kStftWindow) / kStftHop + 1;
  spec.bin_count = kStftBins;
  spec.values.resize(spec.frame_count * spec.bin_count);

  for (std::size_t f = 0; f < spec.frame_count; ++f) {
    const double* src = frame.data() + f * kStftHop;
    kernels::mul(src, hamming.data(), in, kStftWindow);
    std::fill(in + kStftWindow, in + kStftFft, 0.0);
    fftw_execute_dft_r2c(plan, in, out);
    for (std::size_t b = 0; b < kStftBins; ++b) {
      const double mag = std::hypot(out[b][0], out[b][1]);
      spec.values[f * kStftBins + b] = std::log(std::max(mag, kLogFloor));
    }
  }

  fftw_free(in);
  fftw_free(out);
  return spec;
}

PrepResult preprocess_recording(std::vector<SignalTrace> channels,
                                const PrepParams& params) {
  if (channels.empty()) {
    throw EmptyTrace("preprocess_recording needs at least one channel");
  }
  for (SignalTrace& ch : channels) {
    ch = resample(ch, params.target_rate);
  }
  PrepResult result;
  result.quality =
      quality_gate(channels, params.epsilon, params.required_seconds);
  if (!result.quality.passed) return result;
  for (SignalTrace& ch : channels) {
    ch.history.push_back("quality");
    ch = znormalize(
        bandpass(scale_to_unit(clip_outliers(ch, params.clip_sigma)),
                 params.low_hz, params.high_hz));
  }
  result.epochs =
      segment_epochs(channels, &result.quality, params.recording_id);
  return result;
}

}  // namespace stagerbench::sigprep
