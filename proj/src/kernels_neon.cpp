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

// AArch64 NEON variants. float64x2 is baseline on AArch64 so there is no
// runtime feature probe; the dispatcher offers this table whenever the build
// targets AArch64. Separate multiply and add keep elementwise results
// bit-identical to the scalar path. decode_i16le stays scalar here: the
// int16 -> f64 widening chain buys nothing over the compiler's own code.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "kernels_impl.hpp"

namespace stagerbench::kernels::detail {
namespace {

double neon_dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  double out = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) out += a[i] * b[i];
  return out;
}

void neon_add(double* acc, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(x + i)));
  }
  for (; i < n; ++i) acc[i] += x[i];
}

void neon_mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void neon_affine(double* x, std::size_t n, double scale, double shift) {
  const float64x2_t vscale = vdupq_n_f64(scale);
  const float64x2_t vshift = vdupq_n_f64(shift);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vaddq_f64(vmulq_f64(vld1q_f64(x + i), vscale), vshift));
  }
  for (; i < n; ++i) x[i] = x[i] * scale + shift;
}

void neon_clamp(double* x, std::size_t n, double lo, double hi) {
  const float64x2_t vlo = vdupq_n_f64(lo);
  const float64x2_t vhi = vdupq_n_f64(hi);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vminq_f64(vmaxq_f64(vld1q_f64(x + i), vlo), vhi));
  }
  for (; i < n; ++i) {
    double v = x[i];
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    x[i] = v;
  }
}

double neon_max_abs(const double* x, std::size_t n) {
  float64x2_t best = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    best = vmaxq_f64(best, vabsq_f64(vld1q_f64(x + i)));
  }
  double out = vgetq_lane_f64(best, 0);
  const double hi = vgetq_lane_f64(best, 1);
  if (hi > out) out = hi;
  for (; i < n; ++i) {
    const double v = std::fabs(x[i]);
    if (v > out) out = v;
  }
  return out;
}

void neon_sum_sumsq(const double* x, std::size_t n, double& sum,
                    double& sumsq) {
  float64x2_t vs = vdupq_n_f64(0.0);
  float64x2_t vss = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    vs = vaddq_f64(vs, v);
    vss = vaddq_f64(vss, vmulq_f64(v, v));
  }
  double s = vgetq_lane_f64(vs, 0) + vgetq_lane_f64(vs, 1);
  double ss = vgetq_lane_f64(vss, 0) + vgetq_lane_f64(vss, 1);
  for (; i < n; ++i) {
    s += x[i];
    ss += x[i] * x[i];
  }
  sum = s;
  sumsq = ss;
}

std::size_t neon_decode_i16le(const unsigned char* src, std::size_t n,
                              int dig_min, int dig_max, double phys_range,
                              double phys_min, double* out) {
  const double dmin = static_cast<double>(dig_min);
  const double dig_range = static_cast<double>(dig_max) - dmin;
  std::size_t out_of_range = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint16_t raw = static_cast<std::uint16_t>(src[2 * i]) |
                              (static_cast<std::uint16_t>(src[2 * i + 1]) << 8);
    const int d = static_cast<std::int16_t>(raw);
    if (d < dig_min || d > dig_max) ++out_of_range;
    out[i] =
        (static_cast<double>(d) - dmin) / dig_range * phys_range + phys_min;
  }
  return out_of_range;
}

}  // namespace

const KernelTable kNeonTable = {
    neon_dot,     neon_add,       neon_mul,
    neon_affine,  neon_clamp,     neon_max_abs,
    neon_sum_sumsq, neon_decode_i16le,
};

}  // namespace stagerbench::kernels::detail

#endif  // __aarch64__
