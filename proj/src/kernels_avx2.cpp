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

// This translation unit is compiled with -mavx2 on x86-64 targets only; the
// dispatcher never selects kAvx2Table unless the CPU reports AVX2. No FMA is
// used so elementwise results stay bit-identical to the scalar path.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "kernels_impl.hpp"

namespace stagerbench::kernels::detail {
namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double avx2_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                             _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                             _mm256_loadu_pd(b + i + 4)));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void avx2_add(double* acc, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i),
                                            _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) acc[i] += x[i];
}

void avx2_mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void avx2_affine(double* x, std::size_t n, double scale, double shift) {
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d vshift = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        x + i, _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(x + i), vscale),
                             vshift));
  }
  for (; i < n; ++i) x[i] = x[i] * scale + shift;
}

void avx2_clamp(double* x, std::size_t n, double lo, double hi) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        x + i,
        _mm256_min_pd(_mm256_max_pd(_mm256_loadu_pd(x + i), vlo), vhi));
  }
  for (; i < n; ++i) {
    double v = x[i];
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    x[i] = v;
  }
}

double avx2_max_abs(const double* x, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d best = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    best = _mm256_max_pd(best,
                         _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
  }
  const __m128d lo = _mm256_castpd256_pd128(best);
  const __m128d hi = _mm256_extractf128_pd(best, 1);
  const __m128d pair = _mm_max_pd(lo, hi);
  double out = _mm_cvtsd_f64(_mm_max_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) {
    const double v = std::fabs(x[i]);
    if (v > out) out = v;
  }
  return out;
}

void avx2_sum_sumsq(const double* x, std::size_t n, double& sum,
                    double& sumsq) {
  __m256d vs = _mm256_setzero_pd();
  __m256d vss = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    vs = _mm256_add_pd(vs, v);
    vss = _mm256_add_pd(vss, _mm256_mul_pd(v, v));
  }
  double s = hsum(vs);
  double ss = hsum(vss);
  for (; i < n; ++i) {
    s += x[i];
    ss += x[i] * x[i];
  }
  sum = s;
  sumsq = ss;
}

std::size_t avx2_decode_i16le(const unsigned char* src, std::size_t n,
                              int dig_min, int dig_max, double phys_range,
                              double phys_min, double* out) {
  const double dmin = static_cast<double>(dig_min);
  const double dig_range = static_cast<double>(dig_max) - dmin;
  const __m128i vmin = _mm_set1_epi32(dig_min);
  const __m128i vmax = _mm_set1_epi32(dig_max);
  const __m256d vdmin = _mm256_set1_pd(dmin);
  const __m256d vdrange = _mm256_set1_pd(dig_range);
  const __m256d vprange = _mm256_set1_pd(phys_range);
  const __m256d vpmin = _mm256_set1_pd(phys_min);
  std::size_t out_of_range = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i raw =
        _mm_loadl_epi64(reinterpret_cast<const __m128i*>(src + 2 * i));
    const __m128i d32 = _mm_cvtepi16_epi32(raw);
    const __m128i bad = _mm_or_si128(_mm_cmpgt_epi32(vmin, d32),
                                     _mm_cmpgt_epi32(d32, vmax));
    out_of_range += static_cast<std::size_t>(
        __builtin_popcount(_mm_movemask_ps(_mm_castsi128_ps(bad))));
    const __m256d v = _mm256_cvtepi32_pd(d32);
    const __m256d t = _mm256_div_pd(_mm256_sub_pd(v, vdmin), vdrange);
    _mm256_storeu_pd(out + i,
                     _mm256_add_pd(_mm256_mul_pd(t, vprange), vpmin));
  }
  for (; i < n; ++i) {
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

bool avx2_supported() { return __builtin_cpu_supports("avx2") != 0; }

const KernelTable kAvx2Table = {
    avx2_dot,     avx2_add,       avx2_mul,
    avx2_affine,  avx2_clamp,     avx2_max_abs,
    avx2_sum_sumsq, avx2_decode_i16le,
};

}  // namespace stagerbench::kernels::detail

#endif  // x86-64
