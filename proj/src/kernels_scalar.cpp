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

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "kernels_impl.hpp"

namespace stagerbench::kernels::detail {
namespace {

double scalar_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void scalar_add(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void scalar_mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scalar_affine(double* x, std::size_t n, double scale, double shift) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] * scale + shift;
}

void scalar_clamp(double* x, std::size_t n, double lo, double hi) {
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    x[i] = v;
  }
}

double scalar_max_abs(const double* x, std::size_t n) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = std::fabs(x[i]);
    if (v > best) best = v;
  }
  return best;
}

void scalar_sum_sumsq(const double* x, std::size_t n, double& sum,
                      double& sumsq) {
  double s = 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += x[i];
    ss += x[i] * x[i];
  }
  sum = s;
  sumsq = ss;
}

std::size_t scalar_decode_i16le(const unsigned char* src, std::size_t n,
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

const KernelTable kScalarTable = {
    scalar_dot,     scalar_add,       scalar_mul,
    scalar_affine,  scalar_clamp,     scalar_max_abs,
    scalar_sum_sumsq, scalar_decode_i16le,
};

}  // namespace stagerbench::kernels::detail
