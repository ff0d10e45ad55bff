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
#include <cstdint>
#include <vector>

namespace stagerbench::kernels {

// Array primitives behind the signal-processing and scoring loops. Every
// operation has a scalar reference implementation plus, where the build
// target supports it, an AVX2 or NEON variant. The active variant is chosen
// once at startup (highest supported wins) and can be overridden with the
// STAGERBENCH_KERNELS environment variable ("scalar", "avx2", "neon") or
// set_backend(). Switching backends is not thread-safe; do it before
// spawning workers.
//
// Elementwise kernels (add, mul, affine, clamp, decode_i16le) are bit-exact
// across backends. Reductions (dot, max_abs, sum_sumsq) may reassociate and
// agree with the scalar path only to rounding error.

enum class Backend {
  kScalar,
  kAvx2,
  kNeon,
};

const char* name(Backend backend);

// Backends usable on this machine, always starting with kScalar.
std::vector<Backend> available_backends();

Backend active_backend();

// Returns false (and leaves the active backend unchanged) when the requested
// backend is not available on this machine.
bool set_backend(Backend backend);

// sum(a[i] * b[i]) for i in [0, n).
double dot(const double* a, const double* b, std::size_t n);

// acc[i] += x[i].
void add(double* acc, const double* x, std::size_t n);

// out[i] = a[i] * b[i]. out may alias a or b.
void mul(const double* a, const double* b, double* out, std::size_t n);

// x[i] = x[i] * scale + shift.
void affine(double* x, std::size_t n, double scale, double shift);

// x[i] = min(max(x[i], lo), hi). Requires lo <= hi.
void clamp(double* x, std::size_t n, double lo, double hi);

// max(|x[i]|); 0 for n == 0.
double max_abs(const double* x, std::size_t n);

// Accumulates sum(x[i]) and sum(x[i]^2) in one pass.
void sum_sumsq(const double* x, std::size_t n, double& sum, double& sumsq);

// Decodes n little-endian int16 samples starting at src into
// out[i] = (d - dig_min) / (dig_max - dig_min) * phys_range + phys_min, and
// returns how many raw values fell outside [dig_min, dig_max]. The division
// runs per sample so dig_min decodes to phys_min exactly and clean bounds
// reproduce their endpoints and midpoint bit for bit. src needs no
// alignment; out must hold n doubles.
std::size_t decode_i16le(const unsigned char* src, std::size_t n,
                         int dig_min, int dig_max, double phys_range,
                         double phys_min, double* out);

}  // namespace stagerbench::kernels
