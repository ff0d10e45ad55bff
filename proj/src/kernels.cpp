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

#include "stagerbench/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"

namespace stagerbench::kernels {
namespace {

const detail::KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return &detail::kScalarTable;
    case Backend::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (detail::avx2_supported()) return &detail::kAvx2Table;
#endif
      return nullptr;
    case Backend::kNeon:
#if defined(__aarch64__)
      return &detail::kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Backend pick_default() {
  if (const char* env = std::getenv("STAGERBENCH_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0 && table_for(Backend::kAvx2)) {
      return Backend::kAvx2;
    }
    if (std::strcmp(env, "neon") == 0 && table_for(Backend::kNeon)) {
      return Backend::kNeon;
    }
    // Unknown or unavailable request falls through to auto-detection.
  }
  if (table_for(Backend::kAvx2)) return Backend::kAvx2;
  if (table_for(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

struct Dispatch {
  Backend backend;
  const detail::KernelTable* table;
  Dispatch() : backend(pick_default()), table(table_for(backend)) {}
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

const char* name(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::kScalar};
  if (table_for(Backend::kAvx2)) out.push_back(Backend::kAvx2);
  if (table_for(Backend::kNeon)) out.push_back(Backend::kNeon);
  return out;
}

Backend active_backend() { return dispatch().backend; }

bool set_backend(Backend backend) {
  const detail::KernelTable* table = table_for(backend);
  if (table == nullptr) return false;
  dispatch().backend = backend;
  dispatch().table = table;
  return true;
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}

void add(double* acc, const double* x, std::size_t n) {
  dispatch().table->add(acc, x, n);
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().table->mul(a, b, out, n);
}

void affine(double* x, std::size_t n, double scale, double shift) {
  dispatch().table->affine(x, n, scale, shift);
}

void clamp(double* x, std::size_t n, double lo, double hi) {
  dispatch().table->clamp(x, n, lo, hi);
}

double max_abs(const double* x, std::size_t n) {
  return dispatch().table->max_abs(x, n);
}

void sum_sumsq(const double* x, std::size_t n, double& sum, double& sumsq) {
  dispatch().table->sum_sumsq(x, n, sum, sumsq);
}

std::size_t decode_i16le(const unsigned char* src, std::size_t n, int dig_min,
                         int dig_max, double phys_range, double phys_min,
                         double* out) {
  return dispatch().table->decode_i16le(src, n, dig_min, dig_max, phys_range,
                                        phys_min, out);
}

}  // namespace stagerbench::kernels
