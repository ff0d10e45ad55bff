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

namespace stagerbench::kernels::detail {

// One vtable per backend; the dispatcher in kernels.cpp picks one at startup.
struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*add)(double*, const double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*affine)(double*, std::size_t, double, double);
  void (*clamp)(double*, std::size_t, double, double);
  double (*max_abs)(const double*, std::size_t);
  void (*sum_sumsq)(const double*, std::size_t, double&, double&);
  std::size_t (*decode_i16le)(const unsigned char*, std::size_t, int, int,
                              double, double, double*);
};

extern const KernelTable kScalarTable;

#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Table;
bool avx2_supported();
#endif

#if defined(__aarch64__)
extern const KernelTable kNeonTable;
#endif

}  // namespace stagerbench::kernels::detail
