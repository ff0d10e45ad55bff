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

#include <cstdint>
#include <span>

#include "stagerbench/error.hpp"

namespace stagerbench {

// Deterministic, splittable random source. The bit stream is defined by
// this implementation (splitmix64), not by the standard library, so a seed
// produces identical draws on every platform and toolchain. fork() derives
// an independent child stream from the parent's seed and a stream index,
// letting per-recording generation parallelize without changing results.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed);

  SplitRng fork(std::uint64_t stream) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01();

  double uniform(double lo, double hi);

  // Index distributed proportionally to the (nonnegative) entries of probs.
  std::size_t categorical(std::span<const double> probs);

  // Standard normal via Box-Muller (two uniforms per draw, none cached).
  double normal();

  // Gamma(alpha, 1) for alpha >= 1, Marsaglia-Tsang squeeze method.
  double gamma(double alpha);

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace stagerbench
