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

#include "stagerbench/rng.hpp"

#include <cmath>
#include <numbers>

namespace stagerbench {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SplitRng::SplitRng(std::uint64_t seed) : seed_(seed), state_(seed) {}

SplitRng SplitRng::fork(std::uint64_t stream) const {
  // Child seed mixes the parent seed with the stream index; independent of
  // how much the parent has already drawn.
  std::uint64_t h = seed_ ^ (stream * 0xA24BAED4963EE407ULL +
                             0x9FB21C651E98DF25ULL);
  return SplitRng(splitmix64(h));
}

std::uint64_t SplitRng::next_u64() { return splitmix64(state_); }

double SplitRng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SplitRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::size_t SplitRng::categorical(std::span<const double> probs) {
  if (probs.empty()) throw Error("categorical draw from no categories");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw Error("categorical probabilities must be >= 0");
    total += p;
  }
  if (total <= 0.0) throw Error("categorical probabilities sum to zero");
  const double u = uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

double SplitRng::normal() {
  const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double SplitRng::gamma(double alpha) {
  if (!(alpha >= 1.0)) {
    throw Error("gamma sampler requires alpha >= 1, got " +
                std::to_string(alpha));
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace stagerbench
