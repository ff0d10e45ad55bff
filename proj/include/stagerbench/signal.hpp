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
#include <string>
#include <vector>

namespace stagerbench {

// One channel of uniformly sampled physical signal. rate is in Hz and must
// be positive; samples are finite doubles in the unit given by `unit`.
// `history` records the names of the processing steps already applied, in
// order, so downstream code can assert pipeline composition.
struct SignalTrace {
  std::vector<double> samples;
  double rate = 0.0;
  std::string label;
  std::string unit;
  std::vector<std::string> history;

  double duration_seconds() const {
    return rate > 0.0 ? static_cast<double>(samples.size()) / rate : 0.0;
  }
};

}  // namespace stagerbench
