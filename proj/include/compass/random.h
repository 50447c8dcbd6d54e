// Copyright 2026 The Compass Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>

namespace compass {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3"). Matches the Random123 known-answer vectors.
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// Stateless counter-based generator. Every draw is a pure function of
// (seed, id, stream, index), so results do not depend on call order or on
// how work is split across threads.
//
// Counter layout: {index, stream, id low word, id high word}.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  PhiloxCounter block(std::uint64_t id, std::uint32_t stream,
                      std::uint32_t index) const;

  // Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t id, std::uint32_t stream, std::uint32_t index) const;
  // Standard normal via the Box-Muller transform (cosine branch).
  double normal(std::uint64_t id, std::uint32_t stream, std::uint32_t index) const;
  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound, std::uint64_t id, std::uint32_t stream,
                      std::uint32_t index) const;
  std::uint64_t bits64(std::uint64_t id, std::uint32_t stream,
                       std::uint32_t index) const;

 private:
  PhiloxKey key_;
};

// Independent child seed for a named sub-task of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t domain,
                          std::uint32_t index = 0);

}  // namespace compass
