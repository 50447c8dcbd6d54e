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

#include "compass/random.h"

#include <cmath>
#include <numbers>

namespace compass {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53 random bits from two words, scaled into [0, 1).
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

PhiloxCounter CounterRng::block(std::uint64_t id, std::uint32_t stream,
                                std::uint32_t index) const {
  return philox4x32({index, stream, static_cast<std::uint32_t>(id),
                     static_cast<std::uint32_t>(id >> 32)},
                    key_);
}

double CounterRng::uniform(std::uint64_t id, std::uint32_t stream,
                           std::uint32_t index) const {
  const PhiloxCounter b = block(id, stream, index);
  return to_unit(b[0], b[1]);
}

double CounterRng::normal(std::uint64_t id, std::uint32_t stream,
                          std::uint32_t index) const {
  const PhiloxCounter b = block(id, stream, index);
  const double u1 = 1.0 - to_unit(b[0], b[1]);  // (0, 1]
  const double u2 = to_unit(b[2], b[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::bits64(std::uint64_t id, std::uint32_t stream,
                                 std::uint32_t index) const {
  const PhiloxCounter b = block(id, stream, index);
  return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
}

std::uint64_t CounterRng::below(std::uint64_t bound, std::uint64_t id,
                                std::uint32_t stream, std::uint32_t index) const {
  // Multiply-shift on 64 bits; bias is at most bound / 2^64.
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(bits64(id, stream, index)) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t domain,
                          std::uint32_t index) {
  const PhiloxCounter b =
      philox4x32({index, domain, 0x5eedu, 0xc0de5u},
                 {static_cast<std::uint32_t>(seed),
                  static_cast<std::uint32_t>(seed >> 32)});
  return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
}

}  // namespace compass
