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

#include "gtest/gtest.h"

namespace compass {
namespace {

// Known-answer vectors published with Random123 (kat_vectors, philox4x32_10).
TEST(PhiloxTest, KnownAnswerVectors) {
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
            (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                       {0xffffffffu, 0xffffffffu}),
            (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                       {0xa4093822u, 0x299f31d0u}),
            (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRngTest, PureFunctionOfCounter) {
  CounterRng a(42), b(42), c(43);
  EXPECT_EQ(a.uniform(7, 1, 3), b.uniform(7, 1, 3));
  EXPECT_NE(a.uniform(7, 1, 3), c.uniform(7, 1, 3));
  EXPECT_NE(a.uniform(7, 1, 3), a.uniform(8, 1, 3));
  EXPECT_NE(a.uniform(7, 1, 3), a.uniform(7, 2, 3));
}

TEST(CounterRngTest, UniformRangeAndMoments) {
  CounterRng rng(1234);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(0, 0, i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = rng.normal(1, 0, i);
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sum_sq / n, 1.0, 0.05);
}

TEST(CounterRngTest, BelowStaysInRange) {
  CounterRng rng(9);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7, 3, 0, i), 7u);
}

TEST(DeriveSeedTest, DistinctDomains) {
  EXPECT_NE(derive_seed(42, 1), derive_seed(42, 2));
  EXPECT_NE(derive_seed(42, 1, 0), derive_seed(42, 1, 1));
  EXPECT_EQ(derive_seed(42, 1, 1), derive_seed(42, 1, 1));
}

}  // namespace
}  // namespace compass
