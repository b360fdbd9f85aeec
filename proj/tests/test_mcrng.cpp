/* Copyright 2026 The mcd-lstm Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "mcd/mcrng.hpp"

namespace mcd {
namespace {

// Counts steps until the state returns to the seed.
std::uint64_t period(Lfsr l) {
  const auto start = l.state();
  std::uint64_t n = 0;
  do {
    l.next();
    ++n;
  } while (l.state() != start && n < (1u << 20));
  return n;
}

TEST(Lfsr, NarrowRegisterHasPeriod15FromEverySeed) {
  for (std::uint32_t seed = 1; seed < 16; ++seed) {
    EXPECT_EQ(period(Lfsr(4, {4, 3}, seed)), 15u) << "seed " << seed;
  }
}

TEST(Lfsr, WideRegisterIsMaximalLength) {
  EXPECT_EQ(period(Lfsr(16, {16, 14, 13, 11}, 0xACE1u)), 65535u);
}

TEST(Lfsr, EmitsBalancedBitsOverOnePeriod) {
  Lfsr l(16, {16, 14, 13, 11}, 1);
  std::uint64_t ones = 0;
  std::set<std::uint32_t> states;
  for (int k = 0; k < 65535; ++k) {
    states.insert(l.state());
    ones += l.next() ? 1 : 0;
  }
  EXPECT_EQ(ones, 32768u);
  EXPECT_EQ(states.size(), 65535u);
  EXPECT_EQ(states.count(0), 0u);

  Lfsr n(4, {4, 3}, 9);
  ones = 0;
  for (int k = 0; k < 15; ++k) ones += n.next() ? 1 : 0;
  EXPECT_EQ(ones, 8u);
}

TEST(Lfsr, StepMatchesHandComputedSequence) {
  // 4-bit, taps {4,3}: feedback = bit0 ^ bit1, enters at bit 3.
  Lfsr l(4, {4, 3}, 0b1000);
  const std::vector<std::uint32_t> want{0b0100, 0b0010, 0b1001, 0b1100, 0b0110};
  for (auto s : want) {
    l.next();
    EXPECT_EQ(l.state(), s);
  }
}

TEST(Lfsr, RejectsZeroSeedAndBadTaps) {
  EXPECT_THROW(Lfsr(16, {16, 14, 13, 11}, 0), ValidationError);
  EXPECT_THROW(Lfsr(4, {4, 3}, 0x10), ValidationError);  // masked to zero
  EXPECT_THROW(Lfsr(4, {5}, 1), ValidationError);
}

TEST(Nand3, TruthTable) {
  for (int v = 0; v < 8; ++v) {
    const bool a = v & 1, b = v & 2, c = v & 4;
    EXPECT_EQ(nand3(a, b, c), v != 7) << v;
  }
}

TEST(BernoulliSampler, ZeroRateNearOneEighth) {
  auto s = BernoulliSampler::from_seed(2024);
  std::uint64_t zeros = 0;
  const int n = 1000000;
  for (int k = 0; k < n; ++k) zeros += s.next() ? 0 : 1;
  const double rate = static_cast<double>(zeros) / n;
  EXPECT_GE(rate, 0.120);
  EXPECT_LE(rate, 0.130);
  EXPECT_EQ(s.bits_drawn(), static_cast<std::uint64_t>(n));
}

TEST(BernoulliSampler, SeedsAreNonzeroAndDistinct) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (auto mode : {LfsrMode::kWide16, LfsrMode::kNarrow4}) {
      const auto s = BernoulliSampler::from_seed(seed, mode);
      const auto& l = s.lfsrs();
      EXPECT_NE(l[0].state(), 0u);
      EXPECT_NE(l[0].state(), l[1].state());
      EXPECT_NE(l[1].state(), l[2].state());
      EXPECT_NE(l[0].state(), l[2].state());
    }
  }
}

TEST(BernoulliSampler, DeterministicPerSeed) {
  auto a = BernoulliSampler::from_seed(77);
  auto b = BernoulliSampler::from_seed(77);
  auto c = BernoulliSampler::from_seed(78);
  int differ = 0;
  for (int k = 0; k < 1000; ++k) {
    const bool x = a.next();
    EXPECT_EQ(x, b.next());
    differ += x != c.next();
  }
  EXPECT_GT(differ, 0);
}

TEST(MaskSet, ConsumesFourIPlusFourHBitsInOrder) {
  ConstantBits ones;
  const MaskSet m = sample_mask_set(1, 2, ones);
  EXPECT_EQ(ones.drawn, 12u);

  // A counting source reveals the order: x masks per gate, then h masks.
  struct Pattern {
    int k = 0;
    bool next() { return (k++ % 3) != 0; }
  } src;
  const MaskSet p = sample_mask_set(2, 3, src);
  std::vector<int> seen;
  for (int g = 0; g < kGates; ++g)
    for (auto b : p.x[g]) seen.push_back(b);
  for (int g = 0; g < kGates; ++g)
    for (auto b : p.h[g]) seen.push_back(b);
  ASSERT_EQ(seen.size(), 20u);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(seen[k], (k % 3) != 0 ? 1 : 0) << k;
}

TEST(MaskSet, ThirtySamplesDiffer) {
  auto s = BernoulliSampler::from_seed(5);
  std::set<std::vector<std::uint8_t>> distinct;
  for (int k = 0; k < 30; ++k) {
    const MaskSet m = sample_mask_set(1, 16, s, k);
    std::vector<std::uint8_t> flat;
    for (int g = 0; g < kGates; ++g) flat.insert(flat.end(), m.x[g].begin(), m.x[g].end());
    for (int g = 0; g < kGates; ++g) flat.insert(flat.end(), m.h[g].begin(), m.h[g].end());
    distinct.insert(flat);
  }
  EXPECT_EQ(distinct.size(), 30u);
}

TEST(MaskSet, AllOnes) {
  const MaskSet m = all_ones_mask_set(3, 4);
  for (int g = 0; g < kGates; ++g) {
    for (auto b : m.x[g]) EXPECT_EQ(b, 1);
    for (auto b : m.h[g]) EXPECT_EQ(b, 1);
  }
  EXPECT_THROW(all_ones_mask_set(0, 4), ValidationError);
}

}  // namespace
}  // namespace mcd
