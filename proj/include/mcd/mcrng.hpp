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
#ifndef MCD_MCRNG_HPP_
#define MCD_MCRNG_HPP_

// Hardware-style dropout mask generation: Fibonacci LFSRs, a three-input
// NAND that shapes three fair bit streams into P(0) = 1/8, and the
// once-per-sequence mask set consumed by one Bayesian LSTM layer.

#include <array>
#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "mcd/error.hpp"

namespace mcd {

// One step of a Fibonacci LFSR. Taps are 1-based polynomial exponents
// (x^16 + x^14 + x^13 + x^11 + 1 is {16, 14, 13, 11}); tap k reads register
// bit (width - k). The output bit is the register LSB; the feedback bit
// enters at the MSB.
struct LfsrStep {
  bool bit;
  std::uint32_t state;
};

constexpr LfsrStep lfsr_next(std::uint32_t state, int width,
                             std::uint32_t tap_mask) {
  const bool out = (state & 1u) != 0;
  std::uint32_t fb = 0;
  for (std::uint32_t m = tap_mask; m != 0; m &= m - 1) {
    const int bit = __builtin_ctz(m);
    fb ^= (state >> bit) & 1u;
  }
  const std::uint32_t next = (state >> 1) | (fb << (width - 1));
  return {out, next};
}

class Lfsr {
 public:
  Lfsr(int width, std::initializer_list<int> taps, std::uint32_t seed)
      : Lfsr(width, std::vector<int>(taps), seed) {}

  Lfsr(int width, const std::vector<int>& taps, std::uint32_t seed)
      : width_(width) {
    detail::require(width >= 2 && width <= 32, "LFSR width out of range: " +
                                                   std::to_string(width));
    for (int t : taps) {
      detail::require(t >= 1 && t <= width,
                      "LFSR tap out of range: " + std::to_string(t));
      tap_mask_ |= std::uint32_t{1} << (width - t);
    }
    detail::require(tap_mask_ != 0, "LFSR needs at least one tap");
    state_ = seed & mask();
    detail::require(state_ != 0, "LFSR seed must be nonzero in the register");
  }

  bool next() {
    const LfsrStep s = lfsr_next(state_, width_, tap_mask_);
    state_ = s.state;
    return s.bit;
  }

  int width() const { return width_; }
  std::uint32_t state() const { return state_; }
  std::uint32_t tap_mask() const { return tap_mask_; }
  std::uint32_t mask() const {
    return width_ == 32 ? 0xffffffffu : ((std::uint32_t{1} << width_) - 1);
  }

 private:
  int width_;
  std::uint32_t tap_mask_ = 0;
  std::uint32_t state_ = 1;
};

inline constexpr bool nand3(bool a, bool b, bool c) { return !(a && b && c); }

// kWide16: 16-bit registers, taps {16,14,13,11}.
// kNarrow4: 4-bit registers, taps {4,3}; every register shares period 15.
enum class LfsrMode { kWide16, kNarrow4 };

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Three LFSRs feeding a NAND gate: emits 0 with probability 1/8.
class BernoulliSampler {
 public:
  static constexpr double kDropProbability = 0.125;

  explicit BernoulliSampler(std::array<Lfsr, 3> lfsrs)
      : lfsrs_(std::move(lfsrs)) {}

  // Seeds are expanded from `seed` with splitmix64 and forced to be nonzero
  // and pairwise distinct within the register width.
  static BernoulliSampler from_seed(std::uint64_t seed,
                                    LfsrMode mode = LfsrMode::kWide16) {
    const int width = mode == LfsrMode::kWide16 ? 16 : 4;
    const std::vector<int> taps = mode == LfsrMode::kWide16
                                      ? std::vector<int>{16, 14, 13, 11}
                                      : std::vector<int>{4, 3};
    const std::uint32_t mask = (std::uint32_t{1} << width) - 1;
    std::array<std::uint32_t, 3> seeds{};
    std::uint64_t x = seed;
    for (int i = 0; i < 3; ++i) {
      for (;;) {
        const auto s = static_cast<std::uint32_t>(detail::splitmix64(x)) & mask;
        bool dup = s == 0;
        for (int j = 0; j < i; ++j) dup = dup || seeds[j] == s;
        if (!dup) {
          seeds[i] = s;
          break;
        }
      }
    }
    return BernoulliSampler({Lfsr(width, taps, seeds[0]),
                             Lfsr(width, taps, seeds[1]),
                             Lfsr(width, taps, seeds[2])});
  }

  bool next() {
    const bool a = lfsrs_[0].next();
    const bool b = lfsrs_[1].next();
    const bool c = lfsrs_[2].next();
    ++drawn_;
    return nand3(a, b, c);
  }

  std::uint64_t bits_drawn() const { return drawn_; }
  const std::array<Lfsr, 3>& lfsrs() const { return lfsrs_; }

 private:
  std::array<Lfsr, 3> lfsrs_;
  std::uint64_t drawn_ = 0;
};

// Anything that hands out one keep/drop bit per call.
template <typename S>
concept BitSource = requires(S s) {
  { s.next() } -> std::convertible_to<bool>;
};

// Emits a constant bit forever; useful to disable dropout deterministically.
struct ConstantBits {
  bool bit = true;
  std::uint64_t drawn = 0;
  bool next() {
    ++drawn;
    return bit;
  }
};

enum Gate : int { kGateInput = 0, kGateForget = 1, kGateCell = 2, kGateOutput = 3 };
inline constexpr int kGates = 4;

// Dropout masks of one Bayesian LSTM layer for one Monte Carlo sample. A 1
// keeps the feature, a 0 drops it. Each gate has its own replica of the
// input mask and the hidden-state mask.
struct MaskSet {
  std::array<std::vector<std::uint8_t>, kGates> x;
  std::array<std::vector<std::uint8_t>, kGates> h;
  int sample_index = 0;

  std::size_t input_size() const { return x[0].size(); }
  std::size_t hidden_size() const { return h[0].size(); }

  bool operator==(const MaskSet& o) const { return x == o.x && h == o.h; }
};

// Draws 4*I + 4*H bits: x masks for gates i, f, g, o, then h masks in the
// same gate order, each vector in ascending feature index.
template <BitSource Source>
MaskSet sample_mask_set(std::size_t input_size, std::size_t hidden_size,
                        Source& stream, int sample_index = 0) {
  detail::require(input_size >= 1 && hidden_size >= 1,
                  "mask dimensions must be positive");
  MaskSet m;
  m.sample_index = sample_index;
  for (int g = 0; g < kGates; ++g) {
    m.x[g].resize(input_size);
    for (auto& bit : m.x[g]) bit = stream.next() ? 1 : 0;
  }
  for (int g = 0; g < kGates; ++g) {
    m.h[g].resize(hidden_size);
    for (auto& bit : m.h[g]) bit = stream.next() ? 1 : 0;
  }
  return m;
}

inline MaskSet all_ones_mask_set(std::size_t input_size,
                                 std::size_t hidden_size) {
  ConstantBits ones;
  return sample_mask_set(input_size, hidden_size, ones);
}

}  // namespace mcd

#endif  // MCD_MCRNG_HPP_
