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
#ifndef MCD_FXP_HPP_
#define MCD_FXP_HPP_

// Signed fixed-point arithmetic matching the accelerator datapath: 16-bit
// weights and activations, 32-bit accumulators and cell state, round to
// nearest even, saturate on overflow, and BRAM-style lookup-table
// activations.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mcd/error.hpp"

namespace mcd {

// Signed two's complement Q-format. `frac_bits` fractional bits out of
// `total_bits`, sign bit included in the integer part.
struct QFormat {
  int total_bits = 16;
  int frac_bits = 10;

  constexpr bool valid() const {
    return (total_bits == 16 || total_bits == 32) && frac_bits > 0 &&
           frac_bits < total_bits;
  }
  constexpr std::int64_t min_raw() const {
    return -(std::int64_t{1} << (total_bits - 1));
  }
  constexpr std::int64_t max_raw() const {
    return (std::int64_t{1} << (total_bits - 1)) - 1;
  }
  double lsb() const { return std::ldexp(1.0, -frac_bits); }
  double min_value() const { return static_cast<double>(min_raw()) * lsb(); }
  double max_value() const { return static_cast<double>(max_raw()) * lsb(); }

  std::string name() const {
    return "Q" + std::to_string(total_bits - frac_bits) + "." +
           std::to_string(frac_bits);
  }

  friend constexpr bool operator==(const QFormat&, const QFormat&) = default;
};

// Default datapath formats.
inline constexpr QFormat kQ6_10{16, 10};
inline constexpr QFormat kQ12_20{32, 20};

inline void validate(const QFormat& f) {
  detail::require(f.valid(), "invalid fixed-point format total_bits=" +
                                 std::to_string(f.total_bits) + " frac_bits=" +
                                 std::to_string(f.frac_bits));
}

// A fixed-point value. Invariant: min_raw <= raw <= max_raw of `format`.
struct Fx {
  std::int64_t raw = 0;
  QFormat format = kQ6_10;

  double value() const { return static_cast<double>(raw) * format.lsb(); }

  friend constexpr bool operator==(const Fx&, const Fx&) = default;
};

using FxVector = std::vector<Fx>;

// Saturation diagnostics. Each thread counts its own saturation events so
// the arithmetic stays free of shared mutable state.
namespace detail {
inline thread_local std::uint64_t overflow_events = 0;

inline std::int64_t saturate(std::int64_t raw, const QFormat& f) {
  if (raw > f.max_raw()) {
    ++overflow_events;
    return f.max_raw();
  }
  if (raw < f.min_raw()) {
    ++overflow_events;
    return f.min_raw();
  }
  return raw;
}

// Round-half-to-even of a finite double to an integer-valued double.
inline double round_half_even(double x) {
  const double fl = std::floor(x);
  const double diff = x - fl;
  if (diff > 0.5) return fl + 1.0;
  if (diff < 0.5) return fl;
  return std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;
}

// Arithmetic right shift by `shift` bits with round-half-to-even.
inline std::int64_t shift_right_rne(std::int64_t raw, int shift) {
  if (shift <= 0) return raw;
  if (shift >= 63) return 0;
  const std::int64_t q = raw >> shift;  // floor
  const std::int64_t rem = raw - q * (std::int64_t{1} << shift);
  const std::int64_t half = std::int64_t{1} << (shift - 1);
  if (rem > half || (rem == half && (q & 1) != 0)) return q + 1;
  return q;
}
}  // namespace detail

inline std::uint64_t overflow_events() { return detail::overflow_events; }
inline void reset_overflow_events() { detail::overflow_events = 0; }

// Nearest-even rounding of x * 2^frac_bits, then saturation. NaN maps to 0.
inline Fx quantize(double x, const QFormat& f) {
  validate(f);
  if (std::isnan(x)) return Fx{0, f};
  const double scaled = std::ldexp(x, f.frac_bits);
  const double hi = static_cast<double>(f.max_raw());
  const double lo = static_cast<double>(f.min_raw());
  if (scaled > hi + 1.0) {
    ++detail::overflow_events;
    return Fx{f.max_raw(), f};
  }
  if (scaled < lo - 1.0) {
    ++detail::overflow_events;
    return Fx{f.min_raw(), f};
  }
  const auto raw = static_cast<std::int64_t>(detail::round_half_even(scaled));
  return Fx{detail::saturate(raw, f), f};
}

// Re-express x in format f (round half to even, saturate).
inline Fx requantize(const Fx& x, const QFormat& f) {
  validate(f);
  const int shift = x.format.frac_bits - f.frac_bits;
  std::int64_t raw;
  if (shift >= 0) {
    raw = detail::shift_right_rne(x.raw, shift);
  } else {
    // Left shift; anything that would leave 62 bits is saturated directly.
    const int up = -shift;
    const std::int64_t limit = std::int64_t{1} << (62 - up);
    if (x.raw >= limit) {
      raw = f.max_raw() + 1;
    } else if (x.raw <= -limit) {
      raw = f.min_raw() - 1;
    } else {
      raw = x.raw * (std::int64_t{1} << up);
    }
  }
  return Fx{detail::saturate(raw, f), f};
}

// acc + a*b. The product is exact (a, b are 16-bit); the accumulate
// saturates in the accumulator format.
inline Fx fx_mac(const Fx& acc, const Fx& a, const Fx& b) {
  if (a.format.total_bits != 16 || b.format.total_bits != 16 ||
      acc.format.total_bits != 32 ||
      acc.format.frac_bits != a.format.frac_bits + b.format.frac_bits) {
    detail::fail("fx_mac format mismatch: acc " + acc.format.name() + ", a " +
                 a.format.name() + ", b " + b.format.name());
  }
  const std::int64_t product = a.raw * b.raw;
  return Fx{detail::saturate(acc.raw + product, acc.format), acc.format};
}

// Saturating addition of two values in the same format.
inline Fx fx_add(const Fx& a, const Fx& b) {
  detail::require(a.format == b.format, "fx_add format mismatch: " +
                                            a.format.name() + " vs " +
                                            b.format.name());
  return Fx{detail::saturate(a.raw + b.raw, a.format), a.format};
}

// Full product a*b expressed (rounded, saturated) in format `out`.
inline Fx fx_mul(const Fx& a, const Fx& b, const QFormat& out) {
  // 16x32 products fit comfortably in 64 bits.
  const std::int64_t product = a.raw * b.raw;
  const int shift = a.format.frac_bits + b.format.frac_bits - out.frac_bits;
  std::int64_t raw;
  if (shift >= 0) {
    raw = detail::shift_right_rne(product, shift);
  } else {
    raw = product * (std::int64_t{1} << -shift);
  }
  return Fx{detail::saturate(raw, out), out};
}

enum class Activation { kSigmoid, kTanh };

inline const char* to_string(Activation kind) {
  return kind == Activation::kSigmoid ? "sigmoid" : "tanh";
}

inline double activation_reference(Activation kind, double x) {
  return kind == Activation::kSigmoid ? 1.0 / (1.0 + std::exp(-x))
                                      : std::tanh(x);
}

// Precomputed activation table over [lo, hi). Entry k holds the quantized
// activation of the k-th bin midpoint; lookups use the nearest bin (no
// interpolation) and inputs outside the range clamp to the asymptotes.
struct ActLut {
  Activation kind = Activation::kSigmoid;
  double lo = -8.0;
  double hi = 8.0;
  std::vector<Fx> entries;
  QFormat in_format = kQ6_10;
  QFormat out_format = kQ6_10;
  Fx below{};  // value for x < lo
  Fx above{};  // value for x >= hi

  double bin_width() const {
    return (hi - lo) / static_cast<double>(entries.size());
  }
};

inline ActLut act_build(Activation kind, double lo, double hi,
                        std::size_t n_entries, const QFormat& in_format,
                        const QFormat& out_format) {
  validate(in_format);
  validate(out_format);
  detail::require(n_entries >= 2 && (n_entries & (n_entries - 1)) == 0,
                  "activation table size must be a power of two, got " +
                      std::to_string(n_entries));
  detail::require(std::isfinite(lo) && std::isfinite(hi) && lo < hi &&
                      lo == -hi,
                  "activation table range must be finite and symmetric");
  ActLut lut;
  lut.kind = kind;
  lut.lo = lo;
  lut.hi = hi;
  lut.in_format = in_format;
  lut.out_format = out_format;
  lut.entries.reserve(n_entries);
  const double width = (hi - lo) / static_cast<double>(n_entries);
  for (std::size_t k = 0; k < n_entries; ++k) {
    const double mid = lo + (static_cast<double>(k) + 0.5) * width;
    lut.entries.push_back(quantize(activation_reference(kind, mid), out_format));
  }
  lut.below = quantize(kind == Activation::kSigmoid ? 0.0 : -1.0, out_format);
  lut.above = quantize(1.0, out_format);
  return lut;
}

inline ActLut act_build(Activation kind, const QFormat& in_format = kQ6_10,
                        const QFormat& out_format = kQ6_10) {
  return act_build(kind, -8.0, 8.0, 2048, in_format, out_format);
}

inline Fx act_eval(const ActLut& lut, const Fx& x) {
  const double v = x.value();
  if (v < lut.lo) return lut.below;
  if (v >= lut.hi) return lut.above;
  auto k = static_cast<std::size_t>(std::floor((v - lut.lo) / lut.bin_width()));
  if (k >= lut.entries.size()) k = lut.entries.size() - 1;
  return lut.entries[k];
}

}  // namespace mcd

#endif  // MCD_FXP_HPP_
