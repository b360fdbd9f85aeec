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
#ifndef MCD_LSTM_HPP_
#define MCD_LSTM_HPP_

// Bit-accurate LSTM layer: masked matrix-vector units per gate, LUT
// activations, 32-bit cell state.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mcd/error.hpp"
#include "mcd/fxp.hpp"
#include "mcd/mcrng.hpp"

namespace mcd {

// Number formats used along the datapath.
struct Datapath {
  QFormat weight = kQ6_10;
  QFormat act = kQ6_10;
  QFormat acc = kQ12_20;  // MVM accumulator and cell state

  void validate() const {
    mcd::validate(weight);
    mcd::validate(act);
    mcd::validate(acc);
    detail::require(weight.total_bits == 16 && act.total_bits == 16 &&
                        acc.total_bits == 32,
                    "datapath expects 16-bit weights/activations and a 32-bit "
                    "accumulator");
    detail::require(acc.frac_bits == weight.frac_bits + act.frac_bits,
                    "accumulator fraction must equal weight + activation "
                    "fraction bits");
  }

  friend bool operator==(const Datapath&, const Datapath&) = default;
};

// Row-major matrix of raw 16-bit fixed-point values sharing one format.
struct FxMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  QFormat format = kQ6_10;
  std::vector<std::int16_t> raw;

  FxMatrix() = default;
  FxMatrix(std::size_t r, std::size_t c, QFormat f)
      : rows(r), cols(c), format(f), raw(r * c, 0) {}

  Fx at(std::size_t r, std::size_t c) const {
    return Fx{raw[r * cols + c], format};
  }
  void set(std::size_t r, std::size_t c, const Fx& v) {
    raw[r * cols + c] = static_cast<std::int16_t>(requantize(v, format).raw);
  }

  friend bool operator==(const FxMatrix&, const FxMatrix&) = default;
};

// Raw 16-bit vector, used for biases.
struct FxArray {
  QFormat format = kQ6_10;
  std::vector<std::int16_t> raw;

  FxArray() = default;
  FxArray(std::size_t n, QFormat f) : format(f), raw(n, 0) {}

  std::size_t size() const { return raw.size(); }
  Fx at(std::size_t i) const { return Fx{raw[i], format}; }

  friend bool operator==(const FxArray&, const FxArray&) = default;
};

// acc[r] += sum_c W[r][c] * x[c], one fx_mac per product in row-major,
// ascending-column order.
inline void mvm_accumulate(const FxMatrix& w, std::span<const Fx> x,
                           std::span<Fx> acc) {
  detail::require(x.size() == w.cols && acc.size() == w.rows,
                  "mvm dimension mismatch: W is " + std::to_string(w.rows) +
                      "x" + std::to_string(w.cols) + ", x has " +
                      std::to_string(x.size()) + ", acc has " +
                      std::to_string(acc.size()));
  for (std::size_t r = 0; r < w.rows; ++r) {
    Fx a = acc[r];
    for (std::size_t c = 0; c < w.cols; ++c) a = fx_mac(a, w.at(r, c), x[c]);
    acc[r] = a;
  }
}

inline FxVector mvm(const FxMatrix& w, std::span<const Fx> x,
                    const QFormat& acc_format) {
  FxVector acc(w.rows, Fx{0, acc_format});
  mvm_accumulate(w, x, acc);
  return acc;
}

struct ActivationTables {
  ActLut sigmoid;
  ActLut tanh;

  static ActivationTables build(const Datapath& dp) {
    return {act_build(Activation::kSigmoid, dp.act, dp.act),
            act_build(Activation::kTanh, dp.act, dp.act)};
  }
};

struct LstmLayerParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  bool is_bayesian = false;
  std::array<FxMatrix, kGates> wx;  // H x I per gate (i, f, g, o)
  std::array<FxMatrix, kGates> wh;  // H x H per gate
  std::array<FxArray, kGates> b;    // H per gate

  LstmLayerParams() = default;
  LstmLayerParams(std::size_t in, std::size_t hidden, bool bayesian,
                  const QFormat& weight_format = kQ6_10)
      : input_size(in), hidden_size(hidden), is_bayesian(bayesian) {
    for (int g = 0; g < kGates; ++g) {
      wx[g] = FxMatrix(hidden, in, weight_format);
      wh[g] = FxMatrix(hidden, hidden, weight_format);
      b[g] = FxArray(hidden, weight_format);
    }
  }

  void validate() const {
    detail::require(input_size >= 1 && hidden_size >= 1,
                    "LSTM layer dimensions must be positive");
    for (int g = 0; g < kGates; ++g) {
      detail::require(wx[g].rows == hidden_size && wx[g].cols == input_size &&
                          wx[g].raw.size() == hidden_size * input_size,
                      "input weight matrix shape mismatch");
      detail::require(wh[g].rows == hidden_size && wh[g].cols == hidden_size &&
                          wh[g].raw.size() == hidden_size * hidden_size,
                      "hidden weight matrix shape mismatch");
      detail::require(b[g].size() == hidden_size, "bias length mismatch");
    }
  }

  friend bool operator==(const LstmLayerParams&,
                         const LstmLayerParams&) = default;
};

struct LstmState {
  FxVector h;  // activation format
  FxVector c;  // accumulator format
};

inline LstmState zero_state(std::size_t hidden, const Datapath& dp) {
  return {FxVector(hidden, Fx{0, dp.act}), FxVector(hidden, Fx{0, dp.acc})};
}

namespace detail {
inline FxVector apply_mask(std::span<const Fx> v,
                           const std::vector<std::uint8_t>& mask) {
  FxVector out(v.begin(), v.end());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (mask[k] == 0) out[k].raw = 0;
  }
  return out;
}
}  // namespace detail

// One time step. Gate pre-activations start from the bias promoted to the
// accumulator format, then accumulate W_x * (x masked for that gate) and
// W_h * (h masked for that gate). A null `masks` means no dropout; a
// Bayesian layer requires masks.
inline LstmState lstm_step(const LstmLayerParams& p, const ActivationTables& act,
                           const Datapath& dp, std::span<const Fx> x,
                           const LstmState& prev, const MaskSet* masks) {
  detail::require(x.size() == p.input_size && prev.h.size() == p.hidden_size &&
                      prev.c.size() == p.hidden_size,
                  "lstm_step shape mismatch");
  detail::require(!p.is_bayesian || masks != nullptr,
                  "Bayesian layer needs a mask set");
  if (masks != nullptr) {
    detail::require(masks->input_size() == p.input_size &&
                        masks->hidden_size() == p.hidden_size,
                    "mask set shape does not match layer");
  }
  for (const Fx& v : x) {
    detail::require(v.format == dp.act, "input is not in activation format");
  }
  for (std::size_t k = 0; k < p.hidden_size; ++k) {
    detail::require(prev.c[k].format == dp.acc,
                    "cell state must be in accumulator format");
  }

  const std::size_t hsz = p.hidden_size;
  std::array<FxVector, kGates> gate;
  for (int g = 0; g < kGates; ++g) {
    FxVector acc(hsz);
    for (std::size_t k = 0; k < hsz; ++k) acc[k] = requantize(p.b[g].at(k), dp.acc);
    if (masks != nullptr) {
      mvm_accumulate(p.wx[g], detail::apply_mask(x, masks->x[g]), acc);
      mvm_accumulate(p.wh[g], detail::apply_mask(prev.h, masks->h[g]), acc);
    } else {
      mvm_accumulate(p.wx[g], x, acc);
      mvm_accumulate(p.wh[g], prev.h, acc);
    }
    const ActLut& lut = g == kGateCell ? act.tanh : act.sigmoid;
    gate[g].resize(hsz);
    for (std::size_t k = 0; k < hsz; ++k) {
      gate[g][k] = act_eval(lut, requantize(acc[k], dp.act));
    }
  }

  LstmState next;
  next.h.resize(hsz);
  next.c.resize(hsz);
  for (std::size_t k = 0; k < hsz; ++k) {
    const Fx fc = fx_mul(gate[kGateForget][k], prev.c[k], dp.acc);
    const Fx ig = fx_mul(gate[kGateInput][k], gate[kGateCell][k], dp.acc);
    next.c[k] = fx_add(fc, ig);
    const Fx tc = act_eval(act.tanh, requantize(next.c[k], dp.act));
    next.h[k] = fx_mul(gate[kGateOutput][k], tc, dp.act);
  }
  return next;
}

struct SequenceResult {
  std::vector<FxVector> h;  // T x H
  LstmState final_state;
};

// Called before every step with the mask set about to be applied.
using StepObserver = std::function<void(std::size_t step, const MaskSet* masks)>;

// Runs T steps from zero state. The same mask set object is applied at every
// step of the sequence.
inline SequenceResult run_sequence(const LstmLayerParams& p,
                                   const ActivationTables& act,
                                   const Datapath& dp,
                                   const std::vector<FxVector>& x_seq,
                                   const MaskSet* masks,
                                   const StepObserver& observer = {}) {
  detail::require(!x_seq.empty(), "sequence must have at least one step");
  SequenceResult out;
  out.h.reserve(x_seq.size());
  LstmState state = zero_state(p.hidden_size, dp);
  for (std::size_t t = 0; t < x_seq.size(); ++t) {
    if (observer) observer(t, masks);
    state = lstm_step(p, act, dp, x_seq[t], state, masks);
    out.h.push_back(state.h);
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace mcd

#endif  // MCD_LSTM_HPP_
