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
#ifndef MCD_NETWORK_HPP_
#define MCD_NETWORK_HPP_

// Recurrent autoencoder and classifier built from fixed-point LSTM layers,
// plus S-sample Monte Carlo Dropout prediction.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mcd/arch.hpp"
#include "mcd/error.hpp"
#include "mcd/fxp.hpp"
#include "mcd/lstm.hpp"
#include "mcd/mcrng.hpp"
#include "mcd/metrics.hpp"

namespace mcd {

struct DenseParams {
  FxMatrix w;  // O x H_L
  FxArray b;   // O

  friend bool operator==(const DenseParams&, const DenseParams&) = default;
};

struct NetworkParams {
  Task task = Task::kClassifier;
  Arch arch;
  int seq_len = 140;     // T
  int input_size = 1;    // I
  int output_size = 4;   // O
  Datapath datapath;
  double dropout_p = BernoulliSampler::kDropProbability;
  double aleatoric_var = 1.0;  // homoscedastic observation variance
  bool scale_folded = true;    // 1/(1-p) already folded into weights
  std::vector<LstmLayerParams> layers;
  DenseParams dense;

  void validate() const {
    datapath.validate();
    detail::require(seq_len >= 1 && input_size >= 1 && output_size >= 1,
                    "network dimensions must be positive");
    const auto plan = layer_plan(task, arch, input_size);
    detail::require(layers.size() == plan.size(),
                    "network has " + std::to_string(layers.size()) +
                        " layers, architecture needs " +
                        std::to_string(plan.size()));
    for (std::size_t k = 0; k < plan.size(); ++k) {
      const auto& l = layers[k];
      l.validate();
      detail::require(static_cast<int>(l.input_size) == plan[k].input &&
                          static_cast<int>(l.hidden_size) == plan[k].hidden,
                      "layer " + std::to_string(k) + " shape breaks the chain");
      detail::require(l.is_bayesian == arch.is_bayesian(k),
                      "layer " + std::to_string(k) +
                          " Bayesian flag disagrees with architecture");
    }
    const auto hl = static_cast<std::size_t>(plan.back().hidden);
    const auto o = static_cast<std::size_t>(output_size);
    detail::require(dense.w.rows == o && dense.w.cols == hl &&
                        dense.w.raw.size() == o * hl && dense.b.size() == o,
                    "dense layer shape mismatch");
    detail::require(aleatoric_var >= 0.0 && std::isfinite(aleatoric_var),
                    "aleatoric variance must be finite and >= 0");
  }

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

// Identifies one parameter when building a network from a generator.
struct WeightSlot {
  enum Kind { kInputWeight, kHiddenWeight, kBias, kDenseWeight, kDenseBias };
  Kind kind;
  int layer;  // -1 for the dense layer
  int gate;   // -1 for the dense layer
  int row;
  int col;    // 0 for biases
};

using WeightSource = std::function<double(const WeightSlot&)>;

inline WeightSource zero_weights() {
  return [](const WeightSlot&) { return 0.0; };
}

// Uniform(-scale, scale) weights and biases from a fixed seed.
inline WeightSource random_weights(std::uint64_t seed, double scale) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng, scale](const WeightSlot&) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return u(*rng);
  };
}

struct NetworkShape {
  int seq_len = 140;
  int input_size = 1;
  int output_size = 4;
};

// Lays out the layers of `arch` for `task` and fills every parameter from
// `source` (quantized to the datapath weight format). Parameters are drawn
// layer by layer, gate by gate (i, f, g, o): W_x row-major, then W_h, then
// the bias; the dense weights and bias come last.
inline NetworkParams build_network(Task task, const Arch& arch,
                                   const NetworkShape& shape,
                                   const WeightSource& source,
                                   const Datapath& dp = {}) {
  dp.validate();
  const auto plan = layer_plan(task, arch, shape.input_size);
  NetworkParams net;
  net.task = task;
  net.arch = arch;
  net.seq_len = shape.seq_len;
  net.input_size = shape.input_size;
  net.output_size = shape.output_size;
  net.datapath = dp;
  auto q = [&](const WeightSlot& s) {
    return static_cast<std::int16_t>(quantize(source(s), dp.weight).raw);
  };
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const auto in = static_cast<std::size_t>(plan[k].input);
    const auto h = static_cast<std::size_t>(plan[k].hidden);
    LstmLayerParams l(in, h, arch.is_bayesian(k), dp.weight);
    const int li = static_cast<int>(k);
    for (int g = 0; g < kGates; ++g) {
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < in; ++c)
          l.wx[g].raw[r * in + c] = q({WeightSlot::kInputWeight, li, g,
                                       static_cast<int>(r), static_cast<int>(c)});
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < h; ++c)
          l.wh[g].raw[r * h + c] = q({WeightSlot::kHiddenWeight, li, g,
                                      static_cast<int>(r), static_cast<int>(c)});
      for (std::size_t r = 0; r < h; ++r)
        l.b[g].raw[r] = q({WeightSlot::kBias, li, g, static_cast<int>(r), 0});
    }
    net.layers.push_back(std::move(l));
  }
  const auto hl = static_cast<std::size_t>(plan.back().hidden);
  const auto o = static_cast<std::size_t>(shape.output_size);
  net.dense.w = FxMatrix(o, hl, dp.weight);
  net.dense.b = FxArray(o, dp.weight);
  for (std::size_t r = 0; r < o; ++r)
    for (std::size_t c = 0; c < hl; ++c)
      net.dense.w.raw[r * hl + c] = q({WeightSlot::kDenseWeight, -1, -1,
                                       static_cast<int>(r), static_cast<int>(c)});
  for (std::size_t r = 0; r < o; ++r)
    net.dense.b.raw[r] = q({WeightSlot::kDenseBias, -1, -1, static_cast<int>(r), 0});
  net.validate();
  return net;
}

// Output of one forward pass: T x O reconstruction (autoencoder) or a
// 1 x O probability row (classifier).
struct ForwardOutput {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  std::vector<double> logits;  // classifier only
};

struct Prediction {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mean;
  std::vector<double> epistemic_var;
  double aleatoric_var = 0.0;
  std::vector<double> total_var;
  std::vector<double> class_probs;  // classifier only
  double entropy = 0.0;             // classifier only, nats
  int samples_used = 0;
  std::vector<std::vector<double>> samples;  // S raw pass outputs
};

inline std::vector<double> softmax(std::span<const double> logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - mx);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

// Per-MC-sample stream seed. Each sample gets its own sampler so samples can
// be evaluated independently.
inline std::uint64_t sample_stream_seed(std::uint64_t seed, int sample) {
  std::uint64_t x = seed ^ (0xd1b54a32d192ed03ull * static_cast<std::uint64_t>(sample + 1));
  return detail::splitmix64(x);
}

// Immutable, shareable inference engine: parameters plus activation tables.
class Engine {
 public:
  explicit Engine(NetworkParams params)
      : params_(std::move(params)),
        tables_(ActivationTables::build(params_.datapath)) {
    params_.validate();
  }

  const NetworkParams& params() const { return params_; }
  const ActivationTables& tables() const { return tables_; }

  // Layer indices that apply dropout, in order.
  std::vector<std::size_t> bayesian_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < params_.layers.size(); ++k) {
      if (params_.layers[k].is_bayesian) out.push_back(k);
    }
    return out;
  }

  // Draws one mask set per Bayesian layer, in layer order, from `stream`.
  template <BitSource Source>
  std::vector<MaskSet> sample_masks(Source& stream, int sample_index) const {
    std::vector<MaskSet> out;
    for (std::size_t k : bayesian_layers()) {
      const auto& l = params_.layers[k];
      out.push_back(sample_mask_set(l.input_size, l.hidden_size, stream,
                                    sample_index));
    }
    return out;
  }

  // `x` is T x I, row-major. `mask_sets` holds exactly one set per
  // Bayesian layer, in layer order.
  ForwardOutput forward_once(std::span<const double> x,
                             std::span<const MaskSet> mask_sets,
                             const StepObserver& observer = {}) const {
    const auto& p = params_;
    const auto& dp = p.datapath;
    const auto T = static_cast<std::size_t>(p.seq_len);
    const auto I = static_cast<std::size_t>(p.input_size);
    detail::require(x.size() == T * I,
                    "input has " + std::to_string(x.size()) +
                        " values, expected T*I = " + std::to_string(T * I));
    const auto bayes = bayesian_layers();
    detail::require(mask_sets.size() == bayes.size(),
                    "got " + std::to_string(mask_sets.size()) +
                        " mask sets for " + std::to_string(bayes.size()) +
                        " Bayesian layers");

    std::vector<FxVector> seq(T, FxVector(I));
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < I; ++i) seq[t][i] = quantize(x[t * I + i], dp.act);

    std::size_t next_mask = 0;
    auto run_layer = [&](std::size_t k, const std::vector<FxVector>& in) {
      const MaskSet* m = nullptr;
      if (p.layers[k].is_bayesian) m = &mask_sets[next_mask++];
      return run_sequence(p.layers[k], tables_, dp, in, m, observer);
    };

    ForwardOutput out;
    const std::size_t nl = static_cast<std::size_t>(p.arch.layers);
    if (p.task == Task::kClassifier) {
      for (std::size_t k = 0; k < nl; ++k) seq = run_layer(k, seq).h;
      out.rows = 1;
      out.cols = static_cast<std::size_t>(p.output_size);
      out.logits = dense(seq.back());
      out.values = softmax(out.logits);
      return out;
    }

    for (std::size_t k = 0; k < nl; ++k) seq = run_layer(k, seq).h;
    // Bottleneck h_T, held for T decoder steps.
    std::vector<FxVector> repeated(T, seq.back());
    seq = std::move(repeated);
    for (std::size_t k = nl; k < 2 * nl; ++k) seq = run_layer(k, seq).h;
    out.rows = T;
    out.cols = static_cast<std::size_t>(p.output_size);
    out.values.reserve(T * out.cols);
    for (std::size_t t = 0; t < T; ++t) {
      const auto y = dense(seq[t]);
      out.values.insert(out.values.end(), y.begin(), y.end());
    }
    return out;
  }

  // Monte Carlo Dropout prediction over S passes. Every pass draws fresh
  // masks from its own sampler (see sample_stream_seed); results are
  // reduced in sample order.
  Prediction mc_predict(std::span<const double> x, int samples,
                        std::uint64_t seed,
                        LfsrMode mode = LfsrMode::kWide16) const {
    detail::require(samples >= 1, "mc_predict needs S >= 1");
    Prediction pred;
    pred.samples_used = samples;
    pred.samples.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
      auto sampler = BernoulliSampler::from_seed(sample_stream_seed(seed, s), mode);
      const auto masks = sample_masks(sampler, s);
      auto out = forward_once(x, masks);
      pred.rows = out.rows;
      pred.cols = out.cols;
      pred.samples.push_back(std::move(out.values));
    }
    const auto u = uncertainty_decompose(pred.samples, params_.aleatoric_var);
    pred.mean = u.mean;
    pred.epistemic_var = u.epistemic;
    pred.aleatoric_var = u.aleatoric;
    pred.total_var = u.total;
    if (params_.task == Task::kClassifier) {
      pred.class_probs = u.mean;
      pred.entropy = predictive_entropy(pred.class_probs);
    }
    return pred;
  }

 private:
  // W h + b in the accumulator, emitted in the activation format.
  std::vector<double> dense(const FxVector& h) const {
    const auto& dp = params_.datapath;
    const auto& d = params_.dense;
    FxVector acc(d.w.rows);
    for (std::size_t r = 0; r < d.w.rows; ++r) acc[r] = requantize(d.b.at(r), dp.acc);
    mvm_accumulate(d.w, h, acc);
    std::vector<double> y(acc.size());
    for (std::size_t r = 0; r < acc.size(); ++r) y[r] = requantize(acc[r], dp.act).value();
    return y;
  }

  NetworkParams params_;
  ActivationTables tables_;
};

}  // namespace mcd

#endif  // MCD_NETWORK_HPP_
