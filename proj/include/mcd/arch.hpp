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
#ifndef MCD_ARCH_HPP_
#define MCD_ARCH_HPP_

// Network topology shared by the inference engine and the hardware model:
// task kind, (H, NL, B) architecture triple and the per-layer dimension plan.

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "mcd/error.hpp"

namespace mcd {

enum class Task { kAutoencoder, kClassifier };

inline std::string to_string(Task t) {
  return t == Task::kAutoencoder ? "anomaly" : "classification";
}

// Accepts "anomaly"/"autoencoder" and "classification"/"classifier".
inline Task parse_task(const std::string& s) {
  std::string v = s;
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "anomaly" || v == "autoencoder") return Task::kAutoencoder;
  if (v == "classification" || v == "classifier") return Task::kClassifier;
  detail::fail("unknown task '" + s + "'");
}

// (H, NL, B): hidden size, LSTM count per part, Bayesian flag per layer.
struct Arch {
  int hidden = 8;
  int layers = 1;
  std::string bayes = "N";

  int bayesian_count() const {
    return static_cast<int>(std::count(bayes.begin(), bayes.end(), 'Y'));
  }
  bool is_bayesian(std::size_t layer) const { return bayes.at(layer) == 'Y'; }

  std::string str() const {
    return std::to_string(hidden) + "," + std::to_string(layers) + "," + bayes;
  }

  friend bool operator==(const Arch&, const Arch&) = default;
};

inline int total_layers(Task task, int nl) {
  return task == Task::kAutoencoder ? 2 * nl : nl;
}

inline void validate(const Arch& a, Task task) {
  detail::require(a.hidden >= 1, "hidden size must be >= 1");
  detail::require(a.layers >= 1, "layer count must be >= 1");
  detail::require(std::all_of(a.bayes.begin(), a.bayes.end(),
                              [](char c) { return c == 'Y' || c == 'N'; }),
                  "Bayesian flags must be a string of Y/N, got '" + a.bayes + "'");
  const int expected = total_layers(task, a.layers);
  detail::require(static_cast<int>(a.bayes.size()) == expected,
                  "Bayesian flag string '" + a.bayes + "' has length " +
                      std::to_string(a.bayes.size()) + ", expected " +
                      std::to_string(expected) + " for " + to_string(task));
  if (task == Task::kAutoencoder) {
    detail::require(a.hidden % 2 == 0,
                    "autoencoder hidden size must be even, got " +
                        std::to_string(a.hidden));
  }
}

// Parses "H,NL,B", e.g. "16,2,YNYN".
inline Arch parse_arch(const std::string& s) {
  std::stringstream ss(s);
  std::string h, nl, b;
  if (!std::getline(ss, h, ',') || !std::getline(ss, nl, ',') ||
      !std::getline(ss, b)) {
    detail::fail("architecture must be H,NL,B, got '" + s + "'");
  }
  Arch a;
  try {
    std::size_t used = 0;
    a.hidden = std::stoi(h, &used);
    detail::require(used == h.size(), "bad hidden size '" + h + "'");
    a.layers = std::stoi(nl, &used);
    detail::require(used == nl.size(), "bad layer count '" + nl + "'");
  } catch (const std::logic_error&) {
    detail::fail("architecture must be H,NL,B, got '" + s + "'");
  }
  detail::require(!b.empty() && std::all_of(b.begin(), b.end(),
                                            [](char c) { return c == 'Y' || c == 'N'; }),
                  "Bayesian flags must be a string of Y/N, got '" + b + "'");
  a.bayes = b;
  return a;
}

struct LayerDims {
  int input = 1;
  int hidden = 1;

  friend bool operator==(const LayerDims&, const LayerDims&) = default;
};

// Per-layer (input, hidden) sizes.
//
// Classifier: (I->H), (H->H), ...
// Autoencoder: the encoder runs (I->H), (H->H), ..., ending in H/2; the
// decoder mirrors the encoder's output sizes, so it starts at H/2 and always
// ends in H. For NL=2 and H=16: (1,16) (16,8) | (8,8) (8,16).
inline std::vector<LayerDims> layer_plan(Task task, const Arch& a,
                                         int input_features) {
  detail::require(input_features >= 1, "input feature count must be >= 1");
  validate(a, task);
  const int nl = a.layers;
  const int h = a.hidden;
  std::vector<LayerDims> plan;
  if (task == Task::kClassifier) {
    int in = input_features;
    for (int k = 0; k < nl; ++k) {
      plan.push_back({in, h});
      in = h;
    }
    return plan;
  }
  std::vector<int> enc_out(nl, h);
  enc_out.back() = h / 2;
  int in = input_features;
  for (int k = 0; k < nl; ++k) {
    plan.push_back({in, enc_out[k]});
    in = enc_out[k];
  }
  for (int k = 0; k < nl; ++k) {
    const int out = (k == nl - 1) ? h : enc_out[nl - 1 - k];
    plan.push_back({in, out});
    in = out;
  }
  return plan;
}

// Width of the hidden state feeding the dense layer.
inline int final_hidden(Task task, const Arch& a, int input_features) {
  return layer_plan(task, a, input_features).back().hidden;
}

}  // namespace mcd

#endif  // MCD_ARCH_HPP_
