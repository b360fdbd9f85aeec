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
#ifndef MCD_HWMODEL_HPP_
#define MCD_HWMODEL_HPP_

// Analytical DSP and latency models of the streaming accelerator.
//
// DSP per LSTM layer:  ceil(4*I*H / R_x) + ceil(4*H*H / R_h) + 4*H
// Dense layer:         ceil(H_L*O*T / R_d) (autoencoder), ceil(H_L*O / R_d)
// Budget:              design fits iff DSP_design <= floor(1.05 * DSP_total)
// Latency (per pass):  II*T + (IL - II)*NL, doubled for the autoencoder
//                      because the decoder waits for the whole encoding.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcd/arch.hpp"
#include "mcd/error.hpp"

namespace mcd {

struct LayerTiming {
  std::int64_t ii = 1;
  std::int64_t il = 1;
};

// Per-layer (II, IL) measurements that override the model.
using Calibration = std::map<int, LayerTiming>;

struct HwConfig {
  int reuse_x = 1;
  int reuse_h = 1;
  int reuse_d = 1;
  std::int64_t dsp_total = 900;
  double clock_hz = 100e6;
  int pipeline_depth = 32;  // default IL = II + pipeline_depth
  Calibration calibration;

  void validate() const {
    detail::require(reuse_x >= 1 && reuse_h >= 1 && reuse_d >= 1,
                    "reuse factors must be >= 1");
    detail::require(dsp_total > 0, "dsp_total must be > 0");
    detail::require(clock_hz > 0.0, "clock frequency must be > 0");
    detail::require(pipeline_depth >= 0, "pipeline depth must be >= 0");
  }
};

struct CostReport {
  std::vector<std::int64_t> dsp_per_layer;
  std::int64_t dsp_dense = 0;
  std::int64_t dsp_design = 0;
  std::int64_t dsp_budget = 0;  // floor(1.05 * dsp_total)
  bool feasible = false;
  std::int64_t ii = 0;
  std::vector<std::int64_t> il_per_layer;
  std::int64_t latency_cycles = 0;  // one forward pass
  double latency_seconds = 0.0;
};

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

inline std::int64_t dsp_layer(std::int64_t input, std::int64_t hidden,
                              std::int64_t reuse_x, std::int64_t reuse_h) {
  detail::require(input >= 1 && hidden >= 1 && reuse_x >= 1 && reuse_h >= 1,
                  "dsp_layer arguments must be >= 1");
  return ceil_div(4 * input * hidden, reuse_x) +
         ceil_div(4 * hidden * hidden, reuse_h) + 4 * hidden;
}

inline std::int64_t dsp_dense(Task task, std::int64_t final_hidden,
                              std::int64_t outputs, std::int64_t seq_len,
                              std::int64_t reuse_d) {
  const std::int64_t mults = task == Task::kAutoencoder
                                 ? final_hidden * outputs * seq_len
                                 : final_hidden * outputs;
  return ceil_div(mults, reuse_d);
}

// Extra 5% headroom on the device budget, rounded down.
inline std::int64_t dsp_budget(std::int64_t dsp_total) {
  return dsp_total * 105 / 100;
}

struct ModelDims {
  int input_size = 1;   // I
  int output_size = 1;  // O
  int seq_len = 140;    // T
};

// Fills the DSP part of a CostReport.
inline CostReport dsp_design(const Arch& arch, Task task, const ModelDims& dims,
                             const HwConfig& hw) {
  hw.validate();
  const auto plan = layer_plan(task, arch, dims.input_size);
  CostReport r;
  for (const auto& l : plan) {
    r.dsp_per_layer.push_back(dsp_layer(l.input, l.hidden, hw.reuse_x, hw.reuse_h));
    r.dsp_design += r.dsp_per_layer.back();
  }
  r.dsp_dense = dsp_dense(task, plan.back().hidden, dims.output_size,
                          dims.seq_len, hw.reuse_d);
  r.dsp_design += r.dsp_dense;
  r.dsp_budget = dsp_budget(hw.dsp_total);
  r.feasible = r.dsp_design <= r.dsp_budget;
  return r;
}

// Modeled II of one layer: each multiplier serves R products per step, but
// never more products than the MVM has.
inline std::int64_t layer_ii(const LayerDims& l, std::int64_t reuse_x,
                             std::int64_t reuse_h) {
  const std::int64_t nx = 4 * static_cast<std::int64_t>(l.input) * l.hidden;
  const std::int64_t nh = 4 * static_cast<std::int64_t>(l.hidden) * l.hidden;
  return std::max(std::min(reuse_x, nx), std::min(reuse_h, nh));
}

struct IiEstimate {
  std::vector<std::int64_t> per_layer;
  std::int64_t design = 0;  // all layers are balanced to this
};

// Calibration entries take precedence over the reuse-factor model.
inline IiEstimate ii_estimate(const std::vector<LayerDims>& plan,
                              const HwConfig& hw) {
  IiEstimate e;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const auto it = hw.calibration.find(static_cast<int>(k));
    const std::int64_t ii = it != hw.calibration.end()
                                ? it->second.ii
                                : layer_ii(plan[k], hw.reuse_x, hw.reuse_h);
    e.per_layer.push_back(ii);
    e.design = std::max(e.design, ii);
  }
  return e;
}

inline std::vector<std::int64_t> il_estimate(std::size_t layers,
                                             std::int64_t design_ii,
                                             const HwConfig& hw) {
  std::vector<std::int64_t> il(layers, design_ii + hw.pipeline_depth);
  for (const auto& [k, t] : hw.calibration) {
    if (k >= 0 && static_cast<std::size_t>(k) < layers) il[k] = std::max(t.il, design_ii);
  }
  return il;
}

// Cycles for one pass: II*T + (IL - II)*NL; twice that for the autoencoder.
inline std::int64_t latency_design(std::int64_t ii, std::int64_t il,
                                   std::int64_t seq_len, std::int64_t nl,
                                   Task task) {
  detail::require(ii >= 1, "II must be >= 1");
  detail::require(il >= ii, "IL (" + std::to_string(il) +
                                ") must be >= II (" + std::to_string(ii) + ")");
  detail::require(seq_len >= 1 && nl >= 1, "T and NL must be >= 1");
  const std::int64_t part = ii * seq_len + (il - ii) * nl;
  return task == Task::kAutoencoder ? 2 * part : part;
}

// Same model with a per-layer IL: each layer adds its own (IL_i - II).
inline std::int64_t latency_design_layers(std::int64_t ii,
                                          const std::vector<std::int64_t>& il,
                                          std::int64_t seq_len, Task task) {
  detail::require(ii >= 1 && seq_len >= 1, "II and T must be >= 1");
  const std::size_t parts = task == Task::kAutoencoder ? 2 : 1;
  detail::require(!il.empty() && il.size() % parts == 0,
                  "layer count does not split into encoder/decoder");
  const std::size_t per_part = il.size() / parts;
  std::int64_t total = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    std::int64_t part = ii * seq_len;
    for (std::size_t k = p * per_part; k < (p + 1) * per_part; ++k) {
      detail::require(il[k] >= ii, "IL must be >= II for every layer");
      part += il[k] - ii;
    }
    total += part;
  }
  return total;
}

inline double cycles_to_time(std::int64_t cycles, double clock_hz) {
  detail::require(clock_hz > 0.0, "clock frequency must be > 0");
  return static_cast<double>(cycles) / clock_hz;
}

// Full resource + latency report for one design point.
inline CostReport estimate(const Arch& arch, Task task, const ModelDims& dims,
                           const HwConfig& hw) {
  CostReport r = dsp_design(arch, task, dims, hw);
  const auto plan = layer_plan(task, arch, dims.input_size);
  const auto ii = ii_estimate(plan, hw);
  r.ii = ii.design;
  r.il_per_layer = il_estimate(plan.size(), ii.design, hw);
  r.latency_cycles = latency_design_layers(r.ii, r.il_per_layer, dims.seq_len, task);
  r.latency_seconds = cycles_to_time(r.latency_cycles, hw.clock_hz);
  return r;
}

// Calibration text: one `layer_index II IL` record per line, `#` comments.
inline Calibration parse_calibration(std::istream& in) {
  Calibration cal;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    long long idx, ii, il;
    if (!(ss >> idx)) continue;  // blank line
    std::string extra;
    if (!(ss >> ii >> il) || (ss >> extra)) {
      detail::fail("calibration line " + std::to_string(lineno) +
                   ": expected `layer_index II IL`");
    }
    detail::require(idx >= 0 && ii >= 1 && il >= ii,
                    "calibration line " + std::to_string(lineno) +
                        ": need layer_index >= 0 and IL >= II >= 1");
    detail::require(cal.count(static_cast<int>(idx)) == 0,
                    "calibration line " + std::to_string(lineno) +
                        ": duplicate layer " + std::to_string(idx));
    cal[static_cast<int>(idx)] = {ii, il};
  }
  return cal;
}

inline Calibration load_calibration(const std::string& path) {
  std::ifstream f(path);
  detail::require(f.good(), "cannot open calibration file " + path);
  return parse_calibration(f);
}

}  // namespace mcd

#endif  // MCD_HWMODEL_HPP_
