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
#ifndef MCD_DSE_HPP_
#define MCD_DSE_HPP_

// Algorithm/hardware design space exploration.
//
// Two stages: pick an architecture from a lookup table of benchmarked
// models according to the optimization mode, then pick the reuse factors
// that minimize II within the DSP budget. Both stages enumerate their whole
// space, so the result is exact and reproducible.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "mcd/arch.hpp"
#include "mcd/error.hpp"
#include "mcd/hwmodel.hpp"

namespace mcd {

enum class OptMode { kLatency, kAccuracy, kPrecision, kRecall, kAuc, kEntropy };

inline std::string to_string(OptMode m) {
  switch (m) {
    case OptMode::kLatency: return "Opt-Latency";
    case OptMode::kAccuracy: return "Opt-Accuracy";
    case OptMode::kPrecision: return "Opt-Precision";
    case OptMode::kRecall: return "Opt-Recall";
    case OptMode::kAuc: return "Opt-AUC";
    case OptMode::kEntropy: return "Opt-Entropy";
  }
  return "?";
}

// Accepts "Opt-Accuracy", "opt-accuracy" or "accuracy".
inline OptMode parse_mode(const std::string& s) {
  std::string v;
  for (char c : s) v += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v.rfind("opt-", 0) == 0) v = v.substr(4);
  if (v == "latency") return OptMode::kLatency;
  if (v == "accuracy") return OptMode::kAccuracy;
  if (v == "precision") return OptMode::kPrecision;
  if (v == "recall") return OptMode::kRecall;
  if (v == "auc") return OptMode::kAuc;
  if (v == "entropy") return OptMode::kEntropy;
  detail::fail("unknown optimization mode '" + s + "'");
}

// Metric maximized by a mode; Opt-Latency has none.
inline std::optional<std::string> mode_metric(OptMode m) {
  switch (m) {
    case OptMode::kLatency: return std::nullopt;
    case OptMode::kAccuracy: return "accuracy";
    case OptMode::kPrecision: return "ap";
    case OptMode::kRecall: return "ar";
    case OptMode::kAuc: return "auc";
    case OptMode::kEntropy: return "entropy";
  }
  return std::nullopt;
}

inline bool mode_valid_for(OptMode m, Task task) {
  if (m == OptMode::kRecall || m == OptMode::kEntropy) return task == Task::kClassifier;
  if (m == OptMode::kAuc) return task == Task::kAutoencoder;
  return true;
}

inline const std::vector<std::string>& metric_registry() {
  static const std::vector<std::string> names = {"accuracy", "ap",   "auc", "ar",
                                                 "entropy",  "rmse", "nll"};
  return names;
}

inline bool is_known_metric(const std::string& name) {
  const auto& r = metric_registry();
  return std::find(r.begin(), r.end(), name) != r.end();
}

// rmse and nll are errors; every other metric improves upward.
inline bool higher_is_better(const std::string& metric) {
  return metric != "rmse" && metric != "nll";
}

struct LookupEntry {
  Task task = Task::kAutoencoder;
  Arch arch;
  int samples = 30;
  std::map<std::string, double> metrics;
  std::string source;

  std::optional<double> metric(const std::string& name) const {
    const auto it = metrics.find(name);
    if (it == metrics.end()) return std::nullopt;
    return it->second;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

// Lookup CSV: header `task,H,NL,B,S,<metric>...[,source]`. Metric columns
// must be registry names; empty cells mean "not measured". Blank lines and
// lines starting with '#' are skipped.
inline std::vector<LookupEntry> parse_lookup_table(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  int lineno = 0;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    header = detail::split_csv(t);
  }
  detail::require(header.size() >= 5 && header[0] == "task" && header[1] == "H" &&
                      header[2] == "NL" && header[3] == "B" && header[4] == "S",
                  "lookup table header must start with task,H,NL,B,S");
  int source_col = -1;
  for (std::size_t c = 5; c < header.size(); ++c) {
    if (header[c] == "source") {
      source_col = static_cast<int>(c);
      continue;
    }
    detail::require(is_known_metric(header[c]),
                    "unknown metric column '" + header[c] + "'");
  }

  std::vector<LookupEntry> table;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = detail::split_csv(t);
    const std::string where = " (line " + std::to_string(lineno) + ")";
    detail::require(cells.size() == header.size(),
                    "lookup row has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(header.size()) + where);
    LookupEntry e;
    e.task = parse_task(cells[0]);
    e.arch.hidden = detail::parse_int(cells[1], "H" + where);
    e.arch.layers = detail::parse_int(cells[2], "NL" + where);
    e.arch.bayes = cells[3];
    e.samples = detail::parse_int(cells[4], "S" + where);
    detail::require(e.samples >= 1, "S must be >= 1" + where);
    validate(e.arch, e.task);
    for (std::size_t c = 5; c < cells.size(); ++c) {
      if (static_cast<int>(c) == source_col) {
        e.source = cells[c];
      } else if (!cells[c].empty()) {
        e.metrics[header[c]] = detail::parse_number(cells[c], header[c] + where);
      }
    }
    table.push_back(std::move(e));
  }
  return table;
}

inline std::vector<LookupEntry> load_lookup_table(const std::string& path) {
  std::ifstream f(path);
  detail::require(f.good(), "cannot open lookup table " + path);
  return parse_lookup_table(f);
}

inline void write_lookup_table(std::ostream& out,
                               const std::vector<LookupEntry>& table) {
  out << "task,H,NL,B,S";
  for (const auto& m : metric_registry()) out << ',' << m;
  out << ",source\n";
  out.precision(17);
  for (const auto& e : table) {
    out << to_string(e.task) << ',' << e.arch.hidden << ',' << e.arch.layers
        << ',' << e.arch.bayes << ',' << e.samples;
    for (const auto& m : metric_registry()) {
      out << ',';
      if (auto v = e.metric(m)) out << *v;
    }
    out << ',' << e.source << '\n';
  }
}

struct OptimizationRequest {
  OptMode mode = OptMode::kAccuracy;
  Task task = Task::kAutoencoder;
  std::int64_t dsp_total = 900;
  double clock_hz = 100e6;
  std::map<std::string, double> min_requirements;
  ModelDims dims;                  // I, O, T
  std::optional<int> samples;      // overrides the table's S when set
  int pipeline_depth = 32;
};

// ECG5000 defaults: one input feature, T = 140, one reconstructed feature
// (anomaly) or four classes.
inline ModelDims default_dims(Task task) {
  return task == Task::kAutoencoder ? ModelDims{1, 1, 140} : ModelDims{1, 4, 140};
}

inline int default_reuse_max(const Arch& arch, const ModelDims& dims) {
  return 4 * arch.hidden * std::max(dims.input_size, arch.hidden);
}

struct ReuseSearchOptions {
  double clock_hz = 100e6;
  int pipeline_depth = 32;
  std::optional<int> reuse_max;
};

// Exhaustive search over R_x, R_h in [1, R_max]. R_d follows the task rule
// (R_x for the autoencoder, 1 for the classifier). Among feasible points the
// lowest II wins, then the fewest DSPs, then the smallest (R_x, R_h).
inline HwConfig search_reuse_factors(const Arch& arch, Task task,
                                     const ModelDims& dims,
                                     std::int64_t dsp_total,
                                     const ReuseSearchOptions& opts = {}) {
  detail::require(dsp_total > 0, "dsp_total must be > 0");
  const auto plan = layer_plan(task, arch, dims.input_size);
  const int rmax = opts.reuse_max.value_or(default_reuse_max(arch, dims));
  detail::require(rmax >= 1, "reuse_max must be >= 1");
  const std::int64_t budget = dsp_budget(dsp_total);

  // Precompute the input-side and hidden-side terms per reuse factor.
  std::vector<std::int64_t> x_dsp(rmax + 1, 0), x_ii(rmax + 1, 0);
  std::vector<std::int64_t> h_dsp(rmax + 1, 0), h_ii(rmax + 1, 0);
  std::int64_t tail = 0;
  for (const auto& l : plan) tail += 4 * static_cast<std::int64_t>(l.hidden);
  for (int r = 1; r <= rmax; ++r) {
    for (const auto& l : plan) {
      const std::int64_t nx = 4 * static_cast<std::int64_t>(l.input) * l.hidden;
      const std::int64_t nh = 4 * static_cast<std::int64_t>(l.hidden) * l.hidden;
      x_dsp[r] += ceil_div(nx, r);
      h_dsp[r] += ceil_div(nh, r);
      x_ii[r] = std::max(x_ii[r], std::min<std::int64_t>(r, nx));
      h_ii[r] = std::max(h_ii[r], std::min<std::int64_t>(r, nh));
    }
  }
  const std::int64_t hl = plan.back().hidden;

  std::int64_t best_ii = std::numeric_limits<std::int64_t>::max();
  std::int64_t best_dsp = std::numeric_limits<std::int64_t>::max();
  std::int64_t smallest = std::numeric_limits<std::int64_t>::max();
  int best_rx = 0, best_rh = 0;
  for (int rx = 1; rx <= rmax; ++rx) {
    const int rd = task == Task::kAutoencoder ? rx : 1;
    const std::int64_t fixed =
        tail + x_dsp[rx] + dsp_dense(task, hl, dims.output_size, dims.seq_len, rd);
    for (int rh = 1; rh <= rmax; ++rh) {
      const std::int64_t dsp = fixed + h_dsp[rh];
      smallest = std::min(smallest, dsp);
      if (dsp > budget) continue;
      const std::int64_t ii = std::max(x_ii[rx], h_ii[rh]);
      if (ii < best_ii || (ii == best_ii && dsp < best_dsp)) {
        best_ii = ii;
        best_dsp = dsp;
        best_rx = rx;
        best_rh = rh;
      }
    }
  }
  if (best_rx == 0) {
    throw InfeasibleError(
        "no reuse factors fit " + arch.str() + " (" + to_string(task) +
        ") into " + std::to_string(budget) + " DSPs (dsp_total " +
        std::to_string(dsp_total) + " + 5%); smallest design needs " +
        std::to_string(smallest) + " DSPs");
  }
  HwConfig hw;
  hw.reuse_x = best_rx;
  hw.reuse_h = best_rh;
  hw.reuse_d = task == Task::kAutoencoder ? best_rx : 1;
  hw.dsp_total = dsp_total;
  hw.clock_hz = opts.clock_hz;
  hw.pipeline_depth = opts.pipeline_depth;
  return hw;
}

struct SelectedConfig {
  LookupEntry entry;
  HwConfig hw;
  CostReport predicted;
  int samples = 1;
  std::int64_t latency_cycles_per_input = 0;  // S sequential passes
  double latency_seconds_per_input = 0.0;
};

namespace detail {

inline bool meets_requirements(const LookupEntry& e,
                               const std::map<std::string, double>& req) {
  for (const auto& [name, thr] : req) {
    const auto v = e.metric(name);
    if (!v) return false;
    if (higher_is_better(name) ? *v < thr : *v > thr) return false;
  }
  return true;
}

// Strict weak order: true if `a` should be selected over `b`.
inline bool better(const SelectedConfig& a, const SelectedConfig& b,
                   OptMode mode) {
  if (const auto m = mode_metric(mode)) {
    const double va = *a.entry.metric(*m);
    const double vb = *b.entry.metric(*m);
    if (va != vb) return higher_is_better(*m) ? va > vb : va < vb;
  }
  const auto key = [](const SelectedConfig& c) {
    return std::make_tuple(c.latency_cycles_per_input, c.predicted.dsp_design,
                           c.entry.arch.hidden, c.entry.arch.bayesian_count(),
                           c.entry.arch.bayes, c.entry.arch.layers, c.samples);
  };
  return key(a) < key(b);
}

}  // namespace detail

// Runs both stages for every admissible table entry and returns all
// feasible candidates (unordered).
inline std::vector<SelectedConfig> evaluate_candidates(
    const OptimizationRequest& req, const std::vector<LookupEntry>& table) {
  detail::require(req.dsp_total > 0, "dsp_total must be > 0");
  detail::require(mode_valid_for(req.mode, req.task),
                  to_string(req.mode) + " is not available for " +
                      to_string(req.task));
  for (const auto& [name, thr] : req.min_requirements) {
    detail::require(is_known_metric(name), "unknown metric '" + name + "'");
  }
  const bool any_for_task = std::any_of(table.begin(), table.end(), [&](const auto& e) {
    return e.task == req.task;
  });
  detail::require(any_for_task, "lookup table has no " + to_string(req.task) + " entries");

  const auto metric = mode_metric(req.mode);
  std::vector<SelectedConfig> out;
  for (const auto& e : table) {
    if (e.task != req.task) continue;
    if (metric && !e.metric(*metric)) continue;
    if (!detail::meets_requirements(e, req.min_requirements)) continue;
    SelectedConfig c;
    c.entry = e;
    c.samples = req.samples.value_or(e.samples);
    try {
      c.hw = search_reuse_factors(e.arch, e.task, req.dims, req.dsp_total,
                                  {req.clock_hz, req.pipeline_depth, std::nullopt});
    } catch (const InfeasibleError&) {
      continue;
    }
    c.predicted = estimate(e.arch, e.task, req.dims, c.hw);
    if (!c.predicted.feasible) continue;
    c.latency_cycles_per_input = c.samples * c.predicted.latency_cycles;
    c.latency_seconds_per_input = cycles_to_time(c.latency_cycles_per_input, req.clock_hz);
    out.push_back(std::move(c));
  }
  return out;
}

inline SelectedConfig optimize(const OptimizationRequest& req,
                               const std::vector<LookupEntry>& table) {
  const auto candidates = evaluate_candidates(req, table);
  if (candidates.empty()) {
    throw InfeasibleError("no feasible architecture for " + to_string(req.mode) +
                          " (" + to_string(req.task) + ", dsp_total " +
                          std::to_string(req.dsp_total) + ")");
  }
  const SelectedConfig* best = &candidates.front();
  for (const auto& c : candidates) {
    if (detail::better(c, *best, req.mode)) best = &c;
  }
  return *best;
}

inline LookupEntry select_architecture(const OptimizationRequest& req,
                                       const std::vector<LookupEntry>& table) {
  return optimize(req, table).entry;
}

// Human-readable summary followed by a `key=value` block between
// `[result]` and `[end]`.
inline void write_report(std::ostream& out, const OptimizationRequest& req,
                         const SelectedConfig& s) {
  const auto& a = s.entry.arch;
  out << "Mode " << to_string(req.mode) << " on " << to_string(req.task)
      << " with " << req.dsp_total << " DSPs\n";
  out << "  architecture  H=" << a.hidden << " NL=" << a.layers << " B=" << a.bayes
      << " S=" << s.samples << "\n";
  out << "  reuse factors R_x=" << s.hw.reuse_x << " R_h=" << s.hw.reuse_h
      << " R_d=" << s.hw.reuse_d << "\n";
  out << "  DSPs          " << s.predicted.dsp_design << " / "
      << s.predicted.dsp_budget << " (budget incl. 5%)\n";
  out << "  II            " << s.predicted.ii << " cycles\n";
  out << "  latency       " << s.predicted.latency_cycles << " cycles/pass, "
      << s.latency_seconds_per_input * 1e3 << " ms/input\n";
  for (const auto& [k, v] : s.entry.metrics) out << "  " << k << " = " << v << "\n";
  out << "[result]\n";
  out << "mode=" << to_string(req.mode) << "\n";
  out << "task=" << to_string(req.task) << "\n";
  out << "H=" << a.hidden << "\nNL=" << a.layers << "\nB=" << a.bayes << "\n";
  out << "S=" << s.samples << "\n";
  out << "R_x=" << s.hw.reuse_x << "\nR_h=" << s.hw.reuse_h
      << "\nR_d=" << s.hw.reuse_d << "\n";
  out << "dsp_design=" << s.predicted.dsp_design << "\n";
  out << "dsp_budget=" << s.predicted.dsp_budget << "\n";
  out << "ii=" << s.predicted.ii << "\n";
  out << "latency_cycles_per_pass=" << s.predicted.latency_cycles << "\n";
  out << "latency_cycles_per_input=" << s.latency_cycles_per_input << "\n";
  out << "latency_seconds_per_input=" << s.latency_seconds_per_input << "\n";
  for (const auto& [k, v] : s.entry.metrics) out << "metric." << k << "=" << v << "\n";
  out << "[end]\n";
}

}  // namespace mcd

#endif  // MCD_DSE_HPP_
