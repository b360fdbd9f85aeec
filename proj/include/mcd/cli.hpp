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
#ifndef MCD_CLI_HPP_
#define MCD_CLI_HPP_

// Command-line front end. Exit codes: 0 success, 2 invalid input,
// 3 infeasible request.
//
//   detect   --weights F --data F [--samples 30] [--seed 42] [--report PATH]
//   classify --weights F --data F [--samples 30] [--seed 42] [--entropy-probe]
//   estimate --arch H,NL,B --task T --reuse RX,RH[,RD] --dsp-total N
//            [--clock 1e8] [--calibration F]
//   dse      --table F --mode MODE --dsp-total N [--min metric=thr]... [--task T]

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "mcd/arch.hpp"
#include "mcd/datakit.hpp"
#include "mcd/dse.hpp"
#include "mcd/error.hpp"
#include "mcd/hwmodel.hpp"
#include "mcd/network.hpp"
#include "mcd/pipelines.hpp"

namespace mcd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitInfeasible = 3;

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const auto& cell : split_csv(s)) out.push_back(parse_int(cell, what));
  return out;
}

inline int cmd_detect(const std::string& weights, const std::string& data, int samples,
                      std::uint64_t seed, const std::string& report,
                      std::ostream& out) {
  const Engine engine(load_weights(weights));
  const auto ds = load_ucr(data);
  const auto r = anomaly_pipeline(engine, ds, samples, seed);
  write_report(out, r);
  if (!report.empty()) {
    std::ofstream f(report);
    require(f.good(), "cannot write report " + report);
    write_scores_csv(f, r);
  }
  return kExitOk;
}

inline int cmd_classify(const std::string& weights, const std::string& data,
                        int samples, std::uint64_t seed, bool probe,
                        std::ostream& out) {
  const Engine engine(load_weights(weights));
  const auto ds = load_ucr(data);
  const NoiseProbe np;
  const auto r = classify_pipeline(engine, ds, samples, seed, probe ? &np : nullptr);
  write_report(out, r);
  return kExitOk;
}

inline int cmd_estimate(const std::string& arch_s, const std::string& task_s,
                        const std::string& reuse_s, std::int64_t dsp_total,
                        double clock_hz, const std::string& calibration,
                        std::ostream& out) {
  const Task task = parse_task(task_s);
  const Arch arch = parse_arch(arch_s);
  validate(arch, task);
  const auto reuse = parse_int_list(reuse_s, "reuse factor");
  require(reuse.size() == 2 || reuse.size() == 3,
          "--reuse expects RX,RH or RX,RH,RD");
  HwConfig hw;
  hw.reuse_x = reuse[0];
  hw.reuse_h = reuse[1];
  hw.reuse_d = reuse.size() == 3 ? reuse[2]
                                 : (task == Task::kAutoencoder ? reuse[0] : 1);
  hw.dsp_total = dsp_total;
  hw.clock_hz = clock_hz;
  if (!calibration.empty()) hw.calibration = load_calibration(calibration);
  const auto dims = default_dims(task);
  const auto r = estimate(arch, task, dims, hw);

  out << "design " << arch.str() << " (" << to_string(task) << "), R_x=" << hw.reuse_x
      << " R_h=" << hw.reuse_h << " R_d=" << hw.reuse_d << '\n';
  for (std::size_t k = 0; k < r.dsp_per_layer.size(); ++k) {
    out << "dsp.layer" << k << '=' << r.dsp_per_layer[k] << '\n';
  }
  out << "dsp.dense=" << r.dsp_dense << '\n'
      << "dsp_design=" << r.dsp_design << '\n'
      << "dsp_budget=" << r.dsp_budget << '\n'
      << "feasible=" << (r.feasible ? "yes" : "no") << '\n'
      << "ii=" << r.ii << '\n';
  for (std::size_t k = 0; k < r.il_per_layer.size(); ++k) {
    out << "il.layer" << k << '=' << r.il_per_layer[k] << '\n';
  }
  out << "latency_cycles=" << r.latency_cycles << '\n'
      << "latency_seconds=" << r.latency_seconds << '\n';
  if (!r.feasible) {
    throw InfeasibleError("design needs " + std::to_string(r.dsp_design) +
                          " DSPs, budget is " + std::to_string(r.dsp_budget));
  }
  return kExitOk;
}

inline int cmd_dse(const std::string& table_path, const std::string& mode_s,
                   std::int64_t dsp_total, const std::vector<std::string>& mins,
                   const std::string& task_s, std::ostream& out) {
  const auto table = load_lookup_table(table_path);
  OptimizationRequest req;
  req.mode = parse_mode(mode_s);
  req.dsp_total = dsp_total;
  if (!task_s.empty()) {
    req.task = parse_task(task_s);
  } else {
    std::set<Task> tasks;
    for (const auto& e : table) tasks.insert(e.task);
    require(tasks.size() == 1, "table mixes tasks; pass --task");
    req.task = *tasks.begin();
  }
  req.dims = default_dims(req.task);
  for (const auto& m : mins) {
    const auto eq = m.find('=');
    require(eq != std::string::npos, "--min expects metric=threshold, got '" + m + "'");
    const std::string name = trim(m.substr(0, eq));
    require(is_known_metric(name), "unknown metric '" + name + "'");
    req.min_requirements[name] = parse_number(trim(m.substr(eq + 1)), "threshold");
  }
  write_report(out, req, optimize(req, table));
  return kExitOk;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Bayesian LSTM accelerator model"};
  app.require_subcommand(1);

  std::string weights, data, report, arch, task, reuse, calibration, table, mode;
  int samples = 30;
  std::uint64_t seed = 42;
  bool probe = false;
  std::int64_t dsp_total = 0;
  double clock_hz = 100e6;
  std::vector<std::string> mins;

  auto* detect = app.add_subcommand("detect", "anomaly detection with an autoencoder");
  detect->add_option("--weights", weights, "weight file")->required();
  detect->add_option("--data", data, "UCR dataset")->required();
  detect->add_option("--samples", samples, "MC samples S")->check(CLI::PositiveNumber);
  detect->add_option("--seed", seed, "sampler seed");
  detect->add_option("--report", report, "per-sample score CSV");

  auto* classify = app.add_subcommand("classify", "classification with uncertainty");
  classify->add_option("--weights", weights, "weight file")->required();
  classify->add_option("--data", data, "UCR dataset")->required();
  classify->add_option("--samples", samples, "MC samples S")->check(CLI::PositiveNumber);
  classify->add_option("--seed", seed, "sampler seed");
  classify->add_flag("--entropy-probe", probe, "mean entropy on Gaussian noise");

  auto* est = app.add_subcommand("estimate", "DSP and latency estimate");
  est->add_option("--arch", arch, "H,NL,B")->required();
  est->add_option("--task", task, "anomaly or classification")->required();
  est->add_option("--reuse", reuse, "RX,RH[,RD]")->required();
  est->add_option("--dsp-total", dsp_total, "device DSP count")->required();
  est->add_option("--clock", clock_hz, "clock frequency in Hz");
  est->add_option("--calibration", calibration, "per-layer II/IL file");

  auto* dse = app.add_subcommand("dse", "design space exploration");
  dse->add_option("--table", table, "lookup CSV")->required();
  dse->add_option("--mode", mode, "optimization mode")->required();
  dse->add_option("--dsp-total", dsp_total, "device DSP count")->required();
  dse->add_option("--min", mins, "metric=threshold");
  dse->add_option("--task", task, "anomaly or classification");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (*detect) return detail::cmd_detect(weights, data, samples, seed, report, out);
    if (*classify) return detail::cmd_classify(weights, data, samples, seed, probe, out);
    if (*est) {
      return detail::cmd_estimate(arch, task, reuse, dsp_total, clock_hz, calibration,
                                  out);
    }
    return detail::cmd_dse(table, mode, dsp_total, mins, task, out);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace mcd

#endif  // MCD_CLI_HPP_
