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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mcd/cli.hpp"
#include "mcd/datakit.hpp"
#include "mcd/pipelines.hpp"

namespace mcd {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mcd_datakit_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

TEST(Ucr, ParsesAndRelabels) {
  std::istringstream in("2, 1, 2, 3, 4\n5 4 1 2 0\n");
  const auto d = parse_ucr(in);
  ASSERT_EQ(d.size(), 2u);
  ASSERT_EQ(d.length(), 4u);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 1}));
  EXPECT_EQ(d.label_values, (std::vector<double>{2.0, 5.0}));
  EXPECT_TRUE(d.normalized);
  const double sd = std::sqrt(1.25);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(d.samples[0][k], (k + 1 - 2.5) / sd, 1e-12);
}

TEST(Ucr, NormalizationInvariantsAndIdempotence) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(3.0, 7.0);
  std::ostringstream text;
  for (int i = 0; i < 20; ++i) {
    text << (i % 5 + 1);
    for (int t = 0; t < 140; ++t) text << ',' << n(rng);
    text << '\n';
  }
  std::istringstream in(text.str());
  const auto d = parse_ucr(in);
  EXPECT_EQ(d.classes(), 5u);
  for (const auto& s : d.samples) {
    double m = 0, v = 0;
    for (double x : s) m += x;
    m /= static_cast<double>(s.size());
    for (double x : s) v += (x - m) * (x - m);
    v /= static_cast<double>(s.size());
    EXPECT_NEAR(m, 0.0, 1e-6);
    EXPECT_NEAR(v, 1.0, 1e-4);
    const auto again = z_normalize(s);
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_NEAR(again[k], s[k], 1e-6);
  }
}

TEST(Ucr, RejectsBadRows) {
  std::istringstream ragged("1,1,2,3,4\n2,1,2,3\n");
  EXPECT_THROW(parse_ucr(ragged), ValidationError);
  std::istringstream word("1,1,abc,3,4\n");
  EXPECT_THROW(parse_ucr(word), ValidationError);
  std::istringstream constant("1,2,2,2,2\n");
  EXPECT_THROW(parse_ucr(constant), ValidationError);
  std::istringstream constant_raw("1,2,2,2,2\n");
  EXPECT_NO_THROW(parse_ucr(constant_raw, false));
  EXPECT_THROW(load_ucr("/nonexistent/file.csv"), ValidationError);
}

TEST(Ucr, ReloadIsValueExact) {
  const auto p = scratch("reload.csv");
  write_file(p, "1,0.5,1.5,-2.25\n2,3,1,2\n");
  const auto a = load_ucr(p.string());
  const auto b = load_ucr(p.string());
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.labels, b.labels);
}

TEST(AnomalySplit, AppendsAnomalousTrainRowsLast) {
  Dataset train, test;
  train.samples = {{1, 2}, {3, 4}, {5, 6}};
  train.labels = {0, 1, 0};
  test.samples = {{7, 8}};
  test.labels = {1};
  const auto s = split_for_anomaly(train, test);
  EXPECT_EQ(s.train_normal.samples, (std::vector<std::vector<double>>{{1, 2}, {5, 6}}));
  EXPECT_EQ(s.test.samples, (std::vector<std::vector<double>>{{7, 8}, {3, 4}}));
  EXPECT_EQ(s.test.labels, (std::vector<int>{1, 1}));
}

NetworkParams random_params(Task task, const std::string& arch, std::uint64_t seed) {
  const NetworkShape shape{30, 1, task == Task::kAutoencoder ? 1 : 4};
  auto p = build_network(task, parse_arch(arch), shape, random_weights(seed, 1.0));
  p.aleatoric_var = 0.1;  // not a short decimal in binary
  return p;
}

TEST(Weights, RoundTripIsBitExact) {
  for (auto [task, arch] : {std::pair{Task::kAutoencoder, "16,2,YNYN"},
                            std::pair{Task::kClassifier, "8,3,YNY"}}) {
    const auto p = random_params(task, arch, 42);
    std::stringstream ss;
    save_weights(p, ss);
    const auto back = load_weights(ss);
    EXPECT_EQ(back, p);
    EXPECT_EQ(back.aleatoric_var, 0.1);
  }
  const auto path = scratch("w.bin");
  const auto p = random_params(Task::kClassifier, "8,1,Y", 1);
  save_weights(p, path.string());
  EXPECT_EQ(load_weights(path.string()), p);
}

std::string saved(const NetworkParams& p) {
  std::ostringstream ss;
  save_weights(p, ss);
  return ss.str();
}

TEST(Weights, DetectsTruncationAndCorruption) {
  const auto bytes = saved(random_params(Task::kClassifier, "8,2,YN", 3));
  std::istringstream cut(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(load_weights(cut), ValidationError);
  auto flipped = bytes;
  flipped[flipped.size() - 3] ^= 0x10;
  std::istringstream bad(flipped);
  EXPECT_THROW(load_weights(bad), ValidationError);
}

TEST(Weights, RejectsUnknownVersionAndShapeErrors) {
  const auto bytes = saved(random_params(Task::kAutoencoder, "8,1,YY", 4));
  auto v2 = bytes;
  v2.replace(v2.find("mcd-lstm-weights 1"), 18, "mcd-lstm-weights 2");
  std::istringstream a(v2);
  EXPECT_THROW(load_weights(a), ValidationError);
  auto b_short = bytes;
  b_short.replace(b_short.find("\nB YY\n"), 6, "\nB Y\n");
  std::istringstream b(b_short);
  EXPECT_THROW(load_weights(b), ValidationError);
  std::istringstream junk("hello\n");
  EXPECT_THROW(load_weights(junk), ValidationError);
}

// Zero weights reconstruct every input as 0, so the score is the RMS of the
// input. Anomalies get 10x the amplitude of normal rows.
Dataset separable_toy(int T) {
  Dataset d;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const bool anomalous = i % 3 == 0;
    std::vector<double> x(static_cast<std::size_t>(T));
    for (double& v : x) v = (anomalous ? 1.0 : 0.1) * (n(rng) > 0 ? 1.0 : -1.0);
    d.samples.push_back(x);
    d.labels.push_back(anomalous ? 1 : 0);
  }
  d.label_values = {1.0, 2.0};
  return d;
}

TEST(AnomalyPipeline, SeparableToyGivesPerfectAuc) {
  auto net = build_network(Task::kAutoencoder, parse_arch("8,1,YY"), {40, 1, 1},
                           zero_weights());
  net.aleatoric_var = 0.5;
  const Engine e(net);
  const auto data = separable_toy(40);
  const auto r = anomaly_pipeline(e, data, 5, 42);
  EXPECT_DOUBLE_EQ(r.roc.auc, 1.0);
  EXPECT_DOUBLE_EQ(r.roc.ap, 1.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.n_anomalous, 4u);
  for (const auto& s : r.per_sample) {
    EXPECT_NEAR(s.score, s.anomalous ? 1.0 : 0.1, 1e-3);
  }
  // Train-normal threshold: normal rows all score 0.1 -> threshold 0.1.
  const auto t = anomaly_pipeline(e, data, 5, 42, ThresholdSource::kTrainNormal, &data);
  EXPECT_NEAR(t.threshold, 0.1, 1e-3);
}

TEST(AnomalyPipeline, DeterministicAndChecksTask) {
  const Engine e(random_params(Task::kAutoencoder, "8,1,YY", 5));
  Dataset d = separable_toy(30);
  const auto a = anomaly_pipeline(e, d, 30, 7);
  const auto b = anomaly_pipeline(e, d, 30, 7);
  ASSERT_EQ(a.per_sample.size(), b.per_sample.size());
  for (std::size_t i = 0; i < a.per_sample.size(); ++i) {
    EXPECT_EQ(a.per_sample[i].score, b.per_sample[i].score);
    EXPECT_EQ(a.per_sample[i].mean_epistemic, b.per_sample[i].mean_epistemic);
  }
  EXPECT_EQ(a.roc.auc, b.roc.auc);
  const Engine c(random_params(Task::kClassifier, "8,1,Y", 5));
  EXPECT_THROW(anomaly_pipeline(c, d, 3, 1), ValidationError);
  const Engine wrong_len(build_network(Task::kAutoencoder, parse_arch("8,1,NN"),
                                       {31, 1, 1}, zero_weights()));
  EXPECT_THROW(anomaly_pipeline(wrong_len, d, 1, 1), ValidationError);
}

TEST(ClassifyPipeline, UniformModel) {
  const Engine e(build_network(Task::kClassifier, parse_arch("8,1,Y"), {30, 1, 4},
                               zero_weights()));
  Dataset d;
  d.samples = {std::vector<double>(30, 0.2)};
  d.labels = {0};
  d.label_values = {1.0};
  NoiseProbe probe;
  probe.sequences = 20;
  const auto r = classify_pipeline(e, d, 3, 1, &probe);
  EXPECT_DOUBLE_EQ(r.metrics.accuracy, 1.0);  // all-equal probs pick class 0
  EXPECT_NEAR(r.mean_entropy, std::log(4.0), 1e-12);
  EXPECT_TRUE(r.probed);
  EXPECT_NEAR(r.noise_entropy, std::log(4.0), 1e-12);
  d.labels = {3};
  EXPECT_DOUBLE_EQ(classify_pipeline(e, d, 3, 1).metrics.accuracy, 0.0);
}

// Hand-built level detector: hidden units 0..2 fire on x > -1.35, x > 0 and
// x > 1.35; class c has the sign pattern of level c.
NetworkParams level_classifier() {
  const double thresholds[3] = {-1.35, 0.0, 1.35};
  auto source = [&](const WeightSlot& s) -> double {
    const bool unit = s.row < 3;
    switch (s.kind) {
      case WeightSlot::kInputWeight:
        return unit && s.gate == kGateCell ? 8.0 : 0.0;
      case WeightSlot::kHiddenWeight:
        return 0.0;
      case WeightSlot::kBias:
        if (!unit) return 0.0;
        if (s.gate == kGateCell) return -8.0 * thresholds[s.row];
        return s.gate == kGateForget ? -7.9 : 7.9;
      case WeightSlot::kDenseWeight:
        if (s.col >= 3) return 0.0;
        return s.row > s.col ? 4.0 : -4.0;
      case WeightSlot::kDenseBias:
        return 0.0;
    }
    return 0.0;
  };
  return build_network(Task::kClassifier, parse_arch("8,1,N"), {20, 1, 4}, source);
}

TEST(ClassifyPipeline, PerfectHandBuiltModel) {
  const Engine e(level_classifier());
  Dataset d;
  const double levels[4] = {-2.0, -0.7, 0.7, 2.0};
  for (int c = 0; c < 4; ++c) {
    for (int k = 0; k < 3; ++k) {
      d.samples.push_back(std::vector<double>(20, levels[c] + 0.05 * k));
      d.labels.push_back(c);
    }
  }
  d.label_values = {1, 2, 3, 4};
  const auto r = classify_pipeline(e, d, 1, 0);
  EXPECT_DOUBLE_EQ(r.metrics.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.metrics.macro_ap, 1.0);
  EXPECT_DOUBLE_EQ(r.metrics.macro_ar, 1.0);
  const Engine ae(random_params(Task::kAutoencoder, "8,1,NN", 1));
  EXPECT_THROW(classify_pipeline(ae, d, 1, 0), ValidationError);
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "mcd_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

TEST(Cli, EstimateExitCodes) {
  std::string text;
  EXPECT_EQ(run({"estimate", "--arch", "16,2,YNYN", "--task", "anomaly", "--reuse",
                 "16,5,16", "--dsp-total", "900"},
                &text),
            0);
  EXPECT_NE(text.find("dsp_design=930"), std::string::npos) << text;
  EXPECT_NE(text.find("ii=16"), std::string::npos);
  EXPECT_EQ(run({"estimate", "--arch", "16,2,YNYN", "--task", "anomaly", "--reuse",
                 "1,1", "--dsp-total", "900"}),
            3);
  EXPECT_EQ(run({"estimate", "--arch", "16,2,YNY", "--task", "anomaly", "--reuse",
                 "16,5", "--dsp-total", "900"}),
            2);
  EXPECT_EQ(run({"estimate", "--arch", "8,1,N", "--task", "classification", "--reuse",
                 "12,1", "--dsp-total", "900", "--calibration",
                 std::string(MCD_DATA_DIR) + "/calibration_example.txt"}),
            0);
  EXPECT_EQ(run({"estimate", "--arch", "8,1,N"}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
}

TEST(Cli, DseExitCodes) {
  std::string text;
  const std::string table = std::string(MCD_DATA_DIR) + "/classification_table.csv";
  EXPECT_EQ(run({"dse", "--table", table, "--mode", "Opt-Recall", "--dsp-total", "900"},
                &text),
            0);
  EXPECT_NE(text.find("B=YN\n"), std::string::npos) << text;
  EXPECT_EQ(run({"dse", "--table", table, "--mode", "Opt-Latency", "--dsp-total", "900",
                 "--min", "accuracy=0.99"}),
            3);
  EXPECT_EQ(run({"dse", "--table", table, "--mode", "Opt-Latency", "--dsp-total", "900",
                 "--min", "accuracy"}),
            2);
  EXPECT_EQ(run({"dse", "--table", "/nonexistent.csv", "--mode", "Opt-Latency",
                 "--dsp-total", "900"}),
            2);
}

TEST(Cli, DetectAndClassify) {
  const auto w = scratch("toy_ae.bin");
  auto net = build_network(Task::kAutoencoder, parse_arch("8,1,YY"), {40, 1, 1},
                           zero_weights());
  save_weights(net, w.string());
  const auto data = separable_toy(40);
  std::ostringstream csv;
  for (std::size_t i = 0; i < data.size(); ++i) {
    csv << data.labels[i] + 1;
    for (double v : data.samples[i]) csv << ',' << v;
    csv << '\n';
  }
  const auto dpath = scratch("toy.csv");
  write_file(dpath, csv.str());
  const auto report = scratch("scores.csv");
  std::string text;
  EXPECT_EQ(run({"detect", "--weights", w.string(), "--data", dpath.string(), "--samples",
                 "3", "--report", report.string()},
                &text),
            0)
      << text;
  EXPECT_NE(text.find("auc="), std::string::npos);
  std::ifstream rep(report);
  std::string header;
  std::getline(rep, header);
  EXPECT_EQ(header, "index,label,anomalous,score,epistemic_var,nll");

  // Autoencoder weights on the classify command: task mismatch.
  EXPECT_EQ(run({"classify", "--weights", w.string(), "--data", dpath.string()}), 2);
  const auto cw = scratch("toy_cl.bin");
  save_weights(build_network(Task::kClassifier, parse_arch("8,1,Y"), {40, 1, 4},
                             zero_weights()),
               cw.string());
  EXPECT_EQ(run({"classify", "--weights", cw.string(), "--data", dpath.string(),
                 "--samples", "2", "--entropy-probe"},
                &text),
            0)
      << text;
  EXPECT_NE(text.find("noise_entropy="), std::string::npos);
}

}  // namespace
}  // namespace mcd
