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
#ifndef MCD_PIPELINES_HPP_
#define MCD_PIPELINES_HPP_

// Dataset-level evaluation: anomaly detection with an autoencoder and
// classification with an uncertainty probe. Sample i uses MC seed
// `seed ^ i`, so results do not depend on evaluation order.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "mcd/arch.hpp"
#include "mcd/datakit.hpp"
#include "mcd/error.hpp"
#include "mcd/metrics.hpp"
#include "mcd/network.hpp"

namespace mcd {

enum class ThresholdSource {
  kRoc,          // Youden-optimal cutoff on the evaluated set
  kTrainNormal,  // mean + 3 std of scores on normal training samples
};

inline std::string to_string(ThresholdSource t) {
  return t == ThresholdSource::kRoc ? "roc" : "train-normal";
}

struct SampleScore {
  int label = 0;
  bool anomalous = false;
  double score = 0.0;           // reconstruction RMSE of the MC mean
  double mean_epistemic = 0.0;  // averaged over the T x O outputs
  double nll = 0.0;             // Gaussian NLL under the total variance
};

struct AnomalyReport {
  int samples = 0;
  std::uint64_t seed = 0;
  ThresholdSource threshold_source = ThresholdSource::kRoc;
  std::size_t n = 0;
  std::size_t n_anomalous = 0;
  RocResult roc;
  double threshold = 0.0;
  double accuracy = 0.0;  // at `threshold`, anomalous iff score >= threshold
  double mean_rmse_normal = 0.0;
  double mean_nll = 0.0;
  double mean_epistemic = 0.0;
  std::vector<SampleScore> per_sample;
};

inline std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) {
  return seed ^ static_cast<std::uint64_t>(index);
}

namespace detail {

inline void check_sequence(const Engine& engine, const Dataset& data) {
  const auto& p = engine.params();
  require(data.size() > 0, "dataset is empty");
  require(data.length() == static_cast<std::size_t>(p.seq_len) *
                               static_cast<std::size_t>(p.input_size),
          "dataset sequence length " + std::to_string(data.length()) +
              " does not match the model (T*I = " +
              std::to_string(p.seq_len * p.input_size) + ")");
}

inline SampleScore score_sample(const Engine& engine, const std::vector<double>& x,
                                int samples, std::uint64_t seed) {
  const auto pred = engine.mc_predict(x, samples, seed);
  const auto& p = engine.params();
  require(p.output_size == p.input_size,
          "autoencoder output size must equal its input size");
  SampleScore s;
  std::vector<double> var(pred.total_var);
  for (double& v : var) {
    // A deterministic model with zero aleatoric noise has no likelihood.
    if (v <= 0.0) v = std::ldexp(1.0, -kVarianceGridBits);
  }
  const auto m = regression_metrics(pred.mean, var, x);
  s.score = m.rmse;
  s.nll = m.nll;
  for (double v : pred.epistemic_var) s.mean_epistemic += v;
  s.mean_epistemic /= static_cast<double>(pred.epistemic_var.size());
  return s;
}

inline std::vector<double> normal_train_scores(const Engine& engine,
                                               const Dataset& train, int samples,
                                               std::uint64_t seed,
                                               int normal_class) {
  std::vector<double> out;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.labels[i] != normal_class) continue;
    out.push_back(score_sample(engine, train.samples[i], samples,
                               sample_seed(seed, i)).score);
  }
  require(!out.empty(), "training set has no normal samples");
  return out;
}

}  // namespace detail

// Label `normal_class` is normal; every other class is an anomaly (positive).
// `train` is needed only for ThresholdSource::kTrainNormal.
inline AnomalyReport anomaly_pipeline(const Engine& engine, const Dataset& data,
                                      int samples, std::uint64_t seed,
                                      ThresholdSource source = ThresholdSource::kRoc,
                                      const Dataset* train = nullptr,
                                      int normal_class = 0) {
  detail::require(engine.params().task == Task::kAutoencoder,
                  "anomaly detection needs autoencoder weights, got " +
                      to_string(engine.params().task));
  detail::require(samples >= 1, "S must be >= 1");
  detail::check_sequence(engine, data);

  AnomalyReport r;
  r.samples = samples;
  r.seed = seed;
  r.threshold_source = source;
  r.n = data.size();
  std::vector<double> scores;
  std::vector<int> positive;
  std::size_t n_normal = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto s = detail::score_sample(engine, data.samples[i], samples,
                                  sample_seed(seed, i));
    s.label = data.labels[i];
    s.anomalous = s.label != normal_class;
    scores.push_back(s.score);
    positive.push_back(s.anomalous ? 1 : 0);
    r.n_anomalous += s.anomalous ? 1 : 0;
    if (!s.anomalous) {
      r.mean_rmse_normal += s.score;
      ++n_normal;
    }
    r.mean_nll += s.nll;
    r.mean_epistemic += s.mean_epistemic;
    r.per_sample.push_back(s);
  }
  detail::require(r.n_anomalous > 0 && n_normal > 0,
                  "anomaly evaluation needs both normal and anomalous samples");
  r.mean_rmse_normal /= static_cast<double>(n_normal);
  r.mean_nll /= static_cast<double>(r.n);
  r.mean_epistemic /= static_cast<double>(r.n);
  r.roc = roc_analysis(scores, positive);

  if (source == ThresholdSource::kRoc) {
    r.threshold = r.roc.best_threshold;
  } else {
    detail::require(train != nullptr, "train-normal threshold needs a training set");
    detail::check_sequence(engine, *train);
    const auto ref =
        detail::normal_train_scores(engine, *train, samples, seed, normal_class);
    double mean = 0.0;
    for (double v : ref) mean += v;
    mean /= static_cast<double>(ref.size());
    double var = 0.0;
    for (double v : ref) var += (v - mean) * (v - mean);
    var /= static_cast<double>(ref.size());
    r.threshold = mean + 3.0 * std::sqrt(var);
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    correct += ((scores[i] >= r.threshold) == (positive[i] == 1)) ? 1 : 0;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
  return r;
}

struct NoiseProbe {
  int sequences = 500;
  double stddev = 1.0;
  std::uint64_t seed = 7;
};

struct ClassifyReport {
  int samples = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  ClassificationMetrics metrics;
  double mean_entropy = 0.0;  // over the evaluated samples, nats
  bool probed = false;
  double noise_entropy = 0.0;  // mean over the noise sequences, nats
  std::vector<std::vector<double>> probs;
  std::vector<int> predicted;
};

// Mean predictive entropy over Gaussian-noise inputs of the model's length.
inline double noise_entropy(const Engine& engine, int samples,
                            const NoiseProbe& probe) {
  detail::require(probe.sequences >= 1 && probe.stddev > 0.0,
                  "noise probe needs >= 1 sequence and stddev > 0");
  const auto& p = engine.params();
  const auto len = static_cast<std::size_t>(p.seq_len) *
                   static_cast<std::size_t>(p.input_size);
  std::mt19937_64 rng(probe.seed);
  std::normal_distribution<double> noise(0.0, probe.stddev);
  double total = 0.0;
  std::vector<double> x(len);
  for (int k = 0; k < probe.sequences; ++k) {
    for (double& v : x) v = noise(rng);
    total += engine.mc_predict(x, samples, sample_seed(probe.seed, static_cast<std::size_t>(k)))
                 .entropy;
  }
  return total / static_cast<double>(probe.sequences);
}

inline ClassifyReport classify_pipeline(const Engine& engine, const Dataset& data,
                                        int samples, std::uint64_t seed,
                                        const NoiseProbe* probe = nullptr) {
  detail::require(engine.params().task == Task::kClassifier,
                  "classification needs classifier weights, got " +
                      to_string(engine.params().task));
  detail::require(samples >= 1, "S must be >= 1");
  detail::check_sequence(engine, data);
  for (int l : data.labels) {
    detail::require(l >= 0 && l < engine.params().output_size,
                    "label " + std::to_string(l) + " is outside the model's " +
                        std::to_string(engine.params().output_size) + " classes");
  }
  ClassifyReport r;
  r.samples = samples;
  r.seed = seed;
  r.n = data.size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto pred = engine.mc_predict(data.samples[i], samples, sample_seed(seed, i));
    r.mean_entropy += pred.entropy;
    r.predicted.push_back(static_cast<int>(argmax(pred.class_probs)));
    r.probs.push_back(pred.class_probs);
  }
  r.mean_entropy /= static_cast<double>(r.n);
  r.metrics = classification_metrics(r.probs, data.labels);
  if (probe != nullptr) {
    r.probed = true;
    r.noise_entropy = noise_entropy(engine, samples, *probe);
  }
  return r;
}

inline void write_report(std::ostream& out, const AnomalyReport& r) {
  out << "anomaly detection: " << r.n << " samples (" << r.n_anomalous
      << " anomalous), S=" << r.samples << ", seed=" << r.seed << '\n'
      << "auc=" << r.roc.auc << '\n'
      << "ap=" << r.roc.ap << '\n'
      << "threshold_source=" << to_string(r.threshold_source) << '\n'
      << "threshold=" << r.threshold << '\n'
      << "accuracy=" << r.accuracy << '\n'
      << "roc_best_threshold=" << r.roc.best_threshold << '\n'
      << "roc_accuracy=" << r.roc.acc_at_cutoff << '\n'
      << "mean_rmse_normal=" << r.mean_rmse_normal << '\n'
      << "mean_nll=" << r.mean_nll << '\n'
      << "mean_epistemic_var=" << r.mean_epistemic << '\n';
}

// Per-sample CSV: index,label,anomalous,score,epistemic_var,nll.
inline void write_scores_csv(std::ostream& out, const AnomalyReport& r) {
  out << "index,label,anomalous,score,epistemic_var,nll\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < r.per_sample.size(); ++i) {
    const auto& s = r.per_sample[i];
    out << i << ',' << s.label << ',' << (s.anomalous ? 1 : 0) << ',' << s.score
        << ',' << s.mean_epistemic << ',' << s.nll << '\n';
  }
}

inline void write_report(std::ostream& out, const ClassifyReport& r) {
  out << "classification: " << r.n << " samples, S=" << r.samples
      << ", seed=" << r.seed << '\n'
      << "accuracy=" << r.metrics.accuracy << '\n'
      << "ap=" << r.metrics.macro_ap << '\n'
      << "ar=" << r.metrics.macro_ar << '\n'
      << "mean_entropy=" << r.mean_entropy << '\n';
  if (r.probed) out << "noise_entropy=" << r.noise_entropy << '\n';
}

}  // namespace mcd

#endif  // MCD_PIPELINES_HPP_
