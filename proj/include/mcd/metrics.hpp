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
#ifndef MCD_METRICS_HPP_
#define MCD_METRICS_HPP_

// Evaluation metrics: reconstruction fit, ROC analysis for anomaly scores,
// multi-class accuracy/precision/recall and predictive uncertainty.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mcd/error.hpp"

namespace mcd {

struct RegressionMetrics {
  double rmse = 0.0;
  double l1 = 0.0;
  double nll = 0.0;  // mean Gaussian negative log-likelihood, nats
};

// `var` is either one value per element or a single shared value.
inline RegressionMetrics regression_metrics(std::span<const double> mean,
                                            std::span<const double> var,
                                            std::span<const double> target) {
  detail::require(!mean.empty() && mean.size() == target.size(),
                  "regression_metrics: prediction and target shapes differ");
  detail::require(var.size() == mean.size() || var.size() == 1,
                  "regression_metrics: variance must be per element or scalar");
  RegressionMetrics m;
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double v = var.size() == 1 ? var[0] : var[k];
    detail::require(v > 0.0 && std::isfinite(v),
                    "regression_metrics: variance must be positive");
    const double e = mean[k] - target[k];
    m.rmse += e * e;
    m.l1 += std::abs(e);
    m.nll += 0.5 * (log2pi + std::log(v) + e * e / v);
  }
  const auto n = static_cast<double>(mean.size());
  m.rmse = std::sqrt(m.rmse / n);
  m.l1 /= n;
  m.nll /= n;
  return m;
}

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct RocResult {
  double auc = 0.0;
  double best_threshold = 0.0;  // positive iff score >= best_threshold
  double acc_at_cutoff = 0.0;
  double ap = 0.0;
  std::vector<RocPoint> curve;  // descending thresholds, without (0,0)
};

namespace detail {

struct Counts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

inline Counts count_labels(std::span<const int> labels) {
  Counts c;
  for (int l : labels) {
    require(l == 0 || l == 1, "binary labels must be 0 or 1");
    (l == 1 ? c.pos : c.neg)++;
  }
  return c;
}

// Indices sorted by descending score; ties keep input order.
inline std::vector<std::size_t> order_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return idx;
}

}  // namespace detail

// Area under the step-interpolated precision-recall curve:
// sum over distinct thresholds of (R_k - R_{k-1}) * P_k.
inline double average_precision(std::span<const double> scores,
                                std::span<const int> labels) {
  detail::require(scores.size() == labels.size() && !scores.empty(),
                  "average_precision: scores and labels differ in length");
  const auto counts = detail::count_labels(labels);
  detail::require(counts.pos > 0, "average_precision: no positive samples");
  const auto idx = detail::order_desc(scores);
  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (labels[idx[k]] == 1 ? tp : fp)++;
    const bool last_of_group =
        k + 1 == idx.size() || scores[idx[k + 1]] != scores[idx[k]];
    if (!last_of_group) continue;
    const double recall = static_cast<double>(tp) / static_cast<double>(counts.pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

// ROC by sweeping every distinct score as threshold (positive iff
// score >= threshold). AUC uses the trapezoid rule, summed in integer pair
// counts so it equals the pairwise (Mann-Whitney) statistic exactly. The cutoff maximizes
// Youden's J = TPR - FPR; among equal J the larger threshold wins.
inline RocResult roc_analysis(std::span<const double> scores,
                              std::span<const int> labels) {
  detail::require(scores.size() == labels.size() && !scores.empty(),
                  "roc_analysis: scores and labels differ in length");
  for (double s : scores) {
    detail::require(std::isfinite(s), "roc_analysis: non-finite score");
  }
  const auto counts = detail::count_labels(labels);
  detail::require(counts.pos > 0 && counts.neg > 0,
                  "roc_analysis: both classes must be present");
  const auto P = static_cast<double>(counts.pos);
  const auto N = static_cast<double>(counts.neg);
  const auto n = static_cast<double>(scores.size());

  RocResult r;
  const auto idx = detail::order_desc(scores);
  std::size_t tp = 0, fp = 0, prev_tp = 0, prev_fp = 0;
  std::uint64_t twice_area = 0;  // in units of one positive-negative pair
  double best_j = -2.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (labels[idx[k]] == 1 ? tp : fp)++;
    const bool last_of_group =
        k + 1 == idx.size() || scores[idx[k + 1]] != scores[idx[k]];
    if (!last_of_group) continue;
    const double tpr = static_cast<double>(tp) / P;
    const double fpr = static_cast<double>(fp) / N;
    twice_area += static_cast<std::uint64_t>(fp - prev_fp) * (tp + prev_tp);
    prev_tp = tp;
    prev_fp = fp;
    const double thr = scores[idx[k]];
    r.curve.push_back({thr, fpr, tpr});
    const double j = tpr - fpr;
    if (j > best_j) {
      best_j = j;
      r.best_threshold = thr;
      const double tn = N - static_cast<double>(fp);
      r.acc_at_cutoff = (static_cast<double>(tp) + tn) / n;
    }
  }
  r.auc = static_cast<double>(twice_area) / (2.0 * P * N);
  r.ap = average_precision(scores, labels);
  return r;
}

struct ClassificationMetrics {
  double accuracy = 0.0;
  double macro_ap = 0.0;
  double macro_ar = 0.0;
};

// Index of the largest entry; the lowest index wins ties.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

// Macro AP/AR average over the classes that occur in `labels`; a class with
// no samples has undefined recall and is left out of both means.
inline ClassificationMetrics classification_metrics(
    const std::vector<std::vector<double>>& probs, std::span<const int> labels) {
  detail::require(!probs.empty(), "classification_metrics: empty input");
  detail::require(probs.size() == labels.size(),
                  "classification_metrics: probs and labels differ in length");
  const std::size_t n_classes = probs.front().size();
  detail::require(n_classes >= 2, "classification_metrics: need >= 2 classes");
  for (const auto& row : probs) {
    detail::require(row.size() == n_classes,
                    "classification_metrics: ragged probability rows");
    const double s = std::accumulate(row.begin(), row.end(), 0.0);
    detail::require(std::abs(s - 1.0) <= 1e-6,
                    "classification_metrics: probability rows must sum to 1");
  }
  for (int l : labels) {
    detail::require(l >= 0 && static_cast<std::size_t>(l) < n_classes,
                    "classification_metrics: label out of range");
  }

  ClassificationMetrics m;
  std::vector<std::size_t> support(n_classes, 0), hits(n_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const std::size_t pred = argmax(probs[i]);
    const auto truth = static_cast<std::size_t>(labels[i]);
    ++support[truth];
    if (pred == truth) {
      ++correct;
      ++hits[truth];
    }
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(probs.size());

  std::size_t present = 0;
  std::vector<double> column(probs.size());
  std::vector<int> one_vs_rest(probs.size());
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (support[c] == 0) continue;
    ++present;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      column[i] = probs[i][c];
      one_vs_rest[i] = static_cast<std::size_t>(labels[i]) == c ? 1 : 0;
    }
    m.macro_ap += average_precision(column, one_vs_rest);
    m.macro_ar += static_cast<double>(hits[c]) / static_cast<double>(support[c]);
  }
  m.macro_ap /= static_cast<double>(present);
  m.macro_ar /= static_cast<double>(present);
  return m;
}

// -sum p ln p in nats, with 0 ln 0 = 0.
inline double predictive_entropy(std::span<const double> probs) {
  const double s = std::accumulate(probs.begin(), probs.end(), 0.0);
  detail::require(std::abs(s - 1.0) <= 1e-6,
                  "predictive_entropy: probabilities must sum to 1");
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

// Variances are held on a 2^-40 grid. For magnitudes below 2^12 every sum
// and difference of grid values is exact in double precision, so
// total - epistemic == aleatoric holds bit for bit.
inline constexpr int kVarianceGridBits = 40;

inline double snap_variance(double v) {
  return std::ldexp(std::nearbyint(std::ldexp(v, kVarianceGridBits)),
                    -kVarianceGridBits);
}

struct UncertaintyDecomposition {
  std::vector<double> mean;
  std::vector<double> epistemic;  // unbiased variance across samples
  std::vector<double> total;      // epistemic + aleatoric
  double aleatoric = 0.0;
  bool single_sample = false;  // S == 1: epistemic is defined as 0

  // mean +- 3 standard deviations of the total uncertainty.
  std::vector<double> band(double k_sigma, bool upper) const {
    std::vector<double> out(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double d = k_sigma * std::sqrt(total[i]);
      out[i] = upper ? mean[i] + d : mean[i] - d;
    }
    return out;
  }
  std::vector<double> lower_band() const { return band(3.0, false); }
  std::vector<double> upper_band() const { return band(3.0, true); }
};

inline UncertaintyDecomposition uncertainty_decompose(
    const std::vector<std::vector<double>>& samples, double aleatoric_var) {
  detail::require(!samples.empty(), "uncertainty_decompose: need S >= 1");
  detail::require(aleatoric_var >= 0.0,
                  "uncertainty_decompose: aleatoric variance must be >= 0");
  const std::size_t n = samples.front().size();
  for (const auto& s : samples) {
    detail::require(s.size() == n, "uncertainty_decompose: ragged samples");
  }
  const auto S = static_cast<double>(samples.size());
  UncertaintyDecomposition u;
  u.aleatoric = snap_variance(aleatoric_var);
  u.single_sample = samples.size() == 1;
  u.mean.assign(n, 0.0);
  u.epistemic.assign(n, 0.0);
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < n; ++i) u.mean[i] += s[i];
  }
  for (double& m : u.mean) m /= S;
  if (!u.single_sample) {
    for (const auto& s : samples) {
      for (std::size_t i = 0; i < n; ++i) {
        const double d = s[i] - u.mean[i];
        u.epistemic[i] += d * d;
      }
    }
    for (double& v : u.epistemic) v = snap_variance(v / (S - 1.0));
  }
  u.total.resize(n);
  for (std::size_t i = 0; i < n; ++i) u.total[i] = u.epistemic[i] + u.aleatoric;
  return u;
}

}  // namespace mcd

#endif  // MCD_METRICS_HPP_
