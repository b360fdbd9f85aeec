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
#include <numbers>
#include <random>
#include <set>

#include "mcd/metrics.hpp"
#include "oracles.hpp"

namespace mcd {
namespace {

TEST(Regression, Examples) {
  const std::vector<double> y{0.5, -1.0, 2.0};
  const std::vector<double> one{1.0};
  auto m = regression_metrics(y, one, y);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_EQ(m.l1, 0.0);
  EXPECT_NEAR(m.nll, 0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(m.nll, 0.9189, 1e-4);
  const std::vector<double> shifted{1.5, 0.0, 3.0};
  m = regression_metrics(shifted, one, y);
  EXPECT_DOUBLE_EQ(m.rmse, 1.0);
  EXPECT_DOUBLE_EQ(m.l1, 1.0);
}

TEST(Regression, MatchesPerPointSummation) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<double> mu(10), var(10), y(10);
  for (int k = 0; k < 10; ++k) {
    mu[k] = n(rng);
    y[k] = n(rng);
    var[k] = u(rng);
  }
  double se = 0, ae = 0, nll = 0;
  for (int k = 0; k < 10; ++k) {
    const double e = mu[k] - y[k];
    se += e * e;
    ae += std::abs(e);
    nll += -std::log(std::exp(-e * e / (2 * var[k])) / std::sqrt(2 * std::numbers::pi * var[k]));
  }
  const auto m = regression_metrics(mu, var, y);
  EXPECT_NEAR(m.rmse, std::sqrt(se / 10), 1e-12);
  EXPECT_NEAR(m.l1, ae / 10, 1e-12);
  EXPECT_NEAR(m.nll, nll / 10, 1e-12);
  const std::vector<double> zero{0.0};
  EXPECT_THROW(regression_metrics(mu, zero, y), ValidationError);
}

TEST(Roc, Examples) {
  const std::vector<int> y{1, 1, 0, 0};
  const std::vector<double> perfect{0.9, 0.8, 0.3, 0.2};
  EXPECT_DOUBLE_EQ(roc_analysis(perfect, y).auc, 1.0);
  const std::vector<double> s{0.9, 0.4, 0.6, 0.2};
  const auto r = roc_analysis(s, y);
  EXPECT_DOUBLE_EQ(r.auc, 0.75);
  const std::vector<int> flipped{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(roc_analysis(s, flipped).auc, 0.25);
}

TEST(Roc, YoudenTieTakesHigherThreshold) {
  // J = 0.5 at thresholds 0.9 and 0.4, J = 0 at 0.6 and 0.2.
  const std::vector<int> y{1, 1, 0, 0};
  const std::vector<double> s{0.9, 0.4, 0.6, 0.2};
  const auto r = roc_analysis(s, y);
  EXPECT_DOUBLE_EQ(r.best_threshold, 0.9);
  EXPECT_DOUBLE_EQ(r.acc_at_cutoff, 0.75);
}

TEST(Roc, MatchesPairwiseOracleWithoutTies) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 60);
    std::vector<double> s;
    std::vector<int> y;
    std::set<double> seen;
    while (static_cast<int>(s.size()) < n) {
      const double v = u(rng);
      if (!seen.insert(v).second) continue;
      s.push_back(v + (rng() % 3 == 0 ? 0.3 : 0.0));
      y.push_back(static_cast<int>(s.size()) % 2);
    }
    const auto r = roc_analysis(s, y);
    EXPECT_EQ(r.auc, oracle::pairwise_auc(s, y));
  }
}

TEST(Roc, MonotoneTransformInvariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> s(80), t(80);
  std::vector<int> y(80);
  for (int k = 0; k < 80; ++k) {
    y[k] = k % 3 == 0;
    s[k] = n(rng) + y[k];
    t[k] = std::exp(2.0 * s[k]) + 5.0;
  }
  const auto a = roc_analysis(s, y);
  const auto b = roc_analysis(t, y);
  EXPECT_NEAR(a.auc, b.auc, 1e-12);
  EXPECT_NEAR(a.ap, b.ap, 1e-12);
  EXPECT_DOUBLE_EQ(a.acc_at_cutoff, b.acc_at_cutoff);
  EXPECT_NEAR(std::exp(2.0 * a.best_threshold) + 5.0, b.best_threshold, 1e-9);
}

TEST(Roc, RejectsSingleClass) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> y{1, 1};
  EXPECT_THROW(roc_analysis(s, y), ValidationError);
}

TEST(AveragePrecision, HandExample) {
  // Ranking 1,0,1,0: precisions at the positives are 1 and 2/3.
  const std::vector<double> s{0.9, 0.8, 0.7, 0.1};
  const std::vector<int> y{1, 0, 1, 0};
  EXPECT_NEAR(average_precision(s, y), (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
}

TEST(Classification, Examples) {
  std::vector<std::vector<double>> onehot;
  std::vector<int> labels;
  for (int c = 0; c < 4; ++c) {
    std::vector<double> p(4, 0.0);
    p[c] = 1.0;
    onehot.push_back(p);
    labels.push_back(c);
  }
  auto m = classification_metrics(onehot, labels);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.macro_ap, 1.0);
  EXPECT_DOUBLE_EQ(m.macro_ar, 1.0);

  std::vector<std::vector<double>> constant(8, {0.7, 0.1, 0.1, 0.1});
  const std::vector<int> balanced{0, 1, 2, 3, 0, 1, 2, 3};
  m = classification_metrics(constant, balanced);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.25);
  EXPECT_DOUBLE_EQ(m.macro_ar, 0.25);
}

// Brute-force per-class tabulation on a 12-sample, 3-class case.
TEST(Classification, TwelveSampleConfusionOracle) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<std::vector<double>> probs;
  const std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 2, 2, 2, 2};
  for (int i = 0; i < 12; ++i) {
    std::vector<double> p{u(rng), u(rng), u(rng)};
    p[labels[i]] += (i % 4 == 0) ? 0.0 : 0.6;
    const double s = p[0] + p[1] + p[2];
    for (double& v : p) v /= s;
    probs.push_back(p);
  }
  int confusion[3][3] = {};
  for (int i = 0; i < 12; ++i) {
    int pred = 0;
    for (int c = 1; c < 3; ++c)
      if (probs[i][c] > probs[i][pred]) pred = c;
    ++confusion[labels[i]][pred];
  }
  double acc = 0, ar = 0, ap = 0;
  for (int c = 0; c < 3; ++c) {
    int row = 0;
    for (int d = 0; d < 3; ++d) row += confusion[c][d];
    acc += confusion[c][c];
    ar += static_cast<double>(confusion[c][c]) / row;
    // AP without ties: mean precision at each positive's rank.
    double sum = 0;
    int pos = 0;
    for (int i = 0; i < 12; ++i) {
      if (labels[i] != c) continue;
      ++pos;
      int above = 0, above_pos = 0;
      for (int j = 0; j < 12; ++j) {
        if (probs[j][c] >= probs[i][c]) {
          ++above;
          above_pos += labels[j] == c;
        }
      }
      sum += static_cast<double>(above_pos) / above;
    }
    ap += sum / pos;
  }
  const auto m = classification_metrics(probs, labels);
  EXPECT_NEAR(m.accuracy, acc / 12, 1e-12);
  EXPECT_NEAR(m.macro_ar, ar / 3, 1e-12);
  EXPECT_NEAR(m.macro_ap, ap / 3, 1e-12);
}

TEST(Classification, AbsentClassesAreLeftOut) {
  const std::vector<std::vector<double>> probs{{0.8, 0.1, 0.1}, {0.2, 0.7, 0.1}};
  const std::vector<int> labels{0, 1};
  const auto m = classification_metrics(probs, labels);
  EXPECT_DOUBLE_EQ(m.macro_ar, 1.0);
  EXPECT_DOUBLE_EQ(m.macro_ap, 1.0);
}

TEST(Entropy, ExamplesAndBounds) {
  const std::vector<double> onehot{0, 1, 0, 0};
  const std::vector<double> uniform{0.25, 0.25, 0.25, 0.25};
  const std::vector<double> half{0.5, 0.5, 0, 0};
  EXPECT_EQ(predictive_entropy(onehot), 0.0);
  EXPECT_NEAR(predictive_entropy(uniform), std::log(4.0), 1e-12);
  EXPECT_NEAR(predictive_entropy(half), std::log(2.0), 1e-12);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> p(4);
    double s = 0;
    for (double& v : p) s += (v = u(rng));
    for (double& v : p) v /= s;
    const double h = predictive_entropy(p);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(4.0) + 1e-12);
  }
  const std::vector<double> bad{0.5, 0.6};
  EXPECT_THROW(predictive_entropy(bad), ValidationError);
}

TEST(Uncertainty, Examples) {
  auto u = uncertainty_decompose({{0.0}, {2.0}}, 1.0);
  EXPECT_EQ(u.mean[0], 1.0);
  EXPECT_EQ(u.epistemic[0], 2.0);
  EXPECT_EQ(u.total[0], 3.0);
  u = uncertainty_decompose({{0.3, 0.1}, {0.3, 0.1}, {0.3, 0.1}}, 0.5);
  EXPECT_EQ(u.epistemic, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(u.total, (std::vector<double>{0.5, 0.5}));
  u = uncertainty_decompose({{4.0}}, 0.25);
  EXPECT_TRUE(u.single_sample);
  EXPECT_EQ(u.epistemic[0], 0.0);
  EXPECT_DOUBLE_EQ(u.upper_band()[0], 4.0 + 1.5);
  EXPECT_DOUBLE_EQ(u.lower_band()[0], 4.0 - 1.5);
}

TEST(Uncertainty, DecompositionIdentityIsExact) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> a(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> samples(30, std::vector<double>(20));
    for (auto& s : samples)
      for (double& v : s) v = n(rng);
    const auto u = uncertainty_decompose(samples, a(rng));
    for (std::size_t i = 0; i < u.total.size(); ++i) {
      ASSERT_EQ(u.total[i] - u.epistemic[i], u.aleatoric);
      ASSERT_EQ(u.total[i], u.epistemic[i] + u.aleatoric);
    }
  }
}

}  // namespace
}  // namespace mcd
