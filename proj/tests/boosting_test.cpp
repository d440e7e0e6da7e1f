// Copyright 2026 The lungcadx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lungcadx/boosting.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "lungcadx/errors.hpp"
#include "oracles/split_oracle.hpp"

namespace lungcadx {
namespace {

struct Data {
  Matrix x;
  std::vector<int> y;
  std::vector<std::vector<double>> rows;
};

// Features on a coarse grid so duplicate values and tied thresholds occur.
Data random_data(std::uint64_t seed, std::size_t n, std::size_t d) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> grid(0, 19);
  std::normal_distribution<double> noise(0.0, 1.0);
  Data out{Matrix(n, d), std::vector<int>(n), {}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(d);
    for (std::size_t f = 0; f < d; ++f) r[f] = out.x(i, f) = grid(rng) * 0.05;
    out.y[i] = r[0] + 0.5 * r[1 % d] + 0.3 * noise(rng) > 0.75 ? 1 : 0;
    out.rows.push_back(std::move(r));
  }
  return out;
}

double train_log_loss(const GbtModel& m, const Data& d) {
  double s = 0;
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    const double p = oracle::walk_proba(m, d.rows[i]);
    s -= d.y[i] ? std::log(p) : std::log(1 - p);
  }
  return s / static_cast<double>(d.y.size());
}

TEST(GradHessTest, SpecExamples) {
  const auto a = logistic_grad_hess(1, 0.0);
  EXPECT_DOUBLE_EQ(a.g, -0.5);
  EXPECT_DOUBLE_EQ(a.h, 0.25);
  const auto b = logistic_grad_hess(0, 0.0);
  EXPECT_DOUBLE_EQ(b.g, 0.5);
  EXPECT_DOUBLE_EQ(b.h, 0.25);
  const auto c = logistic_grad_hess(1, 4.0);
  EXPECT_NEAR(c.g, -0.017986, 1e-5);
  EXPECT_NEAR(c.h, 0.017663, 1e-5);
}

TEST(GradHessTest, HessianIsFiniteDifferenceOfGradient) {
  for (double m = -10.0; m <= 10.0; m += 0.25) {
    for (const int y : {0, 1}) {
      const double fd =
          (logistic_grad_hess(y, m + 1e-5).g - logistic_grad_hess(y, m - 1e-5).g) / 2e-5;
      EXPECT_NEAR(logistic_grad_hess(y, m).h, fd, 1e-6) << m;
    }
  }
}

TEST(LeafWeightTest, SpecExamples) {
  EXPECT_EQ(leaf_weight(0.0, 3.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(leaf_weight(2.0, 3.0, 1.0), -0.5);
  EXPECT_DOUBLE_EQ(leaf_weight(-1.0, 0.0, 1.0), 1.0);
  EXPECT_THROW(leaf_weight(1.0, 0.0, 0.0), DegenerateLeafError);
}

TEST(BestSplitTest, IdenticalRowsGiveNoSplit) {
  Matrix x(6, 3, 1.5);
  std::vector<double> g{1, -1, 1, -1, 1, -1}, h(6, 0.25);
  std::vector<std::size_t> idx(6);
  std::iota(idx.begin(), idx.end(), 0);
  EXPECT_FALSE(best_split(idx, x, g, h, GbtParams{}).has_value());
}

TEST(BestSplitTest, LargeGammaGivesNoSplit) {
  const auto d = random_data(1, 50, 5);
  std::vector<double> g(50), h(50);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto gh = logistic_grad_hess(d.y[i], 0.0);
    g[i] = gh.g;
    h[i] = gh.h;
  }
  std::vector<std::size_t> idx(50);
  std::iota(idx.begin(), idx.end(), 0);
  GbtParams p;
  p.min_child_weight = 0;
  const auto free = oracle::exhaustive_split(d.rows, g, h, p.lambda, 0.0, 0.0);
  ASSERT_TRUE(free.has_value());
  p.gamma = free->gain + 1e-9;
  EXPECT_FALSE(best_split(idx, d.x, g, h, p).has_value());
}

TEST(BestSplitTest, MatchesExhaustiveOracleOnRandomData) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> gu(-1, 1), hu(0.01, 0.25);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto d = random_data(seed, 50, 5);
    std::vector<double> g(50), h(50);
    for (std::size_t i = 0; i < 50; ++i) {
      g[i] = gu(rng);
      h[i] = hu(rng);
    }
    std::vector<std::size_t> idx(50);
    std::iota(idx.begin(), idx.end(), 0);
    GbtParams p;
    p.min_child_weight = 1.0;
    const auto got = best_split(idx, d.x, g, h, p);
    const auto want = oracle::exhaustive_split(d.rows, g, h, p.lambda, p.gamma, p.min_child_weight);
    ASSERT_EQ(got.has_value(), want.has_value()) << seed;
    if (want) {
      EXPECT_EQ(got->feature, want->feature) << seed;
      EXPECT_EQ(got->threshold, want->threshold) << seed;
      EXPECT_NEAR(got->gain, want->gain, 1e-9) << seed;
    }
  }
}

TEST(TrainGbtTest, SingleStumpEqualsExhaustiveStump) {
  GbtParams p;
  p.num_rounds = 1;
  p.max_depth = 1;
  p.min_child_weight = 1.0;
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    const auto d = random_data(seed, 50, 5);
    const auto m = train_gbt(d.x, d.y, p);
    std::vector<double> g(50), h(50);
    for (std::size_t i = 0; i < 50; ++i) {
      g[i] = 0.5 - d.y[i];
      h[i] = 0.25;
    }
    const auto want = oracle::exhaustive_split(d.rows, g, h, p.lambda, p.gamma, p.min_child_weight);
    ASSERT_EQ(m.trees().size(), 1u);
    const auto& root = m.trees()[0].nodes[0];
    ASSERT_EQ(!root.is_leaf(), want.has_value());
    if (want) {
      EXPECT_EQ(static_cast<std::size_t>(root.feature), want->feature);
      EXPECT_EQ(root.threshold, want->threshold);
    }
  }
}

TEST(TrainGbtTest, LogLossNonIncreasing) {
  GbtParams p;
  p.max_depth = 4;
  p.num_rounds = 100;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = random_data(500 + seed, 60, 6);
    GbtTrace trace;
    train_gbt(d.x, d.y, p, &trace);
    ASSERT_EQ(trace.log_loss.size(), 100u);
    for (std::size_t t = 1; t < trace.log_loss.size(); ++t) {
      ASSERT_LE(trace.log_loss[t], trace.log_loss[t - 1] + 1e-12) << seed << " round " << t;
    }
  }
}

TEST(TrainGbtTest, SeparableDataFits) {
  Matrix x(10, 1);
  std::vector<int> y(10);
  Data d;
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i;
    y[i] = i >= 5;
    d.rows.push_back({static_cast<double>(i)});
  }
  d.x = x;
  d.y = y;
  GbtParams p;
  p.max_depth = 3;
  p.num_rounds = 50;
  p.learning_rate = 0.3;
  p.min_child_weight = 0.0;
  EXPECT_LT(train_log_loss(train_gbt(x, y, p), d), 0.05);
}

TEST(TrainGbtTest, OneClassOnly) {
  const auto d = random_data(3, 20, 3);
  std::vector<int> ones(20, 1);
  GbtParams p;
  p.learning_rate = 0.1;
  const auto m = train_gbt(d.x, ones, p);
  for (const auto& t : m.trees()) EXPECT_EQ(t.nodes.size(), 1u);
  for (const auto& r : d.rows) EXPECT_GT(m.predict_proba(r), 0.95);
}

TEST(TrainGbtTest, EmptyDatasetThrows) {
  EXPECT_THROW(train_gbt(Matrix(0, 3), std::vector<int>{}, GbtParams{}), ContractViolation);
}

TEST(TrainGbtTest, DepthBoundAndTreeWalkAgreement) {
  for (int depth : {1, 2, 5, 13}) {
    GbtParams p;
    p.max_depth = depth;
    p.min_child_weight = 0.5;
    p.num_rounds = 20;
    const auto d = random_data(40 + depth, 80, 4);
    const auto m = train_gbt(d.x, d.y, p);
    for (const auto& t : m.trees()) {
      EXPECT_LE(t.depth(), depth);
      for (const auto& nd : t.nodes) EXPECT_TRUE(std::isfinite(nd.weight));
    }
    for (const auto& r : d.rows) {
      EXPECT_NEAR(predict_proba_gbt(m, r), oracle::walk_proba(m, r), 1e-12);
    }
  }
}

TEST(PredictTest, TrivialModels) {
  GbtParams p;
  p.learning_rate = 0.2;
  const GbtModel empty(p, 2, {});
  EXPECT_EQ(empty.predict_proba(std::vector<double>{1, 2}), 0.5);
  RegressionTree leaf;
  leaf.nodes.push_back(TreeNode{-1, 0, -1, -1, 1.5});
  const GbtModel one(p, 2, {leaf});
  EXPECT_NEAR(one.predict_proba(std::vector<double>{0, 0}), 1 / (1 + std::exp(-0.3)), 1e-15);
  EXPECT_THROW(one.predict_proba(std::vector<double>{0}), ContractViolation);
}

TEST(InvarianceTest, MonotoneFeatureTransformKeepsPredictions) {
  GbtParams p;
  p.max_depth = 3;
  p.num_rounds = 30;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = random_data(900 + seed, 40, 3);
    Matrix t(d.x.rows(), d.x.cols());
    for (std::size_t i = 0; i < d.x.rows(); ++i)
      for (std::size_t f = 0; f < d.x.cols(); ++f) t(i, f) = std::exp(3 * d.x(i, f)) + 7 * f;
    const auto a = train_gbt(d.x, d.y, p);
    const auto b = train_gbt(t, d.y, p);
    ASSERT_EQ(a.trees().size(), b.trees().size());
    for (std::size_t k = 0; k < a.trees().size(); ++k) {
      ASSERT_EQ(a.trees()[k].nodes.size(), b.trees()[k].nodes.size());
      for (std::size_t n = 0; n < a.trees()[k].nodes.size(); ++n) {
        EXPECT_EQ(a.trees()[k].nodes[n].feature, b.trees()[k].nodes[n].feature);
      }
    }
    for (std::size_t i = 0; i < d.x.rows(); ++i) {
      EXPECT_DOUBLE_EQ(a.predict_proba(d.x.row(i)), b.predict_proba(t.row(i)));
    }
  }
}

TEST(InvarianceTest, HugeGammaGivesConstantModel) {
  GbtParams p;
  p.gamma = 1e9;
  const auto d = random_data(8, 30, 4);
  const auto m = train_gbt(d.x, d.y, p);
  for (const auto& t : m.trees()) EXPECT_EQ(t.nodes.size(), 1u);
  const double p0 = m.predict_proba(d.x.row(0));
  for (std::size_t i = 1; i < 30; ++i) EXPECT_EQ(m.predict_proba(d.x.row(i)), p0);
}

TEST(TrainGbtTest, Deterministic) {
  const auto d = random_data(4, 50, 5);
  EXPECT_EQ(train_gbt(d.x, d.y, GbtParams{}).dump_json(), train_gbt(d.x, d.y, GbtParams{}).dump_json());
}

TEST(GbtParamsTest, Validation) {
  GbtParams p;
  p.max_depth = 0;
  EXPECT_THROW(p.validate(), ContractViolation);
  p = GbtParams{};
  p.gamma = NAN;
  EXPECT_THROW(p.validate(), ContractViolation);
}

}  // namespace
}  // namespace lungcadx
