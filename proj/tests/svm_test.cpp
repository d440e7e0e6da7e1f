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

#include "lungcadx/svm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lungcadx/errors.hpp"
#include "oracles/qp_oracle.hpp"

namespace lungcadx {
namespace {

struct Data {
  Matrix x;
  std::vector<int> y;  // {0,1}
};

Data gaussian_data(std::uint64_t seed, std::size_t n, std::size_t d, double shift) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Data out{Matrix(n, d), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.y[i] = i % 2 == 0 ? 1 : 0;
    for (std::size_t f = 0; f < d; ++f) out.x(i, f) = z(rng) + (out.y[i] ? shift : 0.0);
  }
  return out;
}

// Histogram-like rows: three L1-normalized blocks, class-dependent bias.
Data histogram_data(std::uint64_t seed, std::size_t n, std::size_t bins) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gam(2.0, 1.0);
  Data out{Matrix(n, 3 * bins), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.y[i] = i < n / 2 ? 0 : 1;
    for (int b = 0; b < 3; ++b) {
      double s = 0;
      for (std::size_t k = 0; k < bins; ++k) {
        const double v = gam(rng) * (out.y[i] && k < bins / 3 ? 1.6 : 1.0);
        out.x(i, b * bins + k) = v;
        s += v;
      }
      for (std::size_t k = 0; k < bins; ++k) out.x(i, b * bins + k) /= s;
    }
  }
  return out;
}

std::vector<int> signed_of(const std::vector<int>& y) {
  std::vector<int> s;
  for (int v : y) s.push_back(v == 1 ? 1 : -1);
  return s;
}

double decision_from(const Data& d, const std::vector<double>& alpha, double b,
                     std::span<const double> x, double gamma) {
  double f = b;
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    double sq = 0;
    for (std::size_t k = 0; k < x.size(); ++k) sq += (d.x(i, k) - x[k]) * (d.x(i, k) - x[k]);
    f += alpha[i] * (d.y[i] == 1 ? 1 : -1) * std::exp(-gamma * sq);
  }
  return f;
}

TEST(RbfKernelTest, SpecExamples) {
  const std::vector<double> a{1, 2, 3}, b{1, 2, 4};
  EXPECT_EQ(rbf_kernel(a, a, 5.0), 1.0);
  EXPECT_NEAR(rbf_kernel(a, b, std::log(2.0)), 0.5, 1e-15);
  EXPECT_THROW(rbf_kernel(a, std::vector<double>{1}, 1.0), ContractViolation);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(7), z(7);
    double sq = 0;
    for (int k = 0; k < 7; ++k) {
      x[k] = u(rng);
      z[k] = u(rng);
      sq += (x[k] - z[k]) * (x[k] - z[k]);
    }
    EXPECT_NEAR(rbf_kernel(x, z, 0.3), std::exp(-0.3 * sq), 1e-12);
  }
}

TEST(RbfKernelTest, KernelMatrixIsSymmetricPsd) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = gaussian_data(seed, 20, 4, 0.0);
    const Matrix k = rbf_kernel_matrix(d.x, 0.7);
    // Smallest eigenvalue via Cholesky of K + 1e-8 I.
    const std::size_t n = 20;
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        ASSERT_EQ(k(i, j), k(j, i));
        double s = k(i, j) + (i == j ? 1e-8 : 0.0);
        for (std::size_t p = 0; p < j; ++p) s -= l[i * n + p] * l[j * n + p];
        if (i == j) {
          ASSERT_GT(s, 0.0);
          l[i * n + i] = std::sqrt(s);
        } else {
          l[i * n + j] = s / l[j * n + j];
        }
      }
    }
  }
}

TEST(TrainSvmTest, TwoPointSymmetry) {
  Matrix x(2, 1);
  x(0, 0) = 0.0;
  x(1, 0) = 1.0;
  const std::vector<int> y{0, 1};
  SvmParams p;
  p.c = 1e3;
  p.gamma_rbf = 1.0;
  const auto m = train_svm(x, y, p);
  EXPECT_NEAR(m.decision_value(std::vector<double>{0.5}), 0.0, 1e-6);
  EXPECT_LT(m.decision_value(std::vector<double>{0.0}), 0.0);
  EXPECT_GT(m.decision_value(std::vector<double>{1.0}), 0.0);
  EXPECT_LT(predict_proba_svm(m, std::vector<double>{0.0}), 0.5);
  EXPECT_GT(predict_proba_svm(m, std::vector<double>{1.0}), 0.5);
}

TEST(TrainSvmTest, MatchesQpOracleOnTinySets) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nsize(3, 6);
  std::uniform_real_distribution<double> logc(-1.0, 1.5), logg(-1.0, 0.5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = static_cast<std::size_t>(nsize(rng));
    auto d = gaussian_data(seed, n, 2, 1.0);
    SvmParams p;
    p.c = std::pow(10.0, logc(rng));
    p.gamma_rbf = std::pow(10.0, logg(rng));
    p.seed = seed;
    SvmTrainingInfo info;
    const auto m = train_svm(d.x, d.y, p, &info);

    const Matrix km = rbf_kernel_matrix(d.x, p.gamma_rbf);
    std::vector<std::vector<double>> k(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) k[i][j] = std::exp(-p.gamma_rbf * [&] {
          double sq = 0;
          for (std::size_t f = 0; f < 2; ++f) sq += (d.x(i, f) - d.x(j, f)) * (d.x(i, f) - d.x(j, f));
          return sq;
        }());
    const auto ys = signed_of(d.y);
    const auto qp = oracle::solve_dual(k, ys, p.c);
    EXPECT_NEAR(svm_dual_objective(info.alphas, ys, km), qp.objective, 1e-4) << seed;
    for (std::size_t i = 0; i < n; ++i) {
      const double fo = decision_from(d, qp.alpha, qp.bias, d.x.row(i), p.gamma_rbf);
      const double fs = m.decision_value(d.x.row(i));
      if (std::abs(fo) > 1e-3) EXPECT_EQ(fo > 0, fs > 0) << seed << " point " << i;
    }
  }
}

TEST(TrainSvmTest, KktResidualsOnHistogramFeatures) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto d = histogram_data(seed, 99, 42);
    for (const auto [c, g] : {std::pair{1.0, 10.0}, std::pair{100.0, 50.0}, std::pair{1e4, 1.0}}) {
      SvmParams p;
      p.c = c;
      p.gamma_rbf = g;
      p.seed = seed;
      SvmTrainingInfo info;
      const auto m = train_svm(d.x, d.y, p, &info);
      double balance = 0;
      for (std::size_t i = 0; i < 99; ++i) {
        const int y = d.y[i] == 1 ? 1 : -1;
        const double a = info.alphas[i];
        ASSERT_GE(a, 0.0);
        ASSERT_LE(a, c);
        balance += a * y;
        const double yf = y * m.decision_value(d.x.row(i));
        if (a == 0.0) EXPECT_GE(yf, 1 - p.tol) << "C=" << c << " i=" << i;
        else if (a == c) EXPECT_LE(yf, 1 + p.tol) << "C=" << c << " i=" << i;
        else EXPECT_LE(std::abs(yf - 1), p.tol) << "C=" << c << " i=" << i;
      }
      EXPECT_NEAR(balance, 0.0, 1e-6);
    }
  }
}

TEST(TrainSvmTest, DuplicatedPointsGiveSameDecisionFunction) {
  // Separable data and C above every multiplier: the hard-margin solution is
  // unchanged by duplication.
  const auto d = gaussian_data(7, 12, 2, 4.0);
  Data dd{Matrix(), {}};
  for (int rep = 0; rep < 2; ++rep)
    for (std::size_t i = 0; i < 12; ++i) {
      dd.x.push_row(d.x.row(i));
      dd.y.push_back(d.y[i]);
    }
  SvmParams p;
  p.c = 1e3;
  p.gamma_rbf = 0.5;
  p.tol = 1e-9;
  SvmTrainingInfo ia, ib;
  const auto a = train_svm(d.x, d.y, p, &ia);
  const auto b = train_svm(dd.x, dd.y, p, &ib);
  for (const double al : ia.alphas) ASSERT_LT(al, p.c);
  for (const double al : ib.alphas) ASSERT_LT(al, p.c);
  for (double u = -2; u <= 6; u += 0.5) {
    for (double v = -2; v <= 6; v += 0.5) {
      const std::vector<double> q{u, v};
      EXPECT_NEAR(a.decision_value(q), b.decision_value(q), 1e-6) << u << "," << v;
    }
  }
}

TEST(TrainSvmTest, SingleClassThrows) {
  const auto d = gaussian_data(1, 6, 2, 0.0);
  std::vector<int> y(6, 1);
  EXPECT_THROW(train_svm(d.x, y, SvmParams{}), ContractViolation);
}

TEST(TrainSvmTest, DeterministicForSeed) {
  const auto d = histogram_data(3, 40, 10);
  SvmParams p;
  p.c = 10;
  p.gamma_rbf = 20;
  p.seed = 9;
  SvmTrainingInfo a, b;
  train_svm(d.x, d.y, p, &a);
  train_svm(d.x, d.y, p, &b);
  EXPECT_EQ(a.alphas, b.alphas);
  EXPECT_EQ(a.bias, b.bias);
}

TEST(TrainSvmTest, UpdateCapRaisesConvergenceError) {
  const auto d = histogram_data(3, 40, 10);
  SvmParams p;
  p.c = 1e3;
  p.gamma_rbf = 20;
  p.max_updates = 3;
  EXPECT_THROW(train_svm(d.x, d.y, p), ConvergenceError);
}

TEST(PlattTest, MidpointAndMonotone) {
  const PlattScaling s{-2.0, 0.0};
  EXPECT_EQ(s(0.0), 0.5);
  double prev = 2.0;
  for (double f = -20; f <= 20; f += 0.5) {
    const double pr = PlattScaling{1.0, 0.0}(f);  // decreasing in a*f + b
    EXPECT_LE(pr, prev);
    EXPECT_GT(pr, 0.0);
    EXPECT_LT(pr, 1.0);
    prev = pr;
  }
}

TEST(PlattTest, FitPointsTheRightWay) {
  std::vector<double> f;
  std::vector<int> y;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0, 1);
  for (int i = 0; i < 100; ++i) {
    const int lab = i % 2 ? 1 : -1;
    f.push_back(lab + z(rng));
    y.push_back(lab);
  }
  const auto s = fit_platt(f, y);
  EXPECT_LT(s.a, 0.0);
  EXPECT_GT(s(2.0), 0.8);
  EXPECT_LT(s(-2.0), 0.2);
}

TEST(SvmModelTest, WidthMismatchThrows) {
  const auto d = gaussian_data(2, 6, 3, 1.0);
  const auto m = train_svm(d.x, d.y, SvmParams{});
  EXPECT_THROW(m.predict_proba(std::vector<double>{1.0}), ContractViolation);
}

TEST(SvmParamsTest, Validation) {
  SvmParams p;
  p.c = 0;
  EXPECT_THROW(p.validate(), ContractViolation);
  p = SvmParams{};
  p.gamma_rbf = INFINITY;
  EXPECT_THROW(p.validate(), ContractViolation);
}

}  // namespace
}  // namespace lungcadx
