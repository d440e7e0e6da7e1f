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

#pragma once

// Projected-gradient ascent on the SVM dual
//   max sum(a) - 1/2 a'Qa,  0 <= a <= C,  sum(a y) = 0,
// projecting onto the feasible set by bisection on the hyperplane multiplier.

#include <algorithm>
#include <cmath>
#include <vector>

namespace lungcadx::oracle {

struct QpSolution {
  std::vector<double> alpha;
  double objective;
  double bias;
};

inline std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y,
                                   double c) {
  auto at = [&](double mu) {
    std::vector<double> a(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::clamp(v[i] - mu * y[i], 0.0, c);
    return a;
  };
  auto residual = [&](double mu) {
    double s = 0;
    const auto a = at(mu);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * y[i];
    return s;
  };
  double lo = -1e3 - c, hi = 1e3 + c;
  for (const double x : v) {
    lo = std::min(lo, -std::abs(x) - c - 1);
    hi = std::max(hi, std::abs(x) + c + 1);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = (lo + hi) / 2;
    (residual(mid) > 0 ? lo : hi) = mid;
  }
  return at((lo + hi) / 2);
}

inline QpSolution solve_dual(const std::vector<std::vector<double>>& k, const std::vector<int>& y,
                             double c, int iterations = 200000) {
  const std::size_t n = y.size();
  double trace = 0;
  for (std::size_t i = 0; i < n; ++i) trace += k[i][i];
  const double step = 1.0 / trace;
  std::vector<double> a(n, 0.0);
  auto objective = [&](const std::vector<double>& al) {
    double lin = 0, quad = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lin += al[i];
      for (std::size_t j = 0; j < n; ++j) quad += al[i] * al[j] * y[i] * y[j] * k[i][j];
    }
    return lin - quad / 2;
  };
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      double qa = 0;
      for (std::size_t j = 0; j < n; ++j) qa += y[i] * y[j] * k[i][j] * a[j];
      v[i] = a[i] + step * (1 - qa);
    }
    auto next = project(v, y, c);
    double moved = 0;
    for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(next[i] - a[i]));
    a = std::move(next);
    if (moved < 1e-15) break;
  }
  // Bias: average over free multipliers, else the middle of the feasible range.
  const double eps = 1e-7 * std::max(1.0, c);
  double sum = 0, lower = -1e300, upper = 1e300;
  int free = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = 0;
    for (std::size_t j = 0; j < n; ++j) f += a[j] * y[j] * k[j][i];
    const double target = y[i] - f;
    if (a[i] > eps && a[i] < c - eps) {
      sum += target;
      ++free;
    } else if ((a[i] <= eps) == (y[i] > 0)) {
      lower = std::max(lower, target);
    } else {
      upper = std::min(upper, target);
    }
  }
  double b = free > 0 ? sum / free : (lower + upper) / 2;
  if (free == 0 && lower < -1e299) b = upper;
  if (free == 0 && upper > 1e299) b = lower;
  return {a, objective(a), b};
}

}  // namespace lungcadx::oracle
