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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lungcadx/dataset.hpp"

namespace lungcadx {

struct GbtParams {
  // Searched alongside learning_rate but inert: shrinkage is learning_rate.
  double eta = 0.3;
  int max_depth = 6;
  double min_child_weight = 1.0;  // minimum hessian sum per child
  double gamma = 0.0;             // minimum split gain
  double learning_rate = 0.1;     // effective shrinkage
  double lambda = 1.0;            // L2 leaf regularization
  int num_rounds = 100;

  // Throws ContractViolation on non-finite fields, max_depth < 1 or num_rounds < 1.
  void validate() const;
};

struct GradHess {
  double g;
  double h;
};

// Binary logistic loss derivatives at `margin`: p = sigmoid(margin),
// g = p - label, h = p (1 - p).
GradHess logistic_grad_hess(int label, double margin);

// -G / (H + lambda). Throws DegenerateLeafError when H + lambda == 0.
double leaf_weight(double grad_sum, double hess_sum, double lambda);

// 1/2 [GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)] - gamma.
double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma);

struct SplitDecision {
  std::size_t feature = 0;
  double threshold = 0.0;  // x[feature] < threshold goes left
  double gain = 0.0;
};

// Exact greedy split over `instances` (row indices into x). Candidates are
// midpoints between adjacent distinct values; both children need hessian sum
// >= min_child_weight and the gain must be > 0. Ties go to the lowest feature,
// then the lowest threshold.
std::optional<SplitDecision> best_split(std::span<const std::size_t> instances, const Matrix& x,
                                        std::span<const double> g, std::span<const double> h,
                                        const GbtParams& params);

// Flattened regression tree. Node 0 is the root.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaf value

  bool is_leaf() const noexcept { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
};

class GbtModel {
 public:
  GbtModel() = default;
  GbtModel(GbtParams params, std::size_t width, std::vector<RegressionTree> trees,
           double base_margin = 0.0);

  const GbtParams& params() const noexcept { return params_; }
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  std::size_t width() const noexcept { return width_; }
  double base_margin() const noexcept { return base_margin_; }
  double shrinkage() const noexcept { return params_.learning_rate; }

  // base_margin + shrinkage * sum of tree outputs. Throws ContractViolation on width mismatch.
  double margin(std::span<const double> x) const;
  double predict_proba(std::span<const double> x) const;

  // {"base_margin":..,"shrinkage":..,"trees":[{node}...]}; nodes nest as
  // {"feature","threshold","left","right"} or {"weight"}.
  std::string dump_json() const;

 private:
  GbtParams params_;
  std::size_t width_ = 0;
  std::vector<RegressionTree> trees_;
  double base_margin_ = 0.0;
};

// Training log loss after each round; filled when passed to train_gbt.
struct GbtTrace {
  std::vector<double> log_loss;
};

// Additive training from base margin 0: each round computes (g, h) at the
// current margins, grows one depth-first tree with best_split, sets leaf
// weights and adds shrinkage * tree output. Throws ContractViolation on an
// empty dataset.
GbtModel train_gbt(const Matrix& x, std::span<const int> labels, const GbtParams& params,
                   GbtTrace* trace = nullptr);
GbtModel train_gbt(const LabeledDataset& data, const GbtParams& params,
                   GbtTrace* trace = nullptr);

double predict_proba_gbt(const GbtModel& model, std::span<const double> x);

}  // namespace lungcadx
