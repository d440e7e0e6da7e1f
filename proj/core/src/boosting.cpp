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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "lungcadx/errors.hpp"

namespace lungcadx {
namespace {

double sigmoid(double m) {
  if (m >= 0.0) {
    return 1.0 / (1.0 + std::exp(-m));
  }
  const double e = std::exp(m);
  return e / (1.0 + e);
}

// Logistic loss from a margin without forming the probability.
double margin_log_loss(int label, double m) {
  const double z = label == 1 ? -m : m;
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

struct ScanTotals {
  double g;
  double h;
};

// Scans one feature's instances in ascending value order and updates `best`
// when a strictly better admissible split appears.
template <typename ValueOf>
void scan_feature(std::span<const std::size_t> sorted, ValueOf value_of, std::size_t feature,
                  std::span<const double> g, std::span<const double> h, ScanTotals total,
                  const GbtParams& params, std::optional<SplitDecision>& best) {
  double gl = 0.0;
  double hl = 0.0;
  for (std::size_t pos = 0; pos + 1 < sorted.size(); ++pos) {
    const std::size_t i = sorted[pos];
    gl += g[i];
    hl += h[i];
    const double v = value_of(i);
    const double next = value_of(sorted[pos + 1]);
    if (!(v < next)) {
      continue;
    }
    const double hr = total.h - hl;
    if (hl < params.min_child_weight || hr < params.min_child_weight) {
      continue;
    }
    const double gain = split_gain(gl, hl, total.g - gl, hr, params.lambda, params.gamma);
    if (gain > 0.0 && (!best || gain > best->gain)) {
      double threshold = 0.5 * (v + next);
      if (!(threshold > v)) {
        threshold = next;
      }
      best = SplitDecision{feature, threshold, gain};
    }
  }
}

// Depth-first tree builder over per-feature presorted index lists. A node
// owns the same range [begin, end) in every feature's list; splitting
// stable-partitions each list so children stay sorted.
class TreeGrower {
 public:
  TreeGrower(const Matrix& x, const std::vector<std::size_t>& presorted, const GbtParams& params)
      : x_(x),
        n_(x.rows()),
        d_(x.cols()),
        params_(params),
        presorted_(presorted),
        goes_left_(n_, 0),
        scratch_(n_) {}

  RegressionTree grow(std::span<const double> g, std::span<const double> h,
                      std::vector<double>& leaf_values) {
    order_ = presorted_;
    g_ = g;
    h_ = h;
    leaf_values_ = &leaf_values;
    RegressionTree tree;
    tree_ = &tree;
    build(0, n_, 0);
    return tree;
  }

 private:
  std::span<const std::size_t> slice(std::size_t f, std::size_t begin, std::size_t end) const {
    return {order_.data() + f * n_ + begin, end - begin};
  }

  int build(std::size_t begin, std::size_t end, int depth) {
    ScanTotals total{0.0, 0.0};
    for (const auto i : slice(0, begin, end)) {
      total.g += g_[i];
      total.h += h_[i];
    }
    const int node = static_cast<int>(tree_->nodes.size());
    tree_->nodes.emplace_back();

    std::optional<SplitDecision> best;
    if (depth < params_.max_depth && end - begin >= 2 &&
        total.h >= 2.0 * params_.min_child_weight) {
      for (std::size_t f = 0; f < d_; ++f) {
        scan_feature(
            slice(f, begin, end), [&](std::size_t i) { return x_(i, f); }, f, g_, h_, total,
            params_, best);
      }
    }

    if (!best) {
      const double w = leaf_weight(total.g, total.h, params_.lambda);
      tree_->nodes[node].weight = w;
      for (const auto i : slice(0, begin, end)) {
        (*leaf_values_)[i] = w;
      }
      return node;
    }

    std::size_t n_left = 0;
    for (const auto i : slice(0, begin, end)) {
      goes_left_[i] = x_(i, best->feature) < best->threshold ? 1 : 0;
      n_left += goes_left_[i];
    }
    for (std::size_t f = 0; f < d_; ++f) {
      std::size_t* list = order_.data() + f * n_;
      std::size_t l = begin;
      std::size_t r = 0;
      for (std::size_t p = begin; p < end; ++p) {
        const std::size_t i = list[p];
        if (goes_left_[i]) {
          list[l++] = i;
        } else {
          scratch_[r++] = i;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r), list + l);
    }

    const int left = build(begin, begin + n_left, depth + 1);
    const int right = build(begin + n_left, end, depth + 1);
    auto& nd = tree_->nodes[node];
    nd.feature = static_cast<int>(best->feature);
    nd.threshold = best->threshold;
    nd.left = left;
    nd.right = right;
    return node;
  }

  const Matrix& x_;
  std::size_t n_;
  std::size_t d_;
  const GbtParams& params_;
  const std::vector<std::size_t>& presorted_;
  std::vector<std::size_t> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::size_t> scratch_;
  std::span<const double> g_;
  std::span<const double> h_;
  std::vector<double>* leaf_values_ = nullptr;
  RegressionTree* tree_ = nullptr;
};

void sort_by_feature(std::vector<std::size_t>& idx, const Matrix& x, std::size_t f) {
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
}

nlohmann::json node_json(const RegressionTree& tree, int node) {
  const auto& nd = tree.nodes[node];
  if (nd.is_leaf()) {
    return {{"weight", nd.weight}};
  }
  return {{"feature", nd.feature},
          {"threshold", nd.threshold},
          {"left", node_json(tree, nd.left)},
          {"right", node_json(tree, nd.right)}};
}

}  // namespace

void GbtParams::validate() const {
  for (const double v : {eta, min_child_weight, gamma, learning_rate, lambda}) {
    if (!std::isfinite(v)) {
      throw ContractViolation("GBT parameters must be finite");
    }
  }
  if (max_depth < 1 || num_rounds < 1) {
    throw ContractViolation("GBT requires max_depth >= 1 and num_rounds >= 1");
  }
  if (min_child_weight < 0.0 || gamma < 0.0 || lambda < 0.0) {
    throw ContractViolation("min_child_weight, gamma and lambda must be >= 0");
  }
}

GradHess logistic_grad_hess(int label, double margin) {
  const double p = sigmoid(margin);
  return {p - label, p * (1.0 - p)};
}

double leaf_weight(double grad_sum, double hess_sum, double lambda) {
  const double denom = hess_sum + lambda;
  if (!(denom > 0.0)) {
    throw DegenerateLeafError("leaf with H + lambda == 0");
  }
  return -grad_sum / denom;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
  const double g = gl + gr;
  const double h = hl + hr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma;
}

std::optional<SplitDecision> best_split(std::span<const std::size_t> instances, const Matrix& x,
                                        std::span<const double> g, std::span<const double> h,
                                        const GbtParams& params) {
  ScanTotals total{0.0, 0.0};
  for (const auto i : instances) {
    total.g += g[i];
    total.h += h[i];
  }
  std::optional<SplitDecision> best;
  std::vector<std::size_t> sorted(instances.begin(), instances.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<std::size_t> idx = sorted;
    sort_by_feature(idx, x, f);
    scan_feature(
        idx, [&](std::size_t i) { return x(i, f); }, f, g, h, total, params, best);
  }
  return best;
}

double RegressionTree::predict(std::span<const double> x) const {
  int node = 0;
  while (!nodes[node].is_leaf()) {
    const auto& nd = nodes[node];
    node = x[nd.feature] < nd.threshold ? nd.left : nd.right;
  }
  return nodes[node].weight;
}

int RegressionTree::depth() const {
  std::vector<int> depth_of(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (!nodes[n].is_leaf()) {
      depth_of[nodes[n].left] = depth_of[n] + 1;
      depth_of[nodes[n].right] = depth_of[n] + 1;
    }
    deepest = std::max(deepest, depth_of[n]);
  }
  return deepest;
}

GbtModel::GbtModel(GbtParams params, std::size_t width, std::vector<RegressionTree> trees,
                   double base_margin)
    : params_(params), width_(width), trees_(std::move(trees)), base_margin_(base_margin) {}

double GbtModel::margin(std::span<const double> x) const {
  if (x.size() != width_) {
    throw ContractViolation("feature width " + std::to_string(x.size()) +
                            " does not match model width " + std::to_string(width_));
  }
  double sum = 0.0;
  for (const auto& tree : trees_) {
    sum += shrinkage() * tree.predict(x);
  }
  return base_margin_ + sum;
}

double GbtModel::predict_proba(std::span<const double> x) const {
  return sigmoid(margin(x));
}

std::string GbtModel::dump_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    trees.push_back(node_json(t, 0));
  }
  nlohmann::json out{{"base_margin", base_margin_}, {"shrinkage", shrinkage()}, {"trees", trees}};
  return out.dump();
}

GbtModel train_gbt(const Matrix& x, std::span<const int> labels, const GbtParams& params,
                   GbtTrace* trace) {
  params.validate();
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n == 0) {
    throw ContractViolation("train_gbt on an empty dataset");
  }
  if (labels.size() != n) {
    throw ContractViolation("label count does not match feature rows");
  }

  std::vector<std::size_t> presorted(n * d);
  {
    std::vector<std::size_t> idx(n);
    for (std::size_t f = 0; f < d; ++f) {
      std::iota(idx.begin(), idx.end(), 0);
      sort_by_feature(idx, x, f);
      std::copy(idx.begin(), idx.end(), presorted.begin() + static_cast<std::ptrdiff_t>(f * n));
    }
  }

  const double base_margin = 0.0;
  const double shrinkage = params.learning_rate;
  std::vector<double> margins(n, base_margin);
  std::vector<double> g(n);
  std::vector<double> h(n);
  std::vector<double> leaf_values(n);
  std::vector<RegressionTree> trees;
  trees.reserve(params.num_rounds);
  TreeGrower grower(x, presorted, params);

  for (int round = 0; round < params.num_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto gh = logistic_grad_hess(labels[i], margins[i]);
      g[i] = gh.g;
      h[i] = gh.h;
    }
    trees.push_back(d == 0 ? RegressionTree{{TreeNode{}}} : grower.grow(g, h, leaf_values));
    if (d == 0) {
      double gs = 0.0;
      double hs = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        gs += g[i];
        hs += h[i];
      }
      trees.back().nodes[0].weight = leaf_weight(gs, hs, params.lambda);
      std::fill(leaf_values.begin(), leaf_values.end(), trees.back().nodes[0].weight);
    }
    for (std::size_t i = 0; i < n; ++i) {
      margins[i] += shrinkage * leaf_values[i];
    }
    if (trace != nullptr) {
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        loss += margin_log_loss(labels[i], margins[i]);
      }
      trace->log_loss.push_back(loss / static_cast<double>(n));
    }
  }
  return GbtModel(params, d, std::move(trees), base_margin);
}

GbtModel train_gbt(const LabeledDataset& data, const GbtParams& params, GbtTrace* trace) {
  return train_gbt(data.features, data.labels, params, trace);
}

double predict_proba_gbt(const GbtModel& model, std::span<const double> x) {
  return model.predict_proba(x);
}

}  // namespace lungcadx
