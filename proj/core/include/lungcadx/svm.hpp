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
#include <cstdint>
#include <span>
#include <vector>

#include "lungcadx/dataset.hpp"

namespace lungcadx {

struct SvmParams {
  double c = 1.0;
  double gamma_rbf = 1.0;
  double tol = 1e-3;             // KKT tolerance
  int max_passes = 10;           // consecutive sweeps without an update before stopping
  std::int64_t max_updates = 1'000'000;  // hard cap on successful pair updates
  std::uint64_t seed = 0;        // second-index selection

  // Throws ContractViolation unless C and gamma_rbf are finite and > 0.
  void validate() const;
};

// exp(-gamma * ||x - z||^2). Throws ContractViolation on a length mismatch.
double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma_rbf);

// P(y = 1 | f) = 1 / (1 + exp(a f + b)).
struct PlattScaling {
  double a = 0.0;
  double b = 0.0;

  double operator()(double decision) const;
};

// Platt sigmoid fitted by Newton's method with backtracking on smoothed
// targets (N+ + 1)/(N+ + 2) and 1/(N- + 2). labels are +-1.
PlattScaling fit_platt(std::span<const double> decision_values, std::span<const int> signed_labels);

class SvmModel {
 public:
  SvmModel() = default;
  SvmModel(SvmParams params, Matrix support_vectors, std::vector<double> alphas,
           std::vector<int> signed_labels, double bias, PlattScaling platt);

  const SvmParams& params() const noexcept { return params_; }
  const Matrix& support_vectors() const noexcept { return support_vectors_; }
  const std::vector<double>& alphas() const noexcept { return alphas_; }
  const std::vector<int>& signed_labels() const noexcept { return signed_labels_; }
  double bias() const noexcept { return bias_; }
  const PlattScaling& platt() const noexcept { return platt_; }
  std::size_t width() const noexcept { return support_vectors_.cols(); }

  // sum_i alpha_i y_i K(x_i, x) + b. Throws ContractViolation on width mismatch.
  double decision_value(std::span<const double> x) const;
  double predict_proba(std::span<const double> x) const;

 private:
  SvmParams params_;
  Matrix support_vectors_;
  std::vector<double> alphas_;
  std::vector<int> signed_labels_;
  double bias_ = 0.0;
  PlattScaling platt_;
};

// Full dual solution for diagnostics; alphas align with the training rows.
struct SvmTrainingInfo {
  std::vector<double> alphas;
  double bias = 0.0;
  std::int64_t updates = 0;
  int sweeps = 0;
};

// Soft-margin RBF SVM by SMO over a precomputed kernel matrix, followed by a
// Platt fit on the training decision values. labels are 0/1 and mapped to
// -1/+1. Throws ContractViolation for single-class data and
// ConvergenceError when max_updates is exhausted.
SvmModel train_svm(const Matrix& x, std::span<const int> labels, const SvmParams& params,
                   SvmTrainingInfo* info = nullptr);
SvmModel train_svm(const LabeledDataset& data, const SvmParams& params,
                   SvmTrainingInfo* info = nullptr);

double predict_proba_svm(const SvmModel& model, std::span<const double> x);

// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double svm_dual_objective(std::span<const double> alphas, std::span<const int> signed_labels,
                          const Matrix& kernel);

Matrix rbf_kernel_matrix(const Matrix& x, double gamma_rbf);

}  // namespace lungcadx
