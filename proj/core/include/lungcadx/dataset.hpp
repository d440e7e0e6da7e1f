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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lungcadx {

// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

  // Appends a row; the first row fixes the width.
  void push_row(std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Feature rows with binary labels and unique string ids.
struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> ids;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t width() const noexcept { return features.cols(); }

  // Throws ContractViolation for a width mismatch, duplicate id or non-binary label.
  void add(std::string id, std::span<const double> values, int label);

  // Throws ContractViolation if the invariants do not hold.
  void validate() const;

  // Copy with instances reordered by id.
  LabeledDataset sorted_by_id() const;
};

// Feature CSV: optional `#` provenance lines, then header
// `volume_id,label,f0,...,f{k-1}`, one row per instance, values printed with
// 9 significant digits.
void write_feature_csv(const LabeledDataset& data, const std::filesystem::path& path,
                       const std::string& provenance = {});
LabeledDataset read_feature_csv(const std::filesystem::path& path);

// First `#` line of a CSV without the leading "# ", or empty.
std::string read_provenance_line(const std::filesystem::path& path);

}  // namespace lungcadx
