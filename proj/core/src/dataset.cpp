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

#include "lungcadx/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "lungcadx/errors.hpp"

namespace lungcadx {

void Matrix::push_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw ContractViolation("row width " + std::to_string(values.size()) +
                            " does not match matrix width " + std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void LabeledDataset::add(std::string id, std::span<const double> values, int label) {
  if (label != 0 && label != 1) {
    throw ContractViolation("label must be 0 or 1");
  }
  if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
    throw ContractViolation("duplicate instance id '" + id + "'");
  }
  features.push_row(values);
  labels.push_back(label);
  ids.push_back(std::move(id));
}

void LabeledDataset::validate() const {
  if (features.rows() != labels.size() || ids.size() != labels.size()) {
    throw ContractViolation("dataset rows, labels and ids disagree in length");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ContractViolation("label must be 0 or 1");
    }
    if (!seen.insert(ids[i]).second) {
      throw ContractViolation("duplicate instance id '" + ids[i] + "'");
    }
  }
}

LabeledDataset LabeledDataset::sorted_by_id() const {
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  LabeledDataset out;
  for (const auto i : order) {
    out.features.push_row(features.row(i));
    out.labels.push_back(labels[i]);
    out.ids.push_back(ids[i]);
  }
  return out;
}

void write_feature_csv(const LabeledDataset& data, const std::filesystem::path& path,
                       const std::string& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  if (!provenance.empty()) {
    out << "# " << provenance << '\n';
  }
  out << "volume_id,label";
  for (std::size_t c = 0; c < data.width(); ++c) {
    out << ",f" << c;
  }
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < data.size(); ++r) {
    out << data.ids[r] << ',' << data.labels[r];
    for (const double v : data.features.row(r)) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

LabeledDataset read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  while (std::getline(in, line) && line.starts_with('#')) {
  }
  if (!line.starts_with("volume_id,label")) {
    throw FormatError(path.string() + ": missing volume_id,label header");
  }
  const auto width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 1;
  LabeledDataset data;
  std::vector<double> values;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string id;
    std::string field;
    std::getline(row, id, ',');
    std::getline(row, field, ',');
    try {
      const int label = std::stoi(field);
      values.clear();
      while (std::getline(row, field, ',')) {
        values.push_back(std::stod(field));
      }
      if (values.size() != width) {
        throw FormatError("wrong column count");
      }
      data.add(id, values, label);
    } catch (const std::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return data;
}

std::string read_provenance_line(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  if (in && std::getline(in, line) && line.starts_with("# ")) {
    return line.substr(2);
  }
  return {};
}

}  // namespace lungcadx
