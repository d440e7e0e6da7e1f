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
#include <filesystem>
#include <string>
#include <vector>

#include "lungcadx/evaluation.hpp"
#include "lungcadx/hpo.hpp"

namespace lungcadx::cli {

// JSON run manifest. Relative paths resolve against the manifest's directory.
//
//   {
//     "dataset": "data",                      // directory holding nodules.csv
//     "output": "out",
//     "classifiers": ["svm", "xgboost"],
//     "methods": ["random", "tpe"],
//     "budgets": [10, 100, 200, 1000],
//     "n_repeats": 10,
//     "base_seed": 0,
//     "cube_side": 64,
//     "features": [[7, 40], [7, 48], [8, 40], [8, 48]],
//     "threads": 1,                           // LOOCV fold workers per cell
//     "gbt": {"lambda": 1.0, "num_rounds": 100},
//     "svm": {"tol": 1e-3, "max_passes": 10, "max_updates": 1000000},
//     "tpe": {"quantile_gamma": 0.25, "n_startup": 10, "n_candidates": 24}
//   }
struct RunManifest {
  std::filesystem::path dataset;
  std::filesystem::path output = "out";
  std::vector<ClassifierKind> classifiers{ClassifierKind::kSvm, ClassifierKind::kXgboost};
  std::vector<SearchMethod> methods{SearchMethod::kRandom, SearchMethod::kTpe};
  std::vector<std::size_t> budgets{10, 100, 200, 1000};
  std::size_t n_repeats = 10;
  std::uint64_t base_seed = 0;
  int cube_side = 64;
  std::vector<FeatureKey> features{{7, 40}, {7, 48}, {8, 40}, {8, 48}};
  std::size_t threads = 1;
  ModelDefaults defaults;
  TpeConfig tpe;

  // Throws FormatError on unknown keys, wrong types or invalid values.
  static RunManifest parse(const std::string& json_text,
                           const std::filesystem::path& base_dir = {});
  static RunManifest load(const std::filesystem::path& path);

  // Canonical JSON used for provenance hashing.
  std::string canonical_json() const;
};

}  // namespace lungcadx::cli
