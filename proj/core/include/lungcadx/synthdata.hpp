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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lungcadx/volume.hpp"

namespace lungcadx {

struct SynthConfig {
  int n_per_class = 20;
  int side = kDefaultCubeSide;
  int radius_a = 1;  // box-smoothing radius for label 0
  int radius_b = 3;  // box-smoothing radius for label 1
  double amplitude = 100.0;
  std::uint64_t seed = 0;
  // Largest LBP radius the volumes must support; bounds the minimum side.
  int max_lbp_radius = 8;

  // Throws ContractViolation on equal radii, n_per_class < 1 or a side below
  // 2 * (max_lbp_radius + 1) + 1.
  void validate() const;
};

struct SynthInstance {
  NoduleRef nodule;
  Volume volume;
};

// Per instance: seeded Gaussian white noise on a side^3 grid, box-smoothed
// with the class radius, rescaled to unit variance, times amplitude. Class A
// (label 0) instances come first; centers sit at side/2. Deterministic in the
// config.
std::vector<SynthInstance> generate_dataset(const SynthConfig& cfg);

// Box filter of radius r along all three axes; windows shrink at the borders.
Volume box_smooth(const Volume& v, int radius);

// Writes <dir>/volumes/<id>/{meta.json,data.raw} and, last, <dir>/nodules.csv
// through a temporary file and rename. Returns the manifest path.
std::filesystem::path write_dataset(const std::vector<SynthInstance>& instances,
                                    const std::filesystem::path& dir);

// <dataset_dir>/volumes/<volume_id>.
std::filesystem::path volume_dir(const std::filesystem::path& dataset_dir,
                                 const std::string& volume_id);

}  // namespace lungcadx
