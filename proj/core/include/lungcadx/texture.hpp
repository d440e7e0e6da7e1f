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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lungcadx/volume.hpp"

namespace lungcadx {

struct LbpParams {
  double radius = 7.0;  // R, in voxels
  int samples = 40;     // P

  // Histogram bins per plane: codes 0..P plus the non-uniform bin P+1.
  int bins() const noexcept { return samples + 2; }
  // Distance from a plane border a center must keep: ceil(R) + 1.
  int margin() const;

  friend bool operator==(const LbpParams&, const LbpParams&) = default;
};

// Read-only strided 2D view. (col, row) addresses data[col*col_stride + row*row_stride].
struct PlaneView {
  const float* data = nullptr;
  int width = 0;
  int height = 0;
  std::ptrdiff_t col_stride = 1;
  std::ptrdiff_t row_stride = 0;

  float at(int col, int row) const noexcept { return data[col * col_stride + row * row_stride]; }

  static PlaneView dense(std::span<const float> pixels, int width, int height);
};

// Bilinear interpolation at (px, py); exact at integer coordinates.
// Throws ContractViolation outside [0, W-1] x [0, H-1].
double bilinear_sample(const PlaneView& plane, double px, double py);

// Rotation-invariant uniform code: popcount when the circular pattern has at
// most two 0/1 transitions, otherwise P+1. bits.size() is P.
int riu2_encode(std::span<const std::uint8_t> bits);

// riu2 LBP code at `center` = (col, row). Neighbor i sits at angle 2*pi*i/P,
// counter-clockwise from (+R, 0): (col + R cos, row - R sin). s(d) = 1 iff d >= 0.
// Throws ContractViolation if center is closer than margin() to a border.
int lbp_code(const PlaneView& plane, std::array<int, 2> center, const LbpParams& params);

// Concatenated per-plane histograms in the order XY, XZ, YZ.
struct LbpTopCounts {
  LbpParams params;
  std::vector<std::uint64_t> counts;  // 3 * bins()
};

// Integer LBP-TOP bin counts over every voxel far enough from the borders of
// the plane being coded. Throws ContractViolation when the cube is too small.
LbpTopCounts lbp_top_counts(const Volume& v, const LbpParams& params);

struct FeatureVector {
  LbpParams params;
  std::vector<double> values;  // 3 * bins(), each block L1-normalized
};

FeatureVector normalize(const LbpTopCounts& counts);

// LBP-TOP feature vector: lbp_top_counts followed by per-plane L1 normalization.
FeatureVector lbp_top(const Volume& v, const LbpParams& params);

}  // namespace lungcadx
