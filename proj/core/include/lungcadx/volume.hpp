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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lungcadx {

// Intensity written outside the source grid by crop_cube (air, in HU).
inline constexpr float kPadValue = -1024.0f;

// Default crop side in voxels.
inline constexpr int kDefaultCubeSide = 64;

using Dims = std::array<int, 3>;
using Spacing = std::array<double, 3>;
using VoxelIndex = std::array<int, 3>;

// 3D scalar raster with physical voxel spacing in mm. Voxel (i, j, k) sits at
// physical (i*sx, j*sy, k*sz); storage is x-fastest, then y, then z.
class Volume {
 public:
  Volume() = default;
  // Throws ContractViolation if dims are not positive, spacing is not finite
  // and positive, or data.size() != nx*ny*nz.
  Volume(Dims dims, Spacing spacing, std::vector<float> data);
  // Constant-filled volume.
  Volume(Dims dims, Spacing spacing, float fill = 0.0f);

  const Dims& dims() const noexcept { return dims_; }
  const Spacing& spacing() const noexcept { return spacing_; }
  int nx() const noexcept { return dims_[0]; }
  int ny() const noexcept { return dims_[1]; }
  int nz() const noexcept { return dims_[2]; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> mutable_data() noexcept { return data_; }

  std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * k);
  }
  float at(int i, int j, int k) const noexcept { return data_[index(i, j, k)]; }
  float& at(int i, int j, int k) noexcept { return data_[index(i, j, k)]; }

  bool contains(int i, int j, int k) const noexcept {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_[0] && j < dims_[1] && k < dims_[2];
  }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Dims dims_{0, 0, 0};
  Spacing spacing_{1.0, 1.0, 1.0};
  std::vector<float> data_;
};

struct NoduleRef {
  std::string volume_id;
  VoxelIndex center{0, 0, 0};
  int label = 0;  // 0 = benign, 1 = cancer
};

// Reads a volume container directory (meta.json + data.raw).
// Throws IoError (missing/unreadable file), FormatError (bad metadata) or
// SizeMismatchError (payload length != nx*ny*nz*4).
Volume load_volume(const std::filesystem::path& dir);

// Writes the container; the directory is created if needed.
void write_volume(const Volume& v, const std::filesystem::path& dir);

// Trilinear resampling onto a 1 mm isotropic grid. Output dims are
// round-half-up(n*s) per axis (at least 1). Samples falling outside the
// source grid clamp to the nearest source voxel.
Volume resample_isotropic(const Volume& v);

// side^3 cube whose voxel (i,j,k) reads source (c - side/2 + i, ...);
// out-of-grid reads yield kPadValue.
Volume crop_cube(const Volume& v, const VoxelIndex& center, int side = kDefaultCubeSide);

// Nodule manifest CSV: header `volume_id,cx,cy,cz,label`.
std::vector<NoduleRef> read_manifest(const std::filesystem::path& csv_path);
void write_manifest(const std::vector<NoduleRef>& nodules,
                    const std::filesystem::path& csv_path);

}  // namespace lungcadx
