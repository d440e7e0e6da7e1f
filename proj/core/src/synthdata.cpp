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

#include "lungcadx/synthdata.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "lungcadx/errors.hpp"
#include "lungcadx/random.hpp"

namespace lungcadx {
namespace {

// Running-sum box filter along one axis with stride `stride` over lines of
// length `len`.
void smooth_axis(std::vector<float>& data, const Dims& dims, int axis, int radius) {
  const int len = dims[axis];
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? static_cast<std::size_t>(dims[0])
                                                       : static_cast<std::size_t>(dims[0]) * dims[1];
  std::vector<double> line(len);
  std::vector<double> prefix(len + 1);
  const std::size_t total = data.size();
  for (std::size_t start = 0; start < total; ++start) {
    // `start` must be the first element of a line along `axis`.
    if ((start / stride) % len != 0) {
      continue;
    }
    for (int t = 0; t < len; ++t) {
      line[t] = data[start + t * stride];
    }
    prefix[0] = 0.0;
    for (int t = 0; t < len; ++t) {
      prefix[t + 1] = prefix[t] + line[t];
    }
    for (int t = 0; t < len; ++t) {
      const int lo = std::max(0, t - radius);
      const int hi = std::min(len - 1, t + radius);
      data[start + t * stride] =
          static_cast<float>((prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1));
    }
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (n_per_class < 1) {
    throw ContractViolation("n_per_class must be >= 1");
  }
  if (radius_a == radius_b || radius_a < 0 || radius_b < 0) {
    throw ContractViolation("class smoothing radii must be non-negative and differ");
  }
  if (side < 2 * (max_lbp_radius + 1) + 1) {
    throw ContractViolation("side " + std::to_string(side) + " too small for LBP radius " +
                            std::to_string(max_lbp_radius));
  }
  if (!std::isfinite(amplitude) || amplitude <= 0.0) {
    throw ContractViolation("amplitude must be finite and > 0");
  }
}

Volume box_smooth(const Volume& v, int radius) {
  if (radius <= 0) {
    return v;
  }
  std::vector<float> data(v.data().begin(), v.data().end());
  for (int axis = 0; axis < 3; ++axis) {
    smooth_axis(data, v.dims(), axis, radius);
  }
  return Volume(v.dims(), v.spacing(), std::move(data));
}

std::vector<SynthInstance> generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  std::vector<SynthInstance> out;
  const int n = 2 * cfg.n_per_class;
  out.reserve(n);
  const Dims dims{cfg.side, cfg.side, cfg.side};
  for (int idx = 0; idx < n; ++idx) {
    const int label = idx < cfg.n_per_class ? 0 : 1;
    const int radius = label == 0 ? cfg.radius_a : cfg.radius_b;

    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(idx)));
    std::normal_distribution<double> normal(0.0, 1.0);
    Volume noise(dims, Spacing{1.0, 1.0, 1.0});
    for (auto& x : noise.mutable_data()) {
      x = static_cast<float>(normal(rng));
    }
    Volume smooth = box_smooth(noise, radius);
    // Interior variance of a box mean of (2r+1)^3 unit-variance samples.
    const double gain = cfg.amplitude * std::pow(2.0 * radius + 1.0, 1.5);
    for (auto& x : smooth.mutable_data()) {
      x = static_cast<float>(x * gain);
    }

    char id[32];
    std::snprintf(id, sizeof(id), "syn_%03d", idx);
    NoduleRef ref{id, {cfg.side / 2, cfg.side / 2, cfg.side / 2}, label};
    out.push_back({std::move(ref), std::move(smooth)});
  }
  return out;
}

std::filesystem::path volume_dir(const std::filesystem::path& dataset_dir,
                                 const std::string& volume_id) {
  return dataset_dir / "volumes" / volume_id;
}

std::filesystem::path write_dataset(const std::vector<SynthInstance>& instances,
                                    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  std::vector<NoduleRef> refs;
  refs.reserve(instances.size());
  for (const auto& inst : instances) {
    write_volume(inst.volume, volume_dir(dir, inst.nodule.volume_id));
    refs.push_back(inst.nodule);
  }
  const auto manifest = dir / "nodules.csv";
  const auto tmp = dir / "nodules.csv.tmp";
  write_manifest(refs, tmp);
  std::filesystem::rename(tmp, manifest, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot publish " + manifest.string() + ": " + ec.message());
  }
  return manifest;
}

}  // namespace lungcadx
