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

#include "lungcadx/texture.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "lungcadx/errors.hpp"

namespace lungcadx {
namespace {

// Bilinear tap relative to an integer center: four corner offsets into the
// flat buffer plus the fractional weights.
struct Tap {
  std::ptrdiff_t o00;
  std::ptrdiff_t o10;
  std::ptrdiff_t o01;
  std::ptrdiff_t o11;
  double wx;
  double wy;
};

std::array<double, 2> neighbor_offset(const LbpParams& params, int i) {
  const double angle = 2.0 * std::numbers::pi * i / params.samples;
  return {params.radius * std::cos(angle), -params.radius * std::sin(angle)};
}

std::vector<Tap> make_taps(const LbpParams& params, std::ptrdiff_t col_stride,
                           std::ptrdiff_t row_stride) {
  std::vector<Tap> taps;
  taps.reserve(params.samples);
  for (int i = 0; i < params.samples; ++i) {
    const auto [dx, dy] = neighbor_offset(params, i);
    const auto fx = static_cast<std::ptrdiff_t>(std::floor(dx));
    const auto fy = static_cast<std::ptrdiff_t>(std::floor(dy));
    const std::ptrdiff_t base = fx * col_stride + fy * row_stride;
    taps.push_back({base, base + col_stride, base + row_stride, base + col_stride + row_stride,
                    dx - static_cast<double>(fx), dy - static_cast<double>(fy)});
  }
  return taps;
}

inline double sample_tap(const float* center, const Tap& t) {
  const double a = center[t.o00];
  const double b = center[t.o10];
  const double c = center[t.o01];
  const double d = center[t.o11];
  const double top = a + t.wx * (b - a);
  const double bottom = c + t.wx * (d - c);
  return top + t.wy * (bottom - top);
}

// Code for a pattern held as a bit mask (bit i = s(d_i)), P <= 64.
inline int riu2_from_mask(std::uint64_t mask, int samples) {
  const std::uint64_t full = samples == 64 ? ~0ULL : ((1ULL << samples) - 1);
  const std::uint64_t rotated = ((mask >> 1) | ((mask & 1ULL) << (samples - 1))) & full;
  const int transitions = std::popcount(mask ^ rotated);
  return transitions <= 2 ? std::popcount(mask) : samples + 1;
}

void validate_params(const LbpParams& params) {
  if (!(params.radius >= 1.0) || !std::isfinite(params.radius) || params.samples < 4) {
    throw ContractViolation("LBP parameters require R >= 1 and P >= 4");
  }
}

}  // namespace

int LbpParams::margin() const {
  return static_cast<int>(std::ceil(radius)) + 1;
}

PlaneView PlaneView::dense(std::span<const float> pixels, int width, int height) {
  if (width <= 0 || height <= 0 ||
      pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ContractViolation("plane size does not match width*height");
  }
  return PlaneView{pixels.data(), width, height, 1, width};
}

double bilinear_sample(const PlaneView& plane, double px, double py) {
  if (plane.data == nullptr || plane.width <= 0 || plane.height <= 0) {
    throw ContractViolation("bilinear_sample on an empty plane");
  }
  if (!(px >= 0.0 && py >= 0.0 && px <= plane.width - 1 && py <= plane.height - 1)) {
    throw ContractViolation("bilinear_sample coordinates outside the plane");
  }
  const int x0 = static_cast<int>(std::floor(px));
  const int y0 = static_cast<int>(std::floor(py));
  const int x1 = std::min(x0 + 1, plane.width - 1);
  const int y1 = std::min(y0 + 1, plane.height - 1);
  const double wx = px - x0;
  const double wy = py - y0;
  const double a = plane.at(x0, y0);
  const double b = plane.at(x1, y0);
  const double c = plane.at(x0, y1);
  const double d = plane.at(x1, y1);
  const double top = a + wx * (b - a);
  const double bottom = c + wx * (d - c);
  return top + wy * (bottom - top);
}

int riu2_encode(std::span<const std::uint8_t> bits) {
  const auto p = static_cast<int>(bits.size());
  int transitions = 0;
  int ones = 0;
  for (int i = 0; i < p; ++i) {
    ones += bits[i] != 0;
    transitions += (bits[i] != 0) != (bits[(i + 1) % p] != 0);
  }
  return transitions <= 2 ? ones : p + 1;
}

int lbp_code(const PlaneView& plane, std::array<int, 2> center, const LbpParams& params) {
  validate_params(params);
  const int m = params.margin();
  const auto [col, row] = center;
  if (col < m || row < m || col > plane.width - 1 - m || row > plane.height - 1 - m) {
    throw ContractViolation("LBP center (" + std::to_string(col) + "," + std::to_string(row) +
                            ") closer than " + std::to_string(m) + " to the plane border");
  }
  const double c = plane.at(col, row);
  std::vector<std::uint8_t> bits(params.samples);
  for (int i = 0; i < params.samples; ++i) {
    const auto [dx, dy] = neighbor_offset(params, i);
    const double n = bilinear_sample(plane, col + dx, row + dy);
    bits[i] = (n - c) >= 0.0 ? 1 : 0;
  }
  return riu2_encode(bits);
}

LbpTopCounts lbp_top_counts(const Volume& v, const LbpParams& params) {
  validate_params(params);
  if (params.samples > 64) {
    throw ContractViolation("lbp_top supports at most 64 samples");
  }
  const int m = params.margin();
  for (int a = 0; a < 3; ++a) {
    if (v.dims()[a] <= 2 * m) {
      throw ContractViolation("volume side " + std::to_string(v.dims()[a]) +
                              " too small for LBP margin " + std::to_string(m) +
                              " (needs > " + std::to_string(2 * m) + ")");
    }
  }

  const std::ptrdiff_t sx = 1;
  const std::ptrdiff_t sy = v.nx();
  const std::ptrdiff_t sz = static_cast<std::ptrdiff_t>(v.nx()) * v.ny();
  const int bins = params.bins();

  LbpTopCounts out{params, std::vector<std::uint64_t>(3 * static_cast<std::size_t>(bins), 0)};

  // Plane families: (column axis, row axis); the third axis is unconstrained.
  struct Family {
    int col_axis;
    int row_axis;
    std::ptrdiff_t col_stride;
    std::ptrdiff_t row_stride;
  };
  const std::array<Family, 3> families{{{0, 1, sx, sy}, {0, 2, sx, sz}, {1, 2, sy, sz}}};

  const float* base = v.data().data();
  for (std::size_t f = 0; f < families.size(); ++f) {
    const auto& fam = families[f];
    const auto taps = make_taps(params, fam.col_stride, fam.row_stride);
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{v.nx() - 1, v.ny() - 1, v.nz() - 1};
    for (const int a : {fam.col_axis, fam.row_axis}) {
      lo[a] = m;
      hi[a] = v.dims()[a] - 1 - m;
    }
    std::uint64_t* hist = out.counts.data() + f * bins;
    for (int k = lo[2]; k <= hi[2]; ++k) {
      for (int j = lo[1]; j <= hi[1]; ++j) {
        const float* row = base + v.index(0, j, k);
        for (int i = lo[0]; i <= hi[0]; ++i) {
          const float* center = row + i;
          const double c = *center;
          std::uint64_t mask = 0;
          for (int t = 0; t < params.samples; ++t) {
            if (sample_tap(center, taps[t]) - c >= 0.0) {
              mask |= 1ULL << t;
            }
          }
          ++hist[riu2_from_mask(mask, params.samples)];
        }
      }
    }
  }
  return out;
}

FeatureVector normalize(const LbpTopCounts& counts) {
  const int bins = counts.params.bins();
  FeatureVector fv{counts.params, std::vector<double>(counts.counts.size(), 0.0)};
  for (int block = 0; block < 3; ++block) {
    std::uint64_t total = 0;
    for (int b = 0; b < bins; ++b) {
      total += counts.counts[block * bins + b];
    }
    if (total == 0) {
      continue;
    }
    for (int b = 0; b < bins; ++b) {
      fv.values[block * bins + b] =
          static_cast<double>(counts.counts[block * bins + b]) / static_cast<double>(total);
    }
  }
  return fv;
}

FeatureVector lbp_top(const Volume& v, const LbpParams& params) {
  return normalize(lbp_top_counts(v, params));
}

}  // namespace lungcadx
