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

#include "lungcadx/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "lungcadx/errors.hpp"

namespace lungcadx {
namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::size_t voxel_count(const Dims& dims) {
  return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
         static_cast<std::size_t>(dims[2]);
}

void validate_geometry(const Dims& dims, const Spacing& spacing) {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) {
      throw ContractViolation("volume dims must be positive");
    }
    if (!std::isfinite(spacing[a]) || spacing[a] <= 0.0) {
      throw ContractViolation("volume spacing must be finite and > 0");
    }
  }
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

// Round-half-up of a positive physical extent, never below one voxel.
int rounded_extent(int n, double s) {
  const auto out = static_cast<int>(std::floor(n * s + 0.5));
  return std::max(out, 1);
}

struct AxisSample {
  int lo;
  int hi;
  double w;
};

AxisSample axis_sample(int out_index, double spacing, int n) {
  const double src = static_cast<double>(out_index) / spacing;
  if (src <= 0.0) {
    return {0, 0, 0.0};
  }
  if (src >= n - 1) {
    return {n - 1, n - 1, 0.0};
  }
  const auto lo = static_cast<int>(std::floor(src));
  return {lo, std::min(lo + 1, n - 1), src - lo};
}

}  // namespace

Volume::Volume(Dims dims, Spacing spacing, std::vector<float> data)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
  validate_geometry(dims_, spacing_);
  if (data_.size() != voxel_count(dims_)) {
    throw ContractViolation("volume data length does not match nx*ny*nz");
  }
}

Volume::Volume(Dims dims, Spacing spacing, float fill)
    : dims_(dims), spacing_(spacing) {
  validate_geometry(dims_, spacing_);
  data_.assign(voxel_count(dims_), fill);
}

Volume load_volume(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  const auto raw_path = dir / "data.raw";
  std::ifstream meta_in(meta_path);
  if (!meta_in) {
    throw IoError("cannot open " + meta_path.string());
  }

  Dims dims{};
  Spacing spacing{};
  try {
    const auto meta = nlohmann::json::parse(meta_in);
    const auto& jd = meta.at("dims");
    const auto& js = meta.at("spacing");
    if (!jd.is_array() || jd.size() != 3 || !js.is_array() || js.size() != 3) {
      throw FormatError("dims and spacing must be 3-element arrays");
    }
    for (int a = 0; a < 3; ++a) {
      if (!jd[a].is_number_integer() || !js[a].is_number()) {
        throw FormatError("dims must be integers and spacing numbers");
      }
      dims[a] = jd[a].get<int>();
      spacing[a] = js[a].get<double>();
      if (dims[a] <= 0 || !std::isfinite(spacing[a]) || spacing[a] <= 0.0) {
        throw FormatError("dims must be positive and spacing finite and > 0");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed " + meta_path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError("malformed " + meta_path.string() + ": " + e.what());
  }

  std::ifstream raw_in(raw_path, std::ios::binary | std::ios::ate);
  if (!raw_in) {
    throw IoError("cannot open " + raw_path.string());
  }
  const auto bytes = static_cast<std::size_t>(raw_in.tellg());
  const std::size_t expected = voxel_count(dims) * sizeof(float);
  if (bytes != expected) {
    std::ostringstream msg;
    msg << "size mismatch in " << raw_path.string() << ": expected " << expected
        << " bytes for dims (" << dims[0] << "," << dims[1] << "," << dims[2] << "), found "
        << bytes;
    throw SizeMismatchError(msg.str());
  }
  raw_in.seekg(0);
  std::vector<std::uint32_t> words(voxel_count(dims));
  raw_in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(expected));
  if (!raw_in) {
    throw IoError("failed reading " + raw_path.string());
  }
  std::vector<float> data(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    data[i] = std::bit_cast<float>(to_little_endian(words[i]));
  }
  return Volume(dims, spacing, std::move(data));
}

void write_volume(const Volume& v, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  nlohmann::json meta;
  meta["dims"] = {v.nx(), v.ny(), v.nz()};
  meta["spacing"] = {v.spacing()[0], v.spacing()[1], v.spacing()[2]};
  {
    std::ofstream out(dir / "meta.json");
    if (!out) {
      throw IoError("cannot write " + (dir / "meta.json").string());
    }
    out << meta.dump() << '\n';
  }
  std::vector<std::uint32_t> words(v.size());
  const auto data = v.data();
  for (std::size_t i = 0; i < words.size(); ++i) {
    words[i] = to_little_endian(std::bit_cast<std::uint32_t>(data[i]));
  }
  std::ofstream out(dir / "data.raw", std::ios::binary);
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!out) {
    throw IoError("cannot write " + (dir / "data.raw").string());
  }
}

Volume resample_isotropic(const Volume& v) {
  const auto& s = v.spacing();
  const Dims out_dims{rounded_extent(v.nx(), s[0]), rounded_extent(v.ny(), s[1]),
                      rounded_extent(v.nz(), s[2])};
  Volume out(out_dims, Spacing{1.0, 1.0, 1.0});

  std::array<std::vector<AxisSample>, 3> axes;
  for (int a = 0; a < 3; ++a) {
    axes[a].reserve(out_dims[a]);
    for (int o = 0; o < out_dims[a]; ++o) {
      axes[a].push_back(axis_sample(o, s[a], v.dims()[a]));
    }
  }

  auto lerp = [](double a, double b, double w) { return a + w * (b - a); };
  for (int k = 0; k < out_dims[2]; ++k) {
    const auto& z = axes[2][k];
    for (int j = 0; j < out_dims[1]; ++j) {
      const auto& y = axes[1][j];
      for (int i = 0; i < out_dims[0]; ++i) {
        const auto& x = axes[0][i];
        const double c00 = lerp(v.at(x.lo, y.lo, z.lo), v.at(x.hi, y.lo, z.lo), x.w);
        const double c10 = lerp(v.at(x.lo, y.hi, z.lo), v.at(x.hi, y.hi, z.lo), x.w);
        const double c01 = lerp(v.at(x.lo, y.lo, z.hi), v.at(x.hi, y.lo, z.hi), x.w);
        const double c11 = lerp(v.at(x.lo, y.hi, z.hi), v.at(x.hi, y.hi, z.hi), x.w);
        const double c0 = lerp(c00, c10, y.w);
        const double c1 = lerp(c01, c11, y.w);
        out.at(i, j, k) = static_cast<float>(lerp(c0, c1, z.w));
      }
    }
  }
  return out;
}

Volume crop_cube(const Volume& v, const VoxelIndex& center, int side) {
  if (side < 1) {
    throw ContractViolation("crop side must be >= 1");
  }
  Volume out(Dims{side, side, side}, v.spacing(), kPadValue);
  const int half = side / 2;
  const int x0 = center[0] - half;
  const int y0 = center[1] - half;
  const int z0 = center[2] - half;
  for (int k = 0; k < side; ++k) {
    for (int j = 0; j < side; ++j) {
      for (int i = 0; i < side; ++i) {
        if (v.contains(x0 + i, y0 + j, z0 + k)) {
          out.at(i, j, k) = v.at(x0 + i, y0 + j, z0 + k);
        }
      }
    }
  }
  return out;
}

std::vector<NoduleRef> read_manifest(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) {
    throw IoError("cannot open " + csv_path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != "volume_id,cx,cy,cz,label") {
    throw FormatError(csv_path.string() + ": expected header volume_id,cx,cy,cz,label");
  }
  std::vector<NoduleRef> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    NoduleRef ref;
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) {
      fields.push_back(field);
    }
    auto fail = [&] {
      throw FormatError(csv_path.string() + ":" + std::to_string(line_no) + ": bad row '" +
                        line + "'");
    };
    if (fields.size() != 5 || fields[0].empty()) {
      fail();
    }
    try {
      std::size_t pos = 0;
      ref.volume_id = fields[0];
      for (int a = 0; a < 3; ++a) {
        ref.center[a] = std::stoi(fields[1 + a], &pos);
        if (pos != fields[1 + a].size() || ref.center[a] < 0) {
          fail();
        }
      }
      ref.label = std::stoi(fields[4], &pos);
      if (pos != fields[4].size() || (ref.label != 0 && ref.label != 1)) {
        fail();
      }
    } catch (const std::logic_error&) {
      fail();
    }
    out.push_back(std::move(ref));
  }
  return out;
}

void write_manifest(const std::vector<NoduleRef>& nodules,
                    const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + csv_path.string());
  }
  out << "volume_id,cx,cy,cz,label\n";
  for (const auto& n : nodules) {
    out << n.volume_id << ',' << n.center[0] << ',' << n.center[1] << ',' << n.center[2] << ','
        << n.label << '\n';
  }
  if (!out) {
    throw IoError("failed writing " + csv_path.string());
  }
}

}  // namespace lungcadx
