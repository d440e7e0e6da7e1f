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

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "lungcadx/errors.hpp"
#include "lungcadx/texture.hpp"

namespace lungcadx {
namespace {

namespace fs = std::filesystem;

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

// Between-class distance of class-mean histograms over mean within-class
// pairwise distance.
double separation(const SynthConfig& cfg) {
  std::vector<std::vector<double>> feats[2];
  for (const auto& inst : generate_dataset(cfg)) {
    feats[inst.nodule.label].push_back(lbp_top(inst.volume, {7.0, 40}).values);
  }
  std::vector<double> mean[2];
  double within = 0;
  int pairs = 0;
  for (int c = 0; c < 2; ++c) {
    mean[c].assign(feats[c][0].size(), 0.0);
    for (const auto& f : feats[c])
      for (std::size_t i = 0; i < f.size(); ++i) mean[c][i] += f[i] / feats[c].size();
    for (std::size_t a = 0; a < feats[c].size(); ++a)
      for (std::size_t b = a + 1; b < feats[c].size(); ++b) {
        within += l1(feats[c][a], feats[c][b]);
        ++pairs;
      }
  }
  return l1(mean[0], mean[1]) / (within / pairs);
}

TEST(SynthConfigTest, Validation) {
  SynthConfig c;
  c.radius_b = c.radius_a;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = SynthConfig{};
  c.side = 18;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = SynthConfig{};
  c.n_per_class = 0;
  EXPECT_THROW(c.validate(), ContractViolation);
}

TEST(GenerateTest, CountsLabelsAndGeometry) {
  SynthConfig c;
  c.side = 24;
  const auto ds = generate_dataset(c);
  ASSERT_EQ(ds.size(), 40u);
  int ones = 0;
  for (const auto& inst : ds) {
    ones += inst.nodule.label;
    EXPECT_EQ(inst.volume.dims(), (Dims{24, 24, 24}));
    EXPECT_EQ(inst.volume.spacing(), (Spacing{1, 1, 1}));
    EXPECT_EQ(inst.nodule.center, (VoxelIndex{12, 12, 12}));
  }
  EXPECT_EQ(ones, 20);
}

TEST(GenerateTest, DeterministicAndSeedSensitive) {
  SynthConfig c;
  c.n_per_class = 2;
  c.side = 20;
  const auto a = generate_dataset(c);
  const auto b = generate_dataset(c);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].volume, b[i].volume);
  c.seed = 1;
  EXPECT_NE(generate_dataset(c)[0].volume, a[0].volume);
}

TEST(BoxSmoothTest, ConstantPreservedAndRadiusZeroIdentity) {
  const Volume k(Dims{7, 5, 6}, Spacing{1, 1, 1}, 3.0f);
  const Volume ks = box_smooth(k, 2);
  for (const float x : ks.data()) EXPECT_NEAR(x, 3.0f, 1e-5);
  std::mt19937_64 rng(1);
  std::normal_distribution<float> z;
  Volume v(Dims{6, 6, 6}, Spacing{1, 1, 1});
  for (auto& x : v.mutable_data()) x = z(rng);
  EXPECT_EQ(box_smooth(v, 0), v);
}

TEST(BoxSmoothTest, MatchesDirectWindowMean) {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> z;
  Volume v(Dims{8, 7, 6}, Spacing{1, 1, 1});
  for (auto& x : v.mutable_data()) x = z(rng);
  const Volume s = box_smooth(v, 2);
  for (int k = 0; k < 6; ++k)
    for (int j = 0; j < 7; ++j)
      for (int i = 0; i < 8; ++i) {
        double sum = 0;
        int n = 0;
        for (int c = k - 2; c <= k + 2; ++c)
          for (int b = j - 2; b <= j + 2; ++b)
            for (int a = i - 2; a <= i + 2; ++a)
              if (v.contains(a, b, c)) {
                sum += v.at(a, b, c);
                ++n;
              }
        ASSERT_NEAR(s.at(i, j, k), sum / n, 1e-4);
      }
}

TEST(WriteDatasetTest, RoundTripsThroughVolumeFormat) {
  SynthConfig c;
  c.n_per_class = 2;
  c.side = 20;
  const auto ds = generate_dataset(c);
  const fs::path dir = fs::temp_directory_path() / "lungcadx_synth_test";
  fs::remove_all(dir);
  const auto manifest = write_dataset(ds, dir);
  const auto refs = read_manifest(manifest);
  ASSERT_EQ(refs.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(refs[i].volume_id, ds[i].nodule.volume_id);
    EXPECT_EQ(load_volume(volume_dir(dir, refs[i].volume_id)), ds[i].volume);
  }
  fs::remove_all(dir);
}

TEST(SeparationTest, ClassesAreTexturallyDistinct) {
  SynthConfig c;
  EXPECT_GT(separation(c), 10.0);
}

TEST(SeparationTest, GrowsAsClassARadiusMovesAwayFromClassB) {
  double prev = 0;
  for (const int ra : {2, 1, 0}) {
    SynthConfig c;
    c.n_per_class = 5;
    c.radius_a = ra;
    const double s = separation(c);
    EXPECT_GE(s, prev) << ra;
    prev = s;
  }
}

}  // namespace
}  // namespace lungcadx
