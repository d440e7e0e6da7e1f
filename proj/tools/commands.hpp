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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lungcadx/evaluation.hpp"
#include "lungcadx/synthdata.hpp"
#include "run_manifest.hpp"

namespace lungcadx::cli {

// Environment variable that overrides the default feature cache directory.
inline constexpr const char* kCacheDirEnv = "LUNGCADX_CACHE_DIR";

struct SynthOptions {
  std::filesystem::path out;
  SynthConfig config;
};

struct FeaturesOptions {
  std::filesystem::path dataset;             // directory holding nodules.csv
  std::optional<std::filesystem::path> cache_dir;
  std::vector<FeatureKey> combos{{7, 40}, {7, 48}, {8, 40}, {8, 48}};
  int cube_side = kDefaultCubeSide;
  std::size_t jobs = 1;
};

struct OptimizeOptions {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> cache_dir;
  std::size_t jobs = 1;
  bool resume = false;
};

struct ReportOptions {
  std::filesystem::path input;  // summary CSV written by optimize
  std::filesystem::path out;
  bool table = false;
};

// Each command reports failures on `err` and returns a nonzero exit code.
int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err);
int cmd_features(const FeaturesOptions& opts, std::ostream& out, std::ostream& err);
int cmd_optimize(const OptimizeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err);

// Flag > LUNGCADX_CACHE_DIR > <dataset>/features.
std::filesystem::path resolve_cache_dir(const std::filesystem::path& dataset,
                                        const std::optional<std::filesystem::path>& flag);

std::string feature_file_name(const FeatureKey& key);

// Loads (building if stale) the feature cache for `opts`. Throws on failure.
FeatureCache ensure_features(const FeaturesOptions& opts, std::ostream& log);

// Hex FNV-1a of `text`, used in `# config_hash=` provenance lines.
std::string config_hash(const std::string& text);

}  // namespace lungcadx::cli
