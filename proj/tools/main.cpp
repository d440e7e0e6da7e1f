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

#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using lungcadx::FeatureKey;

// "7:40,8:48" -> {{7,40},{8,48}}
std::vector<FeatureKey> parse_combos(const std::string& text) {
  std::vector<FeatureKey> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw CLI::ValidationError("--combos", "expected R:P pairs, got '" + item + "'");
    }
    out.push_back({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = lungcadx::cli;
  CLI::App app{"lungcadx: LBP-TOP texture features, boosted trees / SVM, and TPE search"};
  app.require_subcommand(1);

  cli::SynthOptions synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic volume dataset");
  synth_cmd->add_option("--out", synth_out, "Output dataset directory")->required();
  synth_cmd->add_option("--n-per-class", synth.config.n_per_class, "Volumes per class")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.config.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--side", synth.config.side, "Cube side in voxels")->capture_default_str();
  synth_cmd->add_option("--radius-a", synth.config.radius_a, "Smoothing radius, label 0")
      ->capture_default_str();
  synth_cmd->add_option("--radius-b", synth.config.radius_b, "Smoothing radius, label 1")
      ->capture_default_str();
  synth_cmd->add_option("--amplitude", synth.config.amplitude, "Texture amplitude")
      ->capture_default_str();

  cli::FeaturesOptions features;
  std::string features_dataset;
  std::string features_manifest;
  std::string features_out;
  std::string features_combos;
  auto* features_cmd = app.add_subcommand("features", "Compute and cache LBP-TOP features");
  features_cmd->add_option("--dataset", features_dataset, "Dataset directory (nodules.csv)");
  features_cmd->add_option("--manifest", features_manifest,
                           "Run manifest supplying dataset, combos and cube side");
  features_cmd->add_option("--out", features_out,
                           "Cache directory (default $LUNGCADX_CACHE_DIR or <dataset>/features)");
  features_cmd->add_option("--combos", features_combos, "R:P list, e.g. 7:40,8:48");
  features_cmd->add_option("--side", features.cube_side, "Crop side in voxels")
      ->capture_default_str();
  features_cmd->add_option("--jobs", features.jobs, "Worker threads")->capture_default_str();

  cli::OptimizeOptions optimize;
  std::string optimize_manifest;
  std::string optimize_out;
  std::string optimize_cache;
  std::uint64_t optimize_seed = 0;
  auto* optimize_cmd = app.add_subcommand("optimize", "Run the classifier x method x budget grid");
  optimize_cmd->add_option("--manifest", optimize_manifest, "Run manifest (JSON)")->required();
  auto* out_opt = optimize_cmd->add_option("--out", optimize_out, "Override output directory");
  auto* seed_opt = optimize_cmd->add_option("--seed", optimize_seed, "Override base seed");
  auto* cache_opt = optimize_cmd->add_option("--cache", optimize_cache, "Feature cache directory");
  optimize_cmd->add_option("--jobs", optimize.jobs, "Grid cells run concurrently")
      ->capture_default_str();
  optimize_cmd->add_flag("--resume", optimize.resume, "Skip cells whose results are complete");

  cli::ReportOptions report;
  std::string report_in;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Reshape a summary CSV into per-metric series");
  report_cmd->add_option("--input", report_in, "summary_<classifier>.csv from optimize")
      ->required();
  report_cmd->add_option("--out", report_out, "Output directory")->required();
  report_cmd->add_flag("--table", report.table, "Print a plain-text table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      synth.out = synth_out;
      return cli::cmd_synth(synth, std::cout, std::cerr);
    }
    if (*features_cmd) {
      if (!features_manifest.empty()) {
        const auto m = cli::RunManifest::load(features_manifest);
        features.dataset = m.dataset;
        features.combos = m.features;
        features.cube_side = m.cube_side;
      }
      if (!features_dataset.empty()) features.dataset = features_dataset;
      if (features.dataset.empty()) {
        std::cerr << "features: --dataset or --manifest is required\n";
        return 2;
      }
      if (!features_out.empty()) features.cache_dir = features_out;
      if (!features_combos.empty()) features.combos = parse_combos(features_combos);
      return cli::cmd_features(features, std::cout, std::cerr);
    }
    if (*optimize_cmd) {
      optimize.manifest = optimize_manifest;
      if (*out_opt) optimize.out = optimize_out;
      if (*seed_opt) optimize.seed = optimize_seed;
      if (*cache_opt) optimize.cache_dir = optimize_cache;
      return cli::cmd_optimize(optimize, std::cout, std::cerr);
    }
    if (*report_cmd) {
      report.input = report_in;
      report.out = report_out;
      return cli::cmd_report(report, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "lungcadx: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
