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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lungcadx/boosting.hpp"
#include "lungcadx/dataset.hpp"
#include "lungcadx/hpo.hpp"
#include "lungcadx/svm.hpp"

namespace lungcadx {

enum class ClassifierKind { kSvm, kXgboost };

std::string to_string(ClassifierKind k);
ClassifierKind parse_classifier(const std::string& s);

// Clipped binary cross-entropy, eps = 1e-15. Throws ContractViolation for p
// outside [0, 1].
double log_loss(double p, int label);

// Mann-Whitney AUC (ties count one half). Throws ContractViolation unless
// both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Fraction with (score >= threshold) == (label == 1).
double accuracy(std::span<const double> scores, std::span<const int> labels,
                double threshold = 0.5);

struct RocPoint {
  double fpr;
  double tpr;
};

// Empirical ROC from (0,0) to (1,1), one point per distinct score threshold.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

// Fixed model settings not covered by the search space.
struct ModelDefaults {
  GbtParams gbt;
  SvmParams svm;
};

GbtParams gbt_params_from(const ParamPoint& point, const GbtParams& defaults);
SvmParams svm_params_from(const ParamPoint& point, const SvmParams& defaults);

// Trains on (train_x, train_y) and returns P(y = 1) for `held_out`.
using FoldPredictor =
    std::function<double(const Matrix& train_x, std::span<const int> train_y,
                         std::span<const double> held_out, std::uint64_t seed)>;

// Class probability a fold falls back to when its training labels are all one
// class; nullopt when both classes are present.
std::optional<double> single_class_prior(std::span<const int> labels);

FoldPredictor make_fold_predictor(ClassifierKind kind, const ParamPoint& point,
                                  const ModelDefaults& defaults);

struct FeatureKey {
  int radius = 7;
  int samples = 40;
  auto operator<=>(const FeatureKey&) const = default;
};

// LBP-TOP datasets for every (R, P) combination the search may pick.
using FeatureCache = std::map<FeatureKey, LabeledDataset>;

// Dataset for the point's R and P; a point without them selects the only
// cache entry. Throws ContractViolation when no entry matches.
const LabeledDataset& select_features(const FeatureCache& cache, const ParamPoint& point);

struct LoocvResult {
  double loss = 0.0;                 // mean held-out log loss
  std::vector<std::string> ids;      // instances sorted by id
  std::vector<int> labels;
  std::vector<double> probabilities; // held-out P(y = 1), aligned with ids
  std::size_t single_class_folds = 0;
};

// Leave-one-out over the instances sorted by id. The fold holding out id u
// trains with seed derive_seed(seed, fnv1a(u)). Folds whose training set has
// a single class predict that class's prior (0 or 1). Folds run on up to
// `threads` workers; results do not depend on the worker count.
// Throws ContractViolation when data has fewer than two instances.
LoocvResult loocv(const LabeledDataset& data, const FoldPredictor& predictor, std::uint64_t seed,
                  std::size_t threads = 1);

// f(theta): mean LOOCV log loss at `point` on the matching cached features.
double loocv_loss(const FeatureCache& cache, ClassifierKind kind, const ParamPoint& point,
                  const ModelDefaults& defaults, std::uint64_t seed, std::size_t threads = 1);

struct ExperimentConfig {
  ClassifierKind classifier = ClassifierKind::kXgboost;
  SearchMethod method = SearchMethod::kTpe;
  std::size_t n_trials = 100;
  std::size_t n_repeats = 10;
  std::uint64_t base_seed = 0;
  ParamSpace space;
  TpeConfig tpe;
  ModelDefaults defaults;
  std::size_t threads = 1;

  // Classifier space followed by the LBP R/P dims.
  static ParamSpace default_space(ClassifierKind kind);
};

struct RepeatResult {
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  double validation_loss = 0.0;  // best trial loss
  double auc = 0.0;              // pooled over held-out predictions at the best point
  double accuracy = 0.0;
  TrialHistory history;
  LoocvResult best_fit;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RepeatResult> repeats;
  double mean_validation_loss = 0.0;
  double mean_auc = 0.0;
  double mean_accuracy = 0.0;
};

// For each repeat r (seed base_seed + r): search with f(theta) = loocv_loss,
// re-run LOOCV at the best point, pool its held-out probabilities into AUC
// and accuracy. Trials whose model fails to train (ConvergenceError,
// DegenerateLeafError) score +inf. Throws Error if every trial of a repeat
// fails.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const FeatureCache& cache);

// "Random" / "TPE", as printed in the report tables.
std::string table_label(SearchMethod m);
SearchMethod parse_table_label(const std::string& s);

// One row per report: algorithm,n_trials,validation_loss,auc,accuracy (means).
void write_summary_csv(const std::vector<ExperimentReport>& reports,
                       const std::filesystem::path& path, const std::string& provenance = {});
// Same columns, one row per repeat.
void write_raw_csv(const std::vector<ExperimentReport>& reports, const std::filesystem::path& path,
                   const std::string& provenance = {});
void write_roc_csv(std::span<const RocPoint> points, const std::filesystem::path& path);

// %.9g.
std::string format_metric(double v);

}  // namespace lungcadx
