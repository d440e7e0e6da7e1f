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

#include "lungcadx/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>

#include "lungcadx/errors.hpp"
#include "lungcadx/parallel.hpp"
#include "lungcadx/random.hpp"

namespace lungcadx {
namespace {

constexpr double kClipEps = 1e-15;

void check_scores(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ContractViolation("scores and labels differ in length");
  }
}

std::ofstream open_csv(const std::filesystem::path& path, const std::string& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  if (!provenance.empty()) {
    out << "# " << provenance << '\n';
  }
  return out;
}

}  // namespace

std::string to_string(ClassifierKind k) { return k == ClassifierKind::kSvm ? "svm" : "xgboost"; }

ClassifierKind parse_classifier(const std::string& s) {
  if (s == "svm") {
    return ClassifierKind::kSvm;
  }
  if (s == "xgboost") {
    return ClassifierKind::kXgboost;
  }
  throw ContractViolation("unknown classifier '" + s + "' (expected svm or xgboost)");
}

double log_loss(double p, int label) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ContractViolation("probability outside [0, 1]");
  }
  p = std::clamp(p, kClipEps, 1.0 - kClipEps);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_scores(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the rank sum of the positives, so tied groups stay integral.
  std::uint64_t doubled_rank_sum = 0;
  std::uint64_t n_pos = 0;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && scores[order[end]] == scores[order[start]]) {
      ++end;
    }
    const std::uint64_t doubled_avg_rank = (start + 1) + end;  // 2 * mean of ranks start+1..end
    for (std::size_t p = start; p < end; ++p) {
      if (labels[order[p]] == 1) {
        doubled_rank_sum += doubled_avg_rank;
        ++n_pos;
      }
    }
    start = end;
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ContractViolation("roc_auc needs at least one positive and one negative");
  }
  const std::uint64_t doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
  return static_cast<double>(doubled_u) / static_cast<double>(2 * n_pos * n_neg);
}

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_scores(scores, labels);
  if (scores.empty()) {
    throw ContractViolation("accuracy of an empty set");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    correct += (scores[i] >= threshold) == (labels[i] == 1);
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_scores(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double pos = 0;
  double neg = 0;
  for (const int y : labels) {
    (y == 1 ? pos : neg) += 1.0;
  }
  std::vector<RocPoint> out{{0.0, 0.0}};
  double tp = 0;
  double fp = 0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    (labels[order[p]] == 1 ? tp : fp) += 1.0;
    if (p + 1 == order.size() || scores[order[p + 1]] != scores[order[p]]) {
      out.push_back({neg > 0 ? fp / neg : 0.0, pos > 0 ? tp / pos : 0.0});
    }
  }
  return out;
}

GbtParams gbt_params_from(const ParamPoint& point, const GbtParams& defaults) {
  GbtParams p = defaults;
  if (point.has("eta")) p.eta = point.real("eta");
  if (point.has("max_depth")) p.max_depth = static_cast<int>(point.integer("max_depth"));
  if (point.has("min_child_weight")) p.min_child_weight = point.real("min_child_weight");
  if (point.has("gamma")) p.gamma = point.real("gamma");
  if (point.has("learning_rate")) p.learning_rate = point.real("learning_rate");
  if (point.has("lambda")) p.lambda = point.real("lambda");
  if (point.has("num_rounds")) p.num_rounds = static_cast<int>(point.integer("num_rounds"));
  return p;
}

SvmParams svm_params_from(const ParamPoint& point, const SvmParams& defaults) {
  SvmParams p = defaults;
  if (point.has("C")) p.c = point.real("C");
  if (point.has("gamma_rbf")) p.gamma_rbf = point.real("gamma_rbf");
  return p;
}

std::optional<double> single_class_prior(std::span<const int> labels) {
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (has_pos && has_neg) {
    return std::nullopt;
  }
  return has_pos ? 1.0 : 0.0;
}

FoldPredictor make_fold_predictor(ClassifierKind kind, const ParamPoint& point,
                                  const ModelDefaults& defaults) {
  if (kind == ClassifierKind::kXgboost) {
    const GbtParams params = gbt_params_from(point, defaults.gbt);
    params.validate();
    return [params](const Matrix& x, std::span<const int> y, std::span<const double> held_out,
                    std::uint64_t) {
      if (const auto prior = single_class_prior(y)) {
        return *prior;
      }
      return train_gbt(x, y, params).predict_proba(held_out);
    };
  }
  const SvmParams base = svm_params_from(point, defaults.svm);
  base.validate();
  return [base](const Matrix& x, std::span<const int> y, std::span<const double> held_out,
                std::uint64_t seed) {
    if (const auto prior = single_class_prior(y)) {
      return *prior;
    }
    SvmParams params = base;
    params.seed = seed;
    return train_svm(x, y, params).predict_proba(held_out);
  };
}

const LabeledDataset& select_features(const FeatureCache& cache, const ParamPoint& point) {
  if (point.has("R") && point.has("P")) {
    const FeatureKey key{static_cast<int>(point.integer("R")),
                         static_cast<int>(point.integer("P"))};
    const auto it = cache.find(key);
    if (it == cache.end()) {
      throw ContractViolation("no cached features for R=" + std::to_string(key.radius) +
                              " P=" + std::to_string(key.samples));
    }
    return it->second;
  }
  if (cache.size() != 1) {
    throw ContractViolation("point has no R/P and the feature cache is ambiguous");
  }
  return cache.begin()->second;
}

LoocvResult loocv(const LabeledDataset& data, const FoldPredictor& predictor, std::uint64_t seed,
                  std::size_t threads) {
  if (data.size() < 2) {
    throw ContractViolation("LOOCV needs at least two instances");
  }
  const LabeledDataset sorted = data.sorted_by_id();
  const std::size_t n = sorted.size();
  LoocvResult out;
  out.ids = sorted.ids;
  out.labels = sorted.labels;
  out.probabilities.assign(n, 0.0);
  std::vector<char> single_class(n, 0);

  parallel_for(n, threads, [&](std::size_t held) {
    Matrix train_x;
    std::vector<int> train_y;
    train_y.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != held) {
        train_x.push_row(sorted.features.row(i));
        train_y.push_back(sorted.labels[i]);
      }
    }
    single_class[held] = single_class_prior(train_y).has_value() ? 1 : 0;
    const std::uint64_t fold_seed = derive_seed(seed, fnv1a(sorted.ids[held]));
    out.probabilities[held] = predictor(train_x, train_y, sorted.features.row(held), fold_seed);
  });

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += log_loss(out.probabilities[i], out.labels[i]);
    out.single_class_folds += static_cast<std::size_t>(single_class[i]);
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

double loocv_loss(const FeatureCache& cache, ClassifierKind kind, const ParamPoint& point,
                  const ModelDefaults& defaults, std::uint64_t seed, std::size_t threads) {
  return loocv(select_features(cache, point), make_fold_predictor(kind, point, defaults), seed,
               threads)
      .loss;
}

ParamSpace ExperimentConfig::default_space(ClassifierKind kind) {
  return (kind == ClassifierKind::kSvm ? ParamSpace::svm() : ParamSpace::xgboost()) +
         ParamSpace::lbp();
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const FeatureCache& cache) {
  if (cfg.n_repeats < 1) {
    throw ContractViolation("n_repeats must be >= 1");
  }
  ExperimentReport report;
  report.config = cfg;
  for (std::size_t r = 0; r < cfg.n_repeats; ++r) {
    RepeatResult row;
    row.repeat = r;
    row.seed = cfg.base_seed + r;
    const std::uint64_t repeat_seed = row.seed;

    auto evaluate = [&](const ParamPoint& point, std::size_t trial) {
      return loocv(select_features(cache, point),
                   make_fold_predictor(cfg.classifier, point, cfg.defaults),
                   derive_seed(repeat_seed, trial), cfg.threads);
    };
    const Objective objective = [&](const ParamPoint& point, std::size_t trial) {
      try {
        return evaluate(point, trial).loss;
      } catch (const ConvergenceError&) {
        return std::numeric_limits<double>::infinity();
      } catch (const DegenerateLeafError&) {
        return std::numeric_limits<double>::infinity();
      }
    };

    Rng rng(repeat_seed);
    row.history = run_search(objective, cfg.space, cfg.n_trials, cfg.method, cfg.tpe, rng);
    const TrialRecord& best = row.history.best();
    if (!std::isfinite(best.loss)) {
      throw Error("every trial of repeat " + std::to_string(r) + " failed to train");
    }
    row.best_fit = evaluate(best.point, best.trial_index);
    row.validation_loss = best.loss;
    row.auc = roc_auc(row.best_fit.probabilities, row.best_fit.labels);
    row.accuracy = accuracy(row.best_fit.probabilities, row.best_fit.labels);
    report.repeats.push_back(std::move(row));
  }

  const auto n = static_cast<double>(report.repeats.size());
  for (const auto& row : report.repeats) {
    report.mean_validation_loss += row.validation_loss;
    report.mean_auc += row.auc;
    report.mean_accuracy += row.accuracy;
  }
  report.mean_validation_loss /= n;
  report.mean_auc /= n;
  report.mean_accuracy /= n;
  return report;
}

std::string table_label(SearchMethod m) { return m == SearchMethod::kRandom ? "Random" : "TPE"; }

SearchMethod parse_table_label(const std::string& s) {
  if (s == "Random") {
    return SearchMethod::kRandom;
  }
  if (s == "TPE") {
    return SearchMethod::kTpe;
  }
  throw FormatError("unknown algorithm label '" + s + "'");
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_summary_csv(const std::vector<ExperimentReport>& reports,
                       const std::filesystem::path& path, const std::string& provenance) {
  auto out = open_csv(path, provenance);
  out << "algorithm,n_trials,validation_loss,auc,accuracy\n";
  for (const auto& r : reports) {
    out << table_label(r.config.method) << ',' << r.config.n_trials << ','
        << format_metric(r.mean_validation_loss) << ',' << format_metric(r.mean_auc) << ','
        << format_metric(r.mean_accuracy) << '\n';
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

void write_raw_csv(const std::vector<ExperimentReport>& reports, const std::filesystem::path& path,
                   const std::string& provenance) {
  auto out = open_csv(path, provenance);
  out << "algorithm,n_trials,validation_loss,auc,accuracy\n";
  for (const auto& r : reports) {
    for (const auto& row : r.repeats) {
      out << table_label(r.config.method) << ',' << r.config.n_trials << ','
          << format_metric(row.validation_loss) << ',' << format_metric(row.auc) << ','
          << format_metric(row.accuracy) << '\n';
    }
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

void write_roc_csv(std::span<const RocPoint> points, const std::filesystem::path& path) {
  auto out = open_csv(path, {});
  out << "fpr,tpr\n";
  for (const auto& p : points) {
    out << format_metric(p.fpr) << ',' << format_metric(p.tpr) << '\n';
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

}  // namespace lungcadx
