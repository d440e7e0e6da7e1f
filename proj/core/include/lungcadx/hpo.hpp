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
#include <limits>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace lungcadx {

using Rng = std::mt19937_64;

enum class ParamKind { kUniform, kLogUniform, kIntUniform, kCategorical };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kUniform;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::string> choices;  // categorical only

  static ParamSpec uniform(std::string name, double lo, double hi);
  static ParamSpec log_uniform(std::string name, double lo, double hi);
  static ParamSpec int_uniform(std::string name, std::int64_t lo, std::int64_t hi);
  static ParamSpec categorical(std::string name, std::vector<std::string> choices);

  // Throws ContractViolation when bounds or choices are invalid.
  void validate() const;
};

// A value is a real (uniform, log-uniform), an integer, or a categorical choice.
using ParamValue = std::variant<double, std::int64_t, std::string>;

class ParamPoint {
 public:
  void set(const std::string& name, ParamValue value) { values_[name] = std::move(value); }
  bool has(const std::string& name) const { return values_.contains(name); }
  const ParamValue& at(const std::string& name) const;

  // Numeric view of a real or integer value; categorical choices that parse
  // as numbers are accepted too. Throws ContractViolation otherwise.
  double real(const std::string& name) const;
  std::int64_t integer(const std::string& name) const;
  const std::string& choice(const std::string& name) const;

  const std::map<std::string, ParamValue>& values() const noexcept { return values_; }
  friend bool operator==(const ParamPoint&, const ParamPoint&) = default;

 private:
  std::map<std::string, ParamValue> values_;
};

std::string format_value(const ParamValue& v);

class ParamSpace {
 public:
  ParamSpace() = default;
  // Throws ContractViolation on duplicate names or invalid specs.
  explicit ParamSpace(std::vector<ParamSpec> specs);

  const std::vector<ParamSpec>& specs() const noexcept { return specs_; }
  std::size_t size() const noexcept { return specs_.size(); }

  bool contains(const ParamPoint& p) const;

  // C, gamma_rbf in log-uniform(1e-5, 1e5).
  static ParamSpace svm();
  // eta, max_depth, min_child_weight, gamma, learning_rate.
  static ParamSpace xgboost();
  // R in {7, 8}, P in {40, 48}.
  static ParamSpace lbp();
  // Concatenation; throws on name clashes.
  ParamSpace operator+(const ParamSpace& other) const;

 private:
  std::vector<ParamSpec> specs_;
};

struct TrialRecord {
  std::size_t trial_index = 0;
  ParamPoint point;
  double loss = 0.0;  // +inf marks a failed evaluation
};

struct TpeConfig {
  double quantile_gamma = 0.25;
  int n_startup = 10;
  int n_candidates = 24;

  void validate() const;
};

enum class SearchMethod { kRandom, kTpe };

std::string to_string(SearchMethod m);
SearchMethod parse_search_method(const std::string& s);

ParamPoint sample_random(const ParamSpace& space, Rng& rng);

// Tree-structured Parzen estimator proposal. Falls back to sample_random
// during startup or when no finite-loss trial exists.
ParamPoint tpe_suggest(const ParamSpace& space, const std::vector<TrialRecord>& history,
                       const TpeConfig& cfg, Rng& rng);

// Per-dimension log density ratio log l(x) - log g(x) summed over the space;
// exposed for inspection and tests.
double tpe_log_ratio(const ParamSpace& space, const std::vector<TrialRecord>& history,
                     const TpeConfig& cfg, const ParamPoint& point);

struct TrialHistory {
  std::vector<TrialRecord> trials;
  std::size_t best_index = 0;

  const TrialRecord& best() const { return trials.at(best_index); }
};

// Objective receives the proposed point and its trial index.
using Objective = std::function<double(const ParamPoint&, std::size_t)>;

// Sequential propose/evaluate loop. Non-finite losses are recorded as +inf
// and never enter TPE's good set; exceptions from the objective propagate. The best record is the lowest loss,
// earliest on ties. Throws ContractViolation when n_trials < 1.
TrialHistory run_search(const Objective& objective, const ParamSpace& space, std::size_t n_trials,
                        SearchMethod method, const TpeConfig& cfg, Rng& rng);

// `trial_index,loss,<param...>` in space order.
void write_trial_log(const TrialHistory& history, const ParamSpace& space,
                     const std::filesystem::path& path, const std::string& provenance = {});

}  // namespace lungcadx
