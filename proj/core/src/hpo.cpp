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

#include "lungcadx/hpo.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>

#include "lungcadx/errors.hpp"

namespace lungcadx {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Bounds of a numeric dimension in the space the Parzen model works in.
std::pair<double, double> model_bounds(const ParamSpec& s) {
  switch (s.kind) {
    case ParamKind::kUniform:
      return {s.lo, s.hi};
    case ParamKind::kLogUniform:
      return {std::log(s.lo), std::log(s.hi)};
    case ParamKind::kIntUniform:
      return {s.lo - 0.5, s.hi + 0.5};
    case ParamKind::kCategorical:
      break;
  }
  return {0.0, 0.0};
}

double to_model(const ParamSpec& s, const ParamValue& v) {
  switch (s.kind) {
    case ParamKind::kUniform:
      return std::get<double>(v);
    case ParamKind::kLogUniform:
      return std::log(std::get<double>(v));
    case ParamKind::kIntUniform:
      return static_cast<double>(std::get<std::int64_t>(v));
    case ParamKind::kCategorical:
      break;
  }
  return 0.0;
}

std::size_t choice_index(const ParamSpec& s, const ParamValue& v) {
  const auto& c = std::get<std::string>(v);
  return static_cast<std::size_t>(std::find(s.choices.begin(), s.choices.end(), c) -
                                  s.choices.begin());
}

ParamValue sample_dim(const ParamSpec& s, Rng& rng) {
  switch (s.kind) {
    case ParamKind::kUniform:
      return std::uniform_real_distribution<double>(s.lo, s.hi)(rng);
    case ParamKind::kLogUniform:
      return std::clamp(
          std::exp(std::uniform_real_distribution<double>(std::log(s.lo), std::log(s.hi))(rng)),
          s.lo, s.hi);
    case ParamKind::kIntUniform:
      return std::uniform_int_distribution<std::int64_t>(static_cast<std::int64_t>(s.lo),
                                                         static_cast<std::int64_t>(s.hi))(rng);
    case ParamKind::kCategorical:
      return s.choices[std::uniform_int_distribution<std::size_t>(0, s.choices.size() - 1)(rng)];
  }
  return 0.0;
}

// One-dimensional Parzen mixture of truncated Gaussians plus one uniform
// prior component, each with equal weight.
class ParzenEstimator {
 public:
  ParzenEstimator(std::vector<double> observations, double lo, double hi)
      : lo_(lo), hi_(hi), mus_(std::move(observations)) {
    std::sort(mus_.begin(), mus_.end());
    const double range = hi_ - lo_;
    sigmas_.resize(mus_.size());
    // Wide kernels while observations are few, 1% of the range from 99 on.
    const double min_sigma =
        range / std::min(100.0, 1.0 + static_cast<double>(mus_.size()));
    for (std::size_t k = 0; k < mus_.size(); ++k) {
      double s = 0.0;
      if (k > 0) {
        s = std::max(s, mus_[k] - mus_[k - 1]);
      }
      if (k + 1 < mus_.size()) {
        s = std::max(s, mus_[k + 1] - mus_[k]);
      }
      if (mus_.size() == 1) {
        s = range;
      }
      sigmas_[k] = std::clamp(s, min_sigma, range);
    }
    norms_.resize(mus_.size());
    for (std::size_t k = 0; k < mus_.size(); ++k) {
      norms_[k] = normal_cdf((hi_ - mus_[k]) / sigmas_[k]) - normal_cdf((lo_ - mus_[k]) / sigmas_[k]);
      norms_[k] = std::max(norms_[k], 1e-300);
    }
  }

  double density(double x) const {
    double sum = 1.0 / (hi_ - lo_);
    for (std::size_t k = 0; k < mus_.size(); ++k) {
      sum += normal_pdf((x - mus_[k]) / sigmas_[k]) / (sigmas_[k] * norms_[k]);
    }
    return sum / static_cast<double>(mus_.size() + 1);
  }

  // Probability mass of [a, b] within the bounds.
  double mass(double a, double b) const {
    double sum = (b - a) / (hi_ - lo_);
    for (std::size_t k = 0; k < mus_.size(); ++k) {
      sum += (normal_cdf((b - mus_[k]) / sigmas_[k]) - normal_cdf((a - mus_[k]) / sigmas_[k])) /
             norms_[k];
    }
    return sum / static_cast<double>(mus_.size() + 1);
  }

  double sample(Rng& rng) const {
    const std::size_t k =
        std::uniform_int_distribution<std::size_t>(0, mus_.size())(rng);
    if (k == mus_.size()) {
      return std::uniform_real_distribution<double>(lo_, hi_)(rng);
    }
    std::normal_distribution<double> normal(mus_[k], sigmas_[k]);
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double x = normal(rng);
      if (x >= lo_ && x <= hi_) {
        return x;
      }
    }
    return std::clamp(mus_[k], lo_, hi_);
  }

 private:
  double lo_;
  double hi_;
  std::vector<double> mus_;
  std::vector<double> sigmas_;
  std::vector<double> norms_;
};

// Smoothed category frequencies: (count + 1/K) / (n + 1).
class CategoricalEstimator {
 public:
  CategoricalEstimator(const std::vector<std::size_t>& observed, std::size_t n_choices)
      : probs_(n_choices, 1.0 / static_cast<double>(n_choices)) {
    for (const auto c : observed) {
      probs_[c] += 1.0;
    }
    for (auto& p : probs_) {
      p /= static_cast<double>(observed.size() + 1);
    }
  }

  double prob(std::size_t c) const { return probs_[c]; }

  std::size_t sample(Rng& rng) const {
    std::discrete_distribution<std::size_t> d(probs_.begin(), probs_.end());
    return d(rng);
  }

 private:
  std::vector<double> probs_;
};

// l/g model for one dimension.
struct DimModel {
  const ParamSpec* spec = nullptr;
  std::optional<ParzenEstimator> good_numeric;
  std::optional<ParzenEstimator> bad_numeric;
  std::optional<CategoricalEstimator> good_cat;
  std::optional<CategoricalEstimator> bad_cat;

  double log_ratio(const ParamValue& v) const {
    switch (spec->kind) {
      case ParamKind::kUniform:
      case ParamKind::kLogUniform: {
        const double x = to_model(*spec, v);
        return std::log(good_numeric->density(x)) - std::log(bad_numeric->density(x));
      }
      case ParamKind::kIntUniform: {
        const double x = to_model(*spec, v);
        return std::log(good_numeric->mass(x - 0.5, x + 0.5)) -
               std::log(bad_numeric->mass(x - 0.5, x + 0.5));
      }
      case ParamKind::kCategorical: {
        const auto c = choice_index(*spec, v);
        return std::log(good_cat->prob(c)) - std::log(bad_cat->prob(c));
      }
    }
    return 0.0;
  }

  ParamValue sample_good(Rng& rng) const {
    switch (spec->kind) {
      case ParamKind::kUniform:
        return std::clamp(good_numeric->sample(rng), spec->lo, spec->hi);
      case ParamKind::kLogUniform:
        return std::clamp(std::exp(good_numeric->sample(rng)), spec->lo, spec->hi);
      case ParamKind::kIntUniform: {
        const double x = std::round(good_numeric->sample(rng));
        return static_cast<std::int64_t>(std::clamp(x, spec->lo, spec->hi));
      }
      case ParamKind::kCategorical:
        return spec->choices[good_cat->sample(rng)];
    }
    return 0.0;
  }
};

struct TpeModel {
  std::vector<DimModel> dims;
  bool usable = false;
};

TpeModel build_model(const ParamSpace& space, const std::vector<TrialRecord>& history,
                     const TpeConfig& cfg) {
  TpeModel model;
  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < history.size(); ++t) {
    if (std::isfinite(history[t].loss)) {
      order.push_back(t);
    }
  }
  if (order.empty()) {
    return model;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return history[a].loss < history[b].loss;
  });
  const auto wanted = static_cast<std::size_t>(
      std::ceil(cfg.quantile_gamma * static_cast<double>(history.size())));
  const std::size_t n_good = std::clamp<std::size_t>(wanted, 1, order.size());
  std::vector<char> is_good(history.size(), 0);
  for (std::size_t r = 0; r < n_good; ++r) {
    is_good[order[r]] = 1;
  }

  for (const auto& spec : space.specs()) {
    DimModel dm;
    dm.spec = &spec;
    if (spec.kind == ParamKind::kCategorical) {
      std::vector<std::size_t> good;
      std::vector<std::size_t> bad;
      for (std::size_t t = 0; t < history.size(); ++t) {
        (is_good[t] ? good : bad).push_back(choice_index(spec, history[t].point.at(spec.name)));
      }
      dm.good_cat.emplace(good, spec.choices.size());
      dm.bad_cat.emplace(bad, spec.choices.size());
    } else {
      std::vector<double> good;
      std::vector<double> bad;
      for (std::size_t t = 0; t < history.size(); ++t) {
        (is_good[t] ? good : bad).push_back(to_model(spec, history[t].point.at(spec.name)));
      }
      const auto [lo, hi] = model_bounds(spec);
      dm.good_numeric.emplace(std::move(good), lo, hi);
      dm.bad_numeric.emplace(std::move(bad), lo, hi);
    }
    model.dims.push_back(std::move(dm));
  }
  model.usable = true;
  return model;
}

}  // namespace

ParamSpec ParamSpec::uniform(std::string name, double lo, double hi) {
  return {std::move(name), ParamKind::kUniform, lo, hi, {}};
}

ParamSpec ParamSpec::log_uniform(std::string name, double lo, double hi) {
  return {std::move(name), ParamKind::kLogUniform, lo, hi, {}};
}

ParamSpec ParamSpec::int_uniform(std::string name, std::int64_t lo, std::int64_t hi) {
  return {std::move(name), ParamKind::kIntUniform, static_cast<double>(lo),
          static_cast<double>(hi), {}};
}

ParamSpec ParamSpec::categorical(std::string name, std::vector<std::string> choices) {
  return {std::move(name), ParamKind::kCategorical, 0.0, 0.0, std::move(choices)};
}

void ParamSpec::validate() const {
  if (name.empty()) {
    throw ContractViolation("parameter name must not be empty");
  }
  switch (kind) {
    case ParamKind::kUniform:
      if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
        throw ContractViolation(name + ": uniform needs finite lo < hi");
      }
      break;
    case ParamKind::kLogUniform:
      if (!(std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && lo < hi)) {
        throw ContractViolation(name + ": log-uniform needs 0 < lo < hi");
      }
      break;
    case ParamKind::kIntUniform:
      if (!(lo <= hi) || lo != std::round(lo) || hi != std::round(hi)) {
        throw ContractViolation(name + ": integer range needs integral lo <= hi");
      }
      break;
    case ParamKind::kCategorical: {
      if (choices.empty()) {
        throw ContractViolation(name + ": categorical needs at least one choice");
      }
      const std::set<std::string> unique(choices.begin(), choices.end());
      if (unique.size() != choices.size()) {
        throw ContractViolation(name + ": duplicate categorical choices");
      }
      break;
    }
  }
}

const ParamValue& ParamPoint::at(const std::string& name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) {
    throw ContractViolation("parameter '" + name + "' missing from point");
  }
  return it->second;
}

double ParamPoint::real(const std::string& name) const {
  const auto& v = at(name);
  if (const auto* d = std::get_if<double>(&v)) {
    return *d;
  }
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    return static_cast<double>(*i);
  }
  const auto& s = std::get<std::string>(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ContractViolation("parameter '" + name + "' is not numeric");
  }
  return out;
}

std::int64_t ParamPoint::integer(const std::string& name) const {
  const double v = real(name);
  if (v != std::round(v)) {
    throw ContractViolation("parameter '" + name + "' is not an integer");
  }
  return static_cast<std::int64_t>(v);
}

const std::string& ParamPoint::choice(const std::string& name) const {
  const auto* s = std::get_if<std::string>(&at(name));
  if (s == nullptr) {
    throw ContractViolation("parameter '" + name + "' is not categorical");
  }
  return *s;
}

std::string format_value(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    return std::to_string(*i);
  }
  return std::get<std::string>(v);
}

ParamSpace::ParamSpace(std::vector<ParamSpec> specs) : specs_(std::move(specs)) {
  std::set<std::string> names;
  for (const auto& s : specs_) {
    s.validate();
    if (!names.insert(s.name).second) {
      throw ContractViolation("duplicate parameter name '" + s.name + "'");
    }
  }
}

bool ParamSpace::contains(const ParamPoint& p) const {
  for (const auto& s : specs_) {
    if (!p.has(s.name)) {
      return false;
    }
    const auto& v = p.at(s.name);
    switch (s.kind) {
      case ParamKind::kUniform:
      case ParamKind::kLogUniform: {
        const auto* d = std::get_if<double>(&v);
        if (d == nullptr || !(*d >= s.lo && *d <= s.hi)) {
          return false;
        }
        break;
      }
      case ParamKind::kIntUniform: {
        const auto* i = std::get_if<std::int64_t>(&v);
        if (i == nullptr || *i < s.lo || *i > s.hi) {
          return false;
        }
        break;
      }
      case ParamKind::kCategorical: {
        const auto* c = std::get_if<std::string>(&v);
        if (c == nullptr || std::find(s.choices.begin(), s.choices.end(), *c) == s.choices.end()) {
          return false;
        }
        break;
      }
    }
  }
  return true;
}

ParamSpace ParamSpace::svm() {
  return ParamSpace({ParamSpec::log_uniform("C", 1e-5, 1e5),
                     ParamSpec::log_uniform("gamma_rbf", 1e-5, 1e5)});
}

ParamSpace ParamSpace::xgboost() {
  return ParamSpace({ParamSpec::uniform("eta", 0.2, 0.6), ParamSpec::int_uniform("max_depth", 1, 13),
                     ParamSpec::int_uniform("min_child_weight", 1, 10),
                     ParamSpec::uniform("gamma", 0.0, 1.0),
                     ParamSpec::log_uniform("learning_rate", 1e-4, 1e-1)});
}

ParamSpace ParamSpace::lbp() {
  return ParamSpace(
      {ParamSpec::categorical("R", {"7", "8"}), ParamSpec::categorical("P", {"40", "48"})});
}

ParamSpace ParamSpace::operator+(const ParamSpace& other) const {
  auto specs = specs_;
  specs.insert(specs.end(), other.specs_.begin(), other.specs_.end());
  return ParamSpace(std::move(specs));
}

void TpeConfig::validate() const {
  if (!(quantile_gamma > 0.0 && quantile_gamma < 1.0) || n_startup < 1 || n_candidates < 1) {
    throw ContractViolation(
        "TPE config needs 0 < quantile_gamma < 1, n_startup >= 1, n_candidates >= 1");
  }
}

std::string to_string(SearchMethod m) { return m == SearchMethod::kRandom ? "random" : "tpe"; }

SearchMethod parse_search_method(const std::string& s) {
  if (s == "random") {
    return SearchMethod::kRandom;
  }
  if (s == "tpe") {
    return SearchMethod::kTpe;
  }
  throw ContractViolation("unknown search method '" + s + "' (expected random or tpe)");
}

ParamPoint sample_random(const ParamSpace& space, Rng& rng) {
  ParamPoint p;
  for (const auto& s : space.specs()) {
    p.set(s.name, sample_dim(s, rng));
  }
  return p;
}

double tpe_log_ratio(const ParamSpace& space, const std::vector<TrialRecord>& history,
                     const TpeConfig& cfg, const ParamPoint& point) {
  const TpeModel model = build_model(space, history, cfg);
  if (!model.usable) {
    return 0.0;
  }
  double score = 0.0;
  for (const auto& dm : model.dims) {
    score += dm.log_ratio(point.at(dm.spec->name));
  }
  return score;
}

ParamPoint tpe_suggest(const ParamSpace& space, const std::vector<TrialRecord>& history,
                       const TpeConfig& cfg, Rng& rng) {
  cfg.validate();
  if (history.size() < static_cast<std::size_t>(cfg.n_startup)) {
    return sample_random(space, rng);
  }
  const TpeModel model = build_model(space, history, cfg);
  if (!model.usable) {
    return sample_random(space, rng);
  }

  ParamPoint best;
  double best_score = -kInf;
  bool have_best = false;
  for (int c = 0; c < cfg.n_candidates; ++c) {
    ParamPoint candidate;
    double score = 0.0;
    for (const auto& dm : model.dims) {
      auto v = dm.sample_good(rng);
      score += dm.log_ratio(v);
      candidate.set(dm.spec->name, std::move(v));
    }
    if (!have_best || score > best_score) {
      best = std::move(candidate);
      best_score = score;
      have_best = true;
    }
  }
  return best;
}

TrialHistory run_search(const Objective& objective, const ParamSpace& space, std::size_t n_trials,
                        SearchMethod method, const TpeConfig& cfg, Rng& rng) {
  if (n_trials < 1) {
    throw ContractViolation("run_search needs n_trials >= 1");
  }
  cfg.validate();
  TrialHistory out;
  out.trials.reserve(n_trials);
  for (std::size_t t = 0; t < n_trials; ++t) {
    ParamPoint point = method == SearchMethod::kTpe ? tpe_suggest(space, out.trials, cfg, rng)
                                                    : sample_random(space, rng);
    double loss = objective(point, t);
    if (!std::isfinite(loss)) {
      loss = kInf;
    }
    out.trials.push_back({t, std::move(point), loss});
    if (t == 0 || loss < out.trials[out.best_index].loss) {
      out.best_index = t;
    }
  }
  return out;
}

void write_trial_log(const TrialHistory& history, const ParamSpace& space,
                     const std::filesystem::path& path, const std::string& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  if (!provenance.empty()) {
    out << "# " << provenance << '\n';
  }
  out << "trial_index,loss";
  for (const auto& s : space.specs()) {
    out << ',' << s.name;
  }
  out << '\n';
  char buf[32];
  for (const auto& t : history.trials) {
    std::snprintf(buf, sizeof(buf), "%.17g", t.loss);
    out << t.trial_index << ',' << (std::isfinite(t.loss) ? std::string(buf) : "inf");
    for (const auto& s : space.specs()) {
      out << ',' << format_value(t.point.at(s.name));
    }
    out << '\n';
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

}  // namespace lungcadx
