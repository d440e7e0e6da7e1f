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

#include "run_manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lungcadx/errors.hpp"

namespace lungcadx::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw FormatError("unknown key '" + key + "' in " + where);
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

RunManifest RunManifest::parse(const std::string& json_text, const std::filesystem::path& base_dir) {
  RunManifest m;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) {
      throw FormatError("manifest must be a JSON object");
    }
    reject_unknown(j,
                   {"dataset", "output", "classifiers", "methods", "budgets", "n_repeats",
                    "base_seed", "cube_side", "features", "threads", "gbt", "svm", "tpe"},
                   "manifest");
    if (!j.contains("dataset")) {
      throw FormatError("manifest needs a \"dataset\" path");
    }
    m.dataset = resolve(base_dir, j.at("dataset").get<std::string>());
    if (j.contains("output")) {
      m.output = resolve(base_dir, j.at("output").get<std::string>());
    } else {
      m.output = resolve(base_dir, "out");
    }
    if (j.contains("classifiers")) {
      m.classifiers.clear();
      for (const auto& c : j.at("classifiers")) {
        m.classifiers.push_back(parse_classifier(c.get<std::string>()));
      }
    }
    if (j.contains("methods")) {
      m.methods.clear();
      for (const auto& s : j.at("methods")) {
        m.methods.push_back(parse_search_method(s.get<std::string>()));
      }
    }
    if (j.contains("budgets")) {
      m.budgets.clear();
      for (const auto& b : j.at("budgets")) {
        if (!b.is_number_integer() || b.get<long long>() < 1) {
          throw FormatError("budgets must be positive integers");
        }
        m.budgets.push_back(b.get<std::size_t>());
      }
    }
    if (j.contains("n_repeats")) {
      const auto r = j.at("n_repeats").get<long long>();
      if (r < 1) {
        throw FormatError("n_repeats must be >= 1");
      }
      m.n_repeats = static_cast<std::size_t>(r);
    }
    if (j.contains("base_seed")) m.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("cube_side")) m.cube_side = j.at("cube_side").get<int>();
    if (j.contains("threads")) m.threads = j.at("threads").get<std::size_t>();
    if (j.contains("features")) {
      m.features.clear();
      for (const auto& f : j.at("features")) {
        if (!f.is_array() || f.size() != 2) {
          throw FormatError("features entries must be [R, P] pairs");
        }
        m.features.push_back({f[0].get<int>(), f[1].get<int>()});
      }
    }
    if (j.contains("gbt")) {
      const auto& g = j.at("gbt");
      reject_unknown(g, {"lambda", "num_rounds"}, "gbt");
      if (g.contains("lambda")) m.defaults.gbt.lambda = g.at("lambda").get<double>();
      if (g.contains("num_rounds")) m.defaults.gbt.num_rounds = g.at("num_rounds").get<int>();
    }
    if (j.contains("svm")) {
      const auto& s = j.at("svm");
      reject_unknown(s, {"tol", "max_passes", "max_updates"}, "svm");
      if (s.contains("tol")) m.defaults.svm.tol = s.at("tol").get<double>();
      if (s.contains("max_passes")) m.defaults.svm.max_passes = s.at("max_passes").get<int>();
      if (s.contains("max_updates")) m.defaults.svm.max_updates = s.at("max_updates").get<std::int64_t>();
    }
    if (j.contains("tpe")) {
      const auto& t = j.at("tpe");
      reject_unknown(t, {"quantile_gamma", "n_startup", "n_candidates"}, "tpe");
      if (t.contains("quantile_gamma")) m.tpe.quantile_gamma = t.at("quantile_gamma").get<double>();
      if (t.contains("n_startup")) m.tpe.n_startup = t.at("n_startup").get<int>();
      if (t.contains("n_candidates")) m.tpe.n_candidates = t.at("n_candidates").get<int>();
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("invalid manifest: ") + e.what());
  }
  if (m.classifiers.empty() || m.methods.empty() || m.budgets.empty() || m.features.empty()) {
    throw FormatError("manifest classifiers, methods, budgets and features must be non-empty");
  }
  try {
    m.tpe.validate();
    GbtParams probe = m.defaults.gbt;
    probe.validate();
    if (!(m.defaults.svm.tol > 0.0) || m.defaults.svm.max_passes < 1 ||
        m.defaults.svm.max_updates < 1) {
      throw ContractViolation("svm tol, max_passes and max_updates must be positive");
    }
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("invalid manifest: ") + e.what());
  }
  return m;
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open manifest " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

std::string RunManifest::canonical_json() const {
  json j;
  json cls = json::array();
  for (const auto c : classifiers) cls.push_back(to_string(c));
  j["classifiers"] = cls;
  json ms = json::array();
  for (const auto mm : methods) ms.push_back(to_string(mm));
  j["methods"] = ms;
  j["budgets"] = budgets;
  j["n_repeats"] = n_repeats;
  j["base_seed"] = base_seed;
  j["cube_side"] = cube_side;
  json fs = json::array();
  for (const auto& f : features) fs.push_back({f.radius, f.samples});
  j["features"] = fs;
  j["gbt"] = {{"lambda", defaults.gbt.lambda}, {"num_rounds", defaults.gbt.num_rounds}};
  j["svm"] = {{"tol", defaults.svm.tol},
              {"max_passes", defaults.svm.max_passes},
              {"max_updates", defaults.svm.max_updates}};
  j["tpe"] = {{"quantile_gamma", tpe.quantile_gamma},
              {"n_startup", tpe.n_startup},
              {"n_candidates", tpe.n_candidates}};
  return j.dump();
}

}  // namespace lungcadx::cli
