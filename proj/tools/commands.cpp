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

#include "commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lungcadx/errors.hpp"
#include "lungcadx/parallel.hpp"
#include "lungcadx/random.hpp"
#include "lungcadx/texture.hpp"
#include "lungcadx/volume.hpp"

namespace lungcadx::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kFeatureFormatVersion = "lbp-top-riu2-v1";
constexpr const char* kSummaryHeader = "algorithm,n_trials,validation_loss,auc,accuracy";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Runs `write(tmp)` then renames tmp over `path`.
template <typename Writer>
void write_atomically(const fs::path& path, Writer&& write) {
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    write(tmp);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot publish " + path.string());
  }
}

void write_text_atomically(const fs::path& path, const std::string& text) {
  write_atomically(path, [&](const fs::path& tmp) {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) {
      throw IoError("cannot write " + tmp.string());
    }
  });
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
}

std::string provenance(const std::string& hash) { return "config_hash=" + hash; }

std::string features_hash(const FeaturesOptions& opts, const std::string& manifest_bytes,
                          const FeatureKey& key) {
  std::ostringstream text;
  text << kFeatureFormatVersion << "|side=" << opts.cube_side << "|R=" << key.radius
       << "|P=" << key.samples << '|' << manifest_bytes;
  return config_hash(text.str());
}

struct CellRow {
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  double validation_loss = 0.0;
  double auc = 0.0;
  double accuracy = 0.0;
};

struct Cell {
  ClassifierKind classifier;
  SearchMethod method;
  std::size_t n_trials;
  std::string id;
  std::string hash;
  std::vector<CellRow> rows;
};

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<CellRow> read_cell_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  std::vector<CellRow> rows;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.starts_with('#')) {
      continue;
    }
    if (!header) {
      header = true;
      continue;
    }
    CellRow r;
    char comma;
    std::istringstream s(line);
    s >> r.repeat >> comma >> r.seed >> comma >> r.validation_loss >> comma >> r.auc >> comma >>
        r.accuracy;
    if (!s) {
      throw FormatError(path.string() + ": bad row '" + line + "'");
    }
    rows.push_back(r);
  }
  return rows;
}

void write_cell_outputs(const fs::path& dir, const Cell& cell, const ExperimentReport& report,
                        const ParamSpace& space) {
  make_dirs(dir);
  const std::string prov = provenance(cell.hash);
  nlohmann::json histories = nlohmann::json::array();
  for (const auto& row : report.repeats) {
    const std::string suffix = "_r" + std::to_string(row.repeat) + ".csv";
    write_atomically(dir / ("trials" + suffix), [&](const fs::path& tmp) {
      write_trial_log(row.history, space, tmp, prov);
    });
    const auto roc = roc_curve(row.best_fit.probabilities, row.best_fit.labels);
    write_atomically(dir / ("roc" + suffix), [&](const fs::path& tmp) { write_roc_csv(roc, tmp); });

    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : row.history.trials) {
      nlohmann::json params;
      for (const auto& [name, value] : t.point.values()) {
        params[name] = format_value(value);
      }
      trials.push_back({{"trial_index", t.trial_index},
                        {"loss", std::isfinite(t.loss) ? nlohmann::json(t.loss) : nlohmann::json("inf")},
                        {"params", params}});
    }
    histories.push_back({{"repeat", row.repeat},
                         {"seed", row.seed},
                         {"best_trial", row.history.best().trial_index},
                         {"trials", trials}});
  }
  write_text_atomically(dir / "history.json", histories.dump(1) + "\n");

  std::ostringstream csv;
  csv << "# " << prov << '\n' << "repeat,seed,validation_loss,auc,accuracy\n";
  for (const auto& r : cell.rows) {
    csv << r.repeat << ',' << r.seed << ',' << exact(r.validation_loss) << ',' << exact(r.auc)
        << ',' << exact(r.accuracy) << '\n';
  }
  write_text_atomically(dir / "cell.csv", csv.str());
  // Resume marker, published last.
  write_text_atomically(dir / "DONE", cell.hash + "\n");
}

ExperimentReport to_report(const Cell& cell) {
  ExperimentReport rep;
  rep.config.classifier = cell.classifier;
  rep.config.method = cell.method;
  rep.config.n_trials = cell.n_trials;
  rep.config.n_repeats = cell.rows.size();
  for (const auto& r : cell.rows) {
    RepeatResult rr;
    rr.repeat = r.repeat;
    rr.seed = r.seed;
    rr.validation_loss = r.validation_loss;
    rr.auc = r.auc;
    rr.accuracy = r.accuracy;
    rep.repeats.push_back(std::move(rr));
    rep.mean_validation_loss += r.validation_loss;
    rep.mean_auc += r.auc;
    rep.mean_accuracy += r.accuracy;
  }
  const auto n = static_cast<double>(std::max<std::size_t>(cell.rows.size(), 1));
  rep.mean_validation_loss /= n;
  rep.mean_auc /= n;
  rep.mean_accuracy /= n;
  return rep;
}

ParamSpace search_space(ClassifierKind kind, const std::vector<FeatureKey>& combos) {
  std::set<int> radii;
  std::set<int> samples;
  for (const auto& k : combos) {
    radii.insert(k.radius);
    samples.insert(k.samples);
  }
  if (radii.size() * samples.size() != combos.size()) {
    throw FormatError("feature combos must form a full R x P grid");
  }
  std::vector<std::string> r_choices;
  std::vector<std::string> p_choices;
  for (const int r : radii) r_choices.push_back(std::to_string(r));
  for (const int p : samples) p_choices.push_back(std::to_string(p));
  const ParamSpace lbp({ParamSpec::categorical("R", r_choices), ParamSpec::categorical("P", p_choices)});
  return (kind == ClassifierKind::kSvm ? ParamSpace::svm() : ParamSpace::xgboost()) + lbp;
}

}  // namespace

std::string config_hash(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

fs::path resolve_cache_dir(const fs::path& dataset, const std::optional<fs::path>& flag) {
  if (flag) {
    return *flag;
  }
  if (const char* env = std::getenv(kCacheDirEnv); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return dataset / "features";
}

std::string feature_file_name(const FeatureKey& key) {
  return "features_R" + std::to_string(key.radius) + "_P" + std::to_string(key.samples) + ".csv";
}

FeatureCache ensure_features(const FeaturesOptions& opts, std::ostream& log) {
  const fs::path manifest_path = opts.dataset / "nodules.csv";
  const std::string manifest_bytes = read_file(manifest_path);
  const auto nodules = read_manifest(manifest_path);
  if (nodules.empty()) {
    throw FormatError(manifest_path.string() + " lists no nodules");
  }
  const fs::path cache_dir = resolve_cache_dir(opts.dataset, opts.cache_dir);

  std::vector<std::string> hashes;
  bool fresh = true;
  for (const auto& key : opts.combos) {
    hashes.push_back(features_hash(opts, manifest_bytes, key));
    const fs::path file = cache_dir / feature_file_name(key);
    if (!fs::exists(file) || read_provenance_line(file) != provenance(hashes.back())) {
      fresh = false;
    }
  }

  if (fresh) {
    log << "feature cache up to date: " << cache_dir.string() << '\n';
  } else {
    make_dirs(cache_dir);
    std::vector<LbpParams> params;
    for (const auto& key : opts.combos) {
      params.push_back({static_cast<double>(key.radius), key.samples});
    }
    std::vector<std::vector<FeatureVector>> per_nodule(nodules.size());
    parallel_for(nodules.size(), opts.jobs, [&](std::size_t i) {
      const auto& ref = nodules[i];
      try {
        const Volume raw = load_volume(opts.dataset / "volumes" / ref.volume_id);
        const Volume cube = crop_cube(resample_isotropic(raw), ref.center, opts.cube_side);
        for (const auto& p : params) {
          per_nodule[i].push_back(lbp_top(cube, p));
        }
      } catch (const Error& e) {
        throw Error("volume '" + ref.volume_id + "': " + e.what());
      }
    });
    for (std::size_t c = 0; c < opts.combos.size(); ++c) {
      LabeledDataset data;
      for (std::size_t i = 0; i < nodules.size(); ++i) {
        data.add(nodules[i].volume_id, per_nodule[i][c].values, nodules[i].label);
      }
      const fs::path file = cache_dir / feature_file_name(opts.combos[c]);
      write_atomically(file, [&](const fs::path& tmp) {
        write_feature_csv(data, tmp, provenance(hashes[c]));
      });
      log << "wrote " << file.string() << '\n';
    }
  }

  FeatureCache cache;
  for (const auto& key : opts.combos) {
    cache.emplace(key, read_feature_csv(cache_dir / feature_file_name(key)));
  }
  return cache;
}

int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const auto instances = generate_dataset(opts.config);
    const auto manifest = write_dataset(instances, opts.out);
    out << manifest.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "synth: " << e.what() << '\n';
    return 1;
  }
}

int cmd_features(const FeaturesOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const auto cache = ensure_features(opts, out);
    out << "feature sets: " << cache.size() << ", instances: " << cache.begin()->second.size()
        << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "features: " << e.what() << '\n';
    return 1;
  }
}

int cmd_optimize(const OptimizeOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    RunManifest m = RunManifest::load(opts.manifest);
    if (opts.out) m.output = *opts.out;
    if (opts.seed) m.base_seed = *opts.seed;

    FeaturesOptions fopts;
    fopts.dataset = m.dataset;
    fopts.cache_dir = opts.cache_dir;
    fopts.combos = m.features;
    fopts.cube_side = m.cube_side;
    fopts.jobs = opts.jobs;
    const FeatureCache cache = ensure_features(fopts, out);
    std::string feature_key;
    for (const auto& [key, data] : cache) {
      feature_key += read_provenance_line(resolve_cache_dir(m.dataset, opts.cache_dir) /
                                          feature_file_name(key));
    }

    std::vector<std::size_t> budgets = m.budgets;
    std::sort(budgets.begin(), budgets.end());
    budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());

    std::vector<Cell> cells;
    for (const auto clf : m.classifiers) {
      for (const auto method : m.methods) {
        for (const auto n : budgets) {
          Cell c{clf, method, n, to_string(clf) + "_" + to_string(method) + "_" + std::to_string(n), {}, {}};
          nlohmann::json desc{{"classifier", to_string(clf)},
                              {"method", to_string(method)},
                              {"n_trials", n},
                              {"n_repeats", m.n_repeats},
                              {"base_seed", m.base_seed},
                              {"features", feature_key},
                              {"gbt", {m.defaults.gbt.lambda, m.defaults.gbt.num_rounds}},
                              {"svm",
                               {m.defaults.svm.tol, m.defaults.svm.max_passes,
                                m.defaults.svm.max_updates}},
                              {"tpe",
                               {m.tpe.quantile_gamma, m.tpe.n_startup, m.tpe.n_candidates}}};
          c.hash = config_hash(desc.dump());
          cells.push_back(std::move(c));
        }
      }
    }

    const fs::path cells_dir = m.output / "cells";
    make_dirs(cells_dir);
    std::mutex log_mutex;
    parallel_for(cells.size(), opts.jobs, [&](std::size_t i) {
      Cell& cell = cells[i];
      const fs::path dir = cells_dir / cell.id;
      if (opts.resume && fs::exists(dir / "DONE")) {
        std::string marker = read_file(dir / "DONE");
        if (marker == cell.hash + "\n") {
          cell.rows = read_cell_csv(dir / "cell.csv");
          std::lock_guard lock(log_mutex);
          out << "cell " << cell.id << ": resumed\n";
          return;
        }
      }
      ExperimentConfig cfg;
      cfg.classifier = cell.classifier;
      cfg.method = cell.method;
      cfg.n_trials = cell.n_trials;
      cfg.n_repeats = m.n_repeats;
      cfg.base_seed = m.base_seed;
      cfg.space = search_space(cell.classifier, m.features);
      cfg.tpe = m.tpe;
      cfg.defaults = m.defaults;
      cfg.threads = m.threads;
      const ExperimentReport report = run_experiment(cfg, cache);
      for (const auto& r : report.repeats) {
        cell.rows.push_back({r.repeat, r.seed, r.validation_loss, r.auc, r.accuracy});
      }
      write_cell_outputs(dir, cell, report, cfg.space);
      std::lock_guard lock(log_mutex);
      out << "cell " << cell.id << ": computed\n";
    });

    const std::string prov = provenance(config_hash(m.canonical_json() + feature_key));
    for (const auto clf : m.classifiers) {
      std::vector<ExperimentReport> reports;
      for (const auto& cell : cells) {
        if (cell.classifier == clf) {
          reports.push_back(to_report(cell));
        }
      }
      const fs::path raw = m.output / ("raw_" + to_string(clf) + ".csv");
      const fs::path summary = m.output / ("summary_" + to_string(clf) + ".csv");
      write_atomically(raw, [&](const fs::path& tmp) { write_raw_csv(reports, tmp, prov); });
      write_atomically(summary, [&](const fs::path& tmp) { write_summary_csv(reports, tmp, prov); });
      out << "wrote " << summary.string() << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    err << "optimize: " << e.what() << '\n';
    return 1;
  }
}

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(opts.input);
    if (!in) {
      throw IoError("cannot open " + opts.input.string());
    }
    std::string line;
    std::string prov;
    bool header = false;
    struct Row {
      std::string algorithm;
      std::size_t n_trials;
      std::array<std::string, 3> metrics;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
      if (line.starts_with("# ")) {
        if (prov.empty()) prov = line.substr(2);
        continue;
      }
      if (line.empty()) {
        continue;
      }
      if (!header) {
        if (line != kSummaryHeader) {
          throw FormatError(opts.input.string() + ": expected header " + kSummaryHeader);
        }
        header = true;
        continue;
      }
      std::vector<std::string> f;
      std::istringstream s(line);
      std::string field;
      while (std::getline(s, field, ',')) {
        f.push_back(field);
      }
      if (f.size() != 5) {
        throw FormatError(opts.input.string() + ": bad row '" + line + "'");
      }
      parse_table_label(f[0]);
      rows.push_back({f[0], static_cast<std::size_t>(std::stoull(f[1])), {f[2], f[3], f[4]}});
    }
    if (rows.empty()) {
      throw FormatError(opts.input.string() + " contains no data rows");
    }

    std::vector<std::string> methods;
    std::set<std::size_t> budgets;
    std::map<std::pair<std::string, std::size_t>, const Row*> index;
    for (const auto& r : rows) {
      if (std::find(methods.begin(), methods.end(), r.algorithm) == methods.end()) {
        methods.push_back(r.algorithm);
      }
      budgets.insert(r.n_trials);
      index[{r.algorithm, r.n_trials}] = &r;
    }

    make_dirs(opts.out);
    const std::array<std::string, 3> names{"validation_loss", "auc", "accuracy"};
    for (std::size_t k = 0; k < names.size(); ++k) {
      std::ostringstream csv;
      if (!prov.empty()) {
        csv << "# " << prov << '\n';
      }
      csv << "n_trials";
      for (const auto& mth : methods) csv << ',' << mth;
      csv << '\n';
      for (const auto b : budgets) {
        csv << b;
        for (const auto& mth : methods) {
          const auto it = index.find({mth, b});
          csv << ',' << (it == index.end() ? std::string() : it->second->metrics[k]);
        }
        csv << '\n';
      }
      write_text_atomically(opts.out / (names[k] + ".csv"), csv.str());
    }

    if (opts.table) {
      out << std::left << std::setw(10) << "Algorithm" << std::setw(10) << "Trials"
          << std::setw(18) << "Validation loss" << std::setw(8) << "AUC" << "Accuracy\n";
      for (const auto& r : rows) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%-10s%-10zu%-18.3f%-8.3f%.3f\n", r.algorithm.c_str(),
                      r.n_trials, std::stod(r.metrics[0]), std::stod(r.metrics[1]),
                      std::stod(r.metrics[2]));
        out << buf;
      }
    }
    return 0;
  } catch (const std::exception& e) {
    err << "report: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace lungcadx::cli
