// Copyright 2026 The feynprobe Authors
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

// Experiment drivers behind the command-line front end.
//
// Every command is a pure function of its resolved configuration: outputs are
// generated in a fixed order, numbers use shortest round-trip formatting, and
// each file starts with the configuration that produced it.
//
// Settings keys (config file and flags share them):
//   sites, x0, m, lambda_min, lambda_max, grid_points, lambda_true, trials,
//   seeds, seed, t_meas, out_dir, format, models, two_step, threads

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "feynprobe/bayes.hpp"
#include "feynprobe/error.hpp"
#include "feynprobe/fisher.hpp"
#include "feynprobe/parallel.hpp"
#include "feynprobe/probe.hpp"
#include "json.hpp"

namespace feynprobe {

using Json = nlohmann::json;

enum class Command { FisherScan, ProbScan, Bayes, VarianceScan, Qfi };

inline const std::map<std::string, Command>& command_names() {
  static const std::map<std::string, Command> names{{"fisher-scan", Command::FisherScan},
                                                    {"prob-scan", Command::ProbScan},
                                                    {"bayes", Command::Bayes},
                                                    {"variance-scan", Command::VarianceScan},
                                                    {"qfi", Command::Qfi}};
  return names;
}

inline Command parse_command(const std::string& name) {
  const auto it = command_names().find(name);
  if (it == command_names().end()) throw ConfigError("unknown command '" + name + "'");
  return it->second;
}

inline std::string command_name(Command c) {
  for (const auto& [name, cmd] : command_names()) {
    if (cmd == c) return name;
  }
  return "?";
}

/// Two-step trial allocation: each stage gets the full M ("per-stage") or the
/// stages share M ("split", probe gets floor(M/2)).
enum class TwoStepMode { PerStage, Split };

struct ExperimentConfig {
  Command command = Command::FisherScan;
  int sites = ChainSpec::kDefaultSites;
  int x0 = 1;
  bool x0_given = false;
  std::vector<int> m;
  LambdaGrid grid;
  std::vector<double> lambda_true;
  std::vector<std::uint64_t> trials;
  std::size_t seeds = 1;
  std::uint64_t seed = 1;
  std::optional<double> t_meas;
  std::string out_dir = ".";
  std::string format = "csv";
  std::vector<std::string> models;
  TwoStepMode two_step = TwoStepMode::PerStage;
  unsigned threads = 0;

  ChainSpec chain() const { return ChainSpec(sites); }

  std::pair<std::uint64_t, std::uint64_t> stage_trials(std::uint64_t total) const {
    if (two_step == TwoStepMode::PerStage) return {total, total};
    const std::uint64_t fp = std::max<std::uint64_t>(1, total / 2);
    return {fp, total - fp};
  }

  /// Applies per-command defaults to `settings` and validates the result.
  static ExperimentConfig from_json(Command command, const Json& settings);

  /// Everything that determines output content (not out_dir or threads).
  Json to_json() const;
};

namespace detail {

inline const std::set<std::string>& settings_keys() {
  static const std::set<std::string> keys{
      "sites", "x0",     "m",      "lambda_min", "lambda_max", "grid_points", "lambda_true", "trials",
      "seeds", "seed",   "t_meas", "out_dir",    "format",     "models",      "two_step",    "threads"};
  return keys;
}

template <class T>
std::vector<T> as_list(const Json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

inline bool probe_allowed(const ChainSpec& spec, int m, int x0) {
  return m >= 1 && m <= spec.sites() - 1 && x0 <= m;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(Command command, const Json& settings) {
  if (!settings.is_object()) throw ConfigError("settings must be a JSON object");
  for (const auto& [key, value] : settings.items()) {
    if (!detail::settings_keys().contains(key)) throw ConfigError("unknown setting '" + key + "'");
  }
  ExperimentConfig c;
  c.command = command;
  const bool scan = command == Command::FisherScan || command == Command::ProbScan;
  try {
    c.sites = settings.value("sites", ChainSpec::kDefaultSites);
    c.x0_given = settings.contains("x0");
    c.x0 = settings.value("x0", 1);
    if (settings.contains("m")) {
      c.m = detail::as_list<int>(settings["m"]);
    } else if (command == Command::Bayes) {
      c.m = {2};
    } else {
      c.m = {1, 2, 3};
    }
    c.grid = scan ? LambdaGrid{0.0, 10.0, 1001} : LambdaGrid{0.0, 6.0, 4096};
    c.grid.lo = settings.value("lambda_min", c.grid.lo);
    c.grid.hi = settings.value("lambda_max", c.grid.hi);
    c.grid.points = settings.value("grid_points", c.grid.points);
    c.lambda_true = settings.contains("lambda_true") ? detail::as_list<double>(settings["lambda_true"])
                                                     : std::vector<double>{3.0};
    if (settings.contains("trials")) {
      c.trials = detail::as_list<std::uint64_t>(settings["trials"]);
    } else if (command == Command::VarianceScan) {
      c.trials = {100, 1000, 10000, 100000};
    } else {
      c.trials = {10000};
    }
    c.seeds = settings.value("seeds", command == Command::VarianceScan ? std::size_t{50} : std::size_t{1});
    c.seed = settings.value("seed", std::uint64_t{1});
    if (settings.contains("t_meas") && !settings["t_meas"].is_null()) c.t_meas = settings["t_meas"].get<double>();
    c.out_dir = settings.value("out_dir", std::string("."));
    c.format = settings.value("format", std::string("csv"));
    c.models = settings.contains("models") ? detail::as_list<std::string>(settings["models"])
                                           : std::vector<std::string>{"LM", "FP"};
    const std::string mode = settings.value("two_step", std::string("per-stage"));
    if (mode == "per-stage") {
      c.two_step = TwoStepMode::PerStage;
    } else if (mode == "split") {
      c.two_step = TwoStepMode::Split;
    } else {
      throw ConfigError("two_step must be 'per-stage' or 'split', got '" + mode + "'");
    }
    c.threads = settings.value("threads", 0u);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed setting: ") + e.what());
  }

  // Validation against module preconditions, before any computation.
  if (c.sites < 2) throw ConfigError("sites must be >= 2");
  const ChainSpec spec(c.sites);
  if (!spec.contains(c.x0)) throw ConfigError("x0 outside 1.." + std::to_string(c.sites));
  if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
  try {
    c.grid.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (command == Command::Qfi) return c;
  if (c.m.empty()) throw ConfigError("need at least one measured site m");
  for (int m : c.m) {
    if (!spec.contains(m)) throw ConfigError("m = " + std::to_string(m) + " outside 1.." + std::to_string(c.sites));
  }
  if (scan) return c;

  if (c.lambda_true.empty()) throw ConfigError("need at least one true lambda");
  for (double l : c.lambda_true) {
    if (!c.grid.contains(l)) throw ConfigError("true lambda " + std::to_string(l) + " outside the grid");
  }
  if (c.trials.empty()) throw ConfigError("need at least one trial count");
  for (auto t : c.trials) {
    if (t < 1) throw ConfigError("trial counts must be >= 1");
    if (c.two_step == TwoStepMode::Split && t < 2) throw ConfigError("split two-step needs >= 2 trials");
  }
  if (c.seeds < 1) throw ConfigError("seeds must be >= 1");
  if (c.t_meas && !(*c.t_meas > 0.0)) throw ConfigError("t_meas must be positive");
  std::vector<std::string> strategies =
      command == Command::VarianceScan ? std::vector<std::string>{"LM", "FP", "FP+LM"} : c.models;
  if (strategies.empty()) throw ConfigError("need at least one model");
  for (const auto& model : strategies) {
    if (model != "LM" && model != "FP" && model != "FP+LM") {
      throw ConfigError("model must be LM, FP or FP+LM, got '" + model + "'");
    }
    if (model == "LM") continue;
    for (int m : c.m) {
      if (!detail::probe_allowed(spec, m, c.x0)) {
        throw ConfigError("Feynman probe needs x0 <= m <= s-1 (m = " + std::to_string(m) +
                          ", x0 = " + std::to_string(c.x0) + ")");
      }
    }
  }
  return c;
}

inline Json ExperimentConfig::to_json() const {
  Json j;
  j["command"] = command_name(command);
  j["sites"] = sites;
  if (command == Command::Qfi) {
    if (x0_given) j["x0"] = x0;
    return j;
  }
  j["x0"] = x0;
  j["m"] = m;
  j["lambda_min"] = grid.lo;
  j["lambda_max"] = grid.hi;
  j["grid_points"] = grid.points;
  if (command == Command::Bayes || command == Command::VarianceScan) {
    j["lambda_true"] = lambda_true;
    j["trials"] = trials;
    j["seeds"] = seeds;
    j["seed"] = seed;
    j["two_step"] = two_step == TwoStepMode::PerStage ? "per-stage" : "split";
  }
  if (command == Command::Bayes) {
    j["models"] = models;
    j["t_meas"] = t_meas ? Json(*t_meas) : Json(nullptr);
  }
  return j;
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// `# <config json>`, header line, rows; '\n' line endings.
inline std::string render_csv(const Json& config, const Table& table) {
  std::string out = "# " + config.dump() + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      std::visit(detail::Overload{[&](double v) { out += format_double(v); },
                                  [&](std::int64_t v) { out += std::to_string(v); },
                                  [&](const std::string& v) { out += v; }},
                 row[i]);
    }
    out += "\n";
  }
  return out;
}

/// {"config": ..., "columns": [...], "rows": [[...], ...]}; NaN becomes null.
inline std::string render_json(const Json& config, const Table& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r = Json::array();
    for (const auto& cell : row) {
      std::visit([&](const auto& v) { r.push_back(v); }, cell);
    }
    rows.push_back(std::move(r));
  }
  const Json doc{{"config", config}, {"columns", table.columns}, {"rows", std::move(rows)}};
  return doc.dump() + "\n";
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::filesystem::path write_table(const ExperimentConfig& cfg, const std::string& stem,
                                         const Table& table) {
  const auto path = std::filesystem::path(cfg.out_dir) / (stem + "." + cfg.format);
  write_text(path, cfg.format == "csv" ? render_csv(cfg.to_json(), table) : render_json(cfg.to_json(), table));
  return path;
}

namespace detail {

inline const double kNaN = std::numeric_limits<double>::quiet_NaN();

inline std::vector<std::optional<MeasurementModel>> probe_models(const ExperimentConfig& cfg) {
  const ChainSpec spec = cfg.chain();
  std::vector<std::optional<MeasurementModel>> out;
  for (int m : cfg.m) {
    if (probe_allowed(spec, m, cfg.x0)) {
      out.emplace_back(MeasurementModel::probe(spec, m, cfg.x0));
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

}  // namespace detail

/// Rows (lambda, m, F_local, F_probe, H); lambda outer, m inner. F_probe is
/// NaN where no probe can be plugged (m = s or x0 > m).
inline Table fisher_scan_table(const ExperimentConfig& cfg) {
  const ChainSpec spec = cfg.chain();
  const double h = qfi(spec, cfg.x0);
  std::vector<MeasurementModel> local;
  for (int m : cfg.m) local.push_back(MeasurementModel::local(spec, m, cfg.x0));
  const auto probe = detail::probe_models(cfg);
  Table t{{"lambda", "m", "F_local", "F_probe", "H"}, {}};
  for (std::size_t i = 0; i < cfg.grid.points; ++i) {
    const double lambda = cfg.grid.node(i);
    for (std::size_t k = 0; k < cfg.m.size(); ++k) {
      const double fp = probe[k] ? probe[k]->fisher(lambda) : detail::kNaN;
      t.rows.push_back({lambda, std::int64_t{cfg.m[k]}, local[k].fisher(lambda), fp, h});
    }
  }
  return t;
}

/// Rows (lambda, m, P_local, P_probe).
inline Table probability_scan_table(const ExperimentConfig& cfg) {
  const ChainSpec spec = cfg.chain();
  std::vector<MeasurementModel> local;
  for (int m : cfg.m) local.push_back(MeasurementModel::local(spec, m, cfg.x0));
  const auto probe = detail::probe_models(cfg);
  Table t{{"lambda", "m", "P_local", "P_probe"}, {}};
  for (std::size_t i = 0; i < cfg.grid.points; ++i) {
    const double lambda = cfg.grid.node(i);
    for (std::size_t k = 0; k < cfg.m.size(); ++k) {
      const double pp = probe[k] ? probe[k]->probability(lambda) : detail::kNaN;
      t.rows.push_back({lambda, std::int64_t{cfg.m[k]}, local[k].probability(lambda), pp});
    }
  }
  return t;
}

/// Rows (x0, family, H, sld_eigenvalue) for the requested site, or every site.
inline Table qfi_table(const ExperimentConfig& cfg) {
  const ChainSpec spec = cfg.chain();
  Table t{{"x0", "family", "H", "sld_eigenvalue"}, {}};
  const int lo = cfg.x0_given ? cfg.x0 : 1;
  const int hi = cfg.x0_given ? cfg.x0 : spec.sites();
  for (int x0 = lo; x0 <= hi; ++x0) {
    const auto sys = sld_eigensystem(spec, x0, 0.0);
    t.rows.push_back({std::int64_t{x0}, std::string(sys.family == SldFamily::Extremal ? "E" : "NE"),
                      qfi(spec, x0), sys.eigenvalues[1]});
  }
  return t;
}

inline Json report_to_json(const EstimateReport& r) {
  Json peaks = Json::array();
  for (const auto& p : r.peaks) peaks.push_back({{"location", p.location}, {"height", p.height}});
  Json j{{"descriptor", r.model},
         {"lambda_true", r.lambda_true},
         {"lambda_hat", r.lambda_hat},
         {"variance", r.variance},
         {"peaks", std::move(peaks)},
         {"peak_count", r.peaks.size()},
         {"trials", r.trials},
         {"successes", r.successes},
         {"cr_bound", r.cr_bound},
         {"qcr_bound", r.qcr_bound}};
  if (r.t_meas) {
    j["t_meas"] = *r.t_meas;
    j["nu"] = *r.nu;
  }
  return j;
}

struct BayesOutput {
  Json report;
  Table posterior;
};

/// One estimation run per (model, m, lambda_T, M, seed index), in that
/// nesting order. Seed index k uses campaign seed derive_seed(seed, k).
/// A degenerate posterior is recorded as a failed entry.
inline BayesOutput bayes_experiment(const ExperimentConfig& cfg) {
  const ChainSpec spec = cfg.chain();
  struct Task {
    std::string model;
    std::size_t m_index;
    double lambda_true;
    std::uint64_t trials;
    std::size_t seed_index;
  };
  std::vector<Task> tasks;
  for (const auto& model : cfg.models) {
    for (std::size_t mi = 0; mi < cfg.m.size(); ++mi) {
      for (double lt : cfg.lambda_true) {
        for (auto trials : cfg.trials) {
          for (std::size_t k = 0; k < cfg.seeds; ++k) tasks.push_back({model, mi, lt, trials, k});
        }
      }
    }
  }
  std::vector<std::optional<TabulatedModel>> local(cfg.m.size()), probe(cfg.m.size());
  for (std::size_t mi = 0; mi < cfg.m.size(); ++mi) {
    local[mi].emplace(MeasurementModel::local(spec, cfg.m[mi], cfg.x0), cfg.grid);
    if (detail::probe_allowed(spec, cfg.m[mi], cfg.x0)) {
      probe[mi].emplace(MeasurementModel::probe(spec, cfg.m[mi], cfg.x0), cfg.grid);
    }
  }

  struct Outcome {
    std::optional<EstimateReport> report;
    std::string error;
    PosteriorGrid posterior;
  };
  const auto outcomes = parallel_map(
      tasks.size(),
      [&](std::size_t i) {
        const Task& task = tasks[i];
        const std::uint64_t campaign = derive_seed(cfg.seed, task.seed_index);
        Outcome out;
        try {
          EstimateReport r;
          if (task.model == "LM") {
            r = estimate(*local[task.m_index], task.lambda_true, task.trials, campaign, &out.posterior);
          } else if (task.model == "FP") {
            r = estimate(*probe[task.m_index], task.lambda_true, task.trials, campaign, &out.posterior);
          } else {
            const auto [m1, m2] = cfg.stage_trials(task.trials);
            r = two_step_estimate(*probe[task.m_index], *local[task.m_index], task.lambda_true, m1, m2,
                                  campaign, &out.posterior);
          }
          if (cfg.t_meas) r.set_measurement_time(*cfg.t_meas);
          out.report = std::move(r);
        } catch (const DegeneratePosterior& e) {
          out.error = e.what();
        }
        return out;
      },
      cfg.threads);

  BayesOutput result;
  Json results = Json::array();
  result.posterior.columns = {"model", "m", "lambda_true", "trials", "seed_index", "lambda", "weight"};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& task = tasks[i];
    Json entry{{"model", task.model},
               {"m", cfg.m[task.m_index]},
               {"lambda_true", task.lambda_true},
               {"trials", task.trials},
               {"seed_index", task.seed_index},
               {"seed", derive_seed(cfg.seed, task.seed_index)}};
    const Outcome& out = outcomes[i];
    if (!out.report) {
      entry["status"] = "failed";
      entry["error"] = out.error;
      results.push_back(std::move(entry));
      continue;
    }
    entry["status"] = "ok";
    entry.update(report_to_json(*out.report));
    results.push_back(std::move(entry));
    for (std::size_t n = 0; n < out.posterior.weights.size(); ++n) {
      result.posterior.rows.push_back({task.model, std::int64_t{cfg.m[task.m_index]}, task.lambda_true,
                                       static_cast<std::int64_t>(task.trials),
                                       static_cast<std::int64_t>(task.seed_index), cfg.grid.node(n),
                                       out.posterior.weights[n]});
    }
  }
  result.report = Json{{"config", cfg.to_json()}, {"results", std::move(results)}};
  return result;
}

/// Seed-averaged posterior variance per (lambda_T, M, m, strategy) with the
/// CR bounds of LM and FP and the quantum bound, all for M trials.
inline Table variance_scan_table(const ExperimentConfig& cfg) {
  const ChainSpec spec = cfg.chain();
  const double h = qfi(spec, cfg.x0);
  std::vector<TabulatedModel> local, probe;
  for (int m : cfg.m) {
    local.emplace_back(MeasurementModel::local(spec, m, cfg.x0), cfg.grid);
    probe.emplace_back(MeasurementModel::probe(spec, m, cfg.x0), cfg.grid);
  }
  static const std::vector<std::string> kStrategies{"LM", "FP", "FP+LM"};
  Table t{{"lambda_true", "M", "m", "strategy", "sigma2_mean", "sigma2_sem", "lambda_hat_mean", "cr_LM", "cr_FP",
           "qcr"},
          {}};
  for (double lt : cfg.lambda_true) {
    for (auto trials : cfg.trials) {
      for (std::size_t mi = 0; mi < cfg.m.size(); ++mi) {
        const double mt = static_cast<double>(trials);
        const double cr_lm = detail::bound_or_nan(mt * local[mi].model.fisher(lt));
        const double cr_fp = detail::bound_or_nan(mt * probe[mi].model.fisher(lt));
        const double qcr = qcr_bound(h, mt);
        for (const auto& strategy : kStrategies) {
          const auto runs = parallel_map(
              cfg.seeds,
              [&](std::size_t k) {
                const std::uint64_t campaign = derive_seed(cfg.seed, k);
                if (strategy == "LM") return estimate(local[mi], lt, trials, campaign);
                if (strategy == "FP") return estimate(probe[mi], lt, trials, campaign);
                const auto [m1, m2] = cfg.stage_trials(trials);
                return two_step_estimate(probe[mi], local[mi], lt, m1, m2, campaign);
              },
              cfg.threads);
          double sum = 0.0, sum_hat = 0.0;
          for (const auto& r : runs) sum += r.variance, sum_hat += r.lambda_hat;
          const double n = static_cast<double>(runs.size());
          const double mean = sum / n;
          double ss = 0.0;
          for (const auto& r : runs) ss += (r.variance - mean) * (r.variance - mean);
          const double sem = runs.size() > 1 ? std::sqrt(ss / (n - 1) / n) : detail::kNaN;
          t.rows.push_back({lt, static_cast<std::int64_t>(trials), std::int64_t{cfg.m[mi]}, strategy, mean, sem,
                            sum_hat / n, cr_lm, cr_fp, qcr});
        }
      }
    }
  }
  return t;
}

/// Runs a command and returns the files it wrote.
inline std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.command) {
    case Command::FisherScan:
      return {write_table(cfg, "fisher_scan", fisher_scan_table(cfg))};
    case Command::ProbScan:
      return {write_table(cfg, "prob_scan", probability_scan_table(cfg))};
    case Command::Qfi:
      return {write_table(cfg, "qfi", qfi_table(cfg))};
    case Command::VarianceScan:
      return {write_table(cfg, "variance_scan", variance_scan_table(cfg))};
    case Command::Bayes: {
      const BayesOutput out = bayes_experiment(cfg);
      const auto report = std::filesystem::path(cfg.out_dir) / "bayes_report.json";
      write_text(report, out.report.dump(1) + "\n");
      return {report, write_table(cfg, "bayes_posterior", out.posterior)};
    }
  }
  return {};
}

}  // namespace feynprobe
