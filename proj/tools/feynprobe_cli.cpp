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

// feynprobe: scans and estimation campaigns for a spin-chain coupling probe.
//
//   feynprobe fisher-scan --m 1,2,3 --out-dir out
//   feynprobe bayes --config campaign.json --seeds 20
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "feynprobe/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

// Flag values land in `settings` only when given, so they override the file.
void add_settings_flags(CLI::App& cmd, feynprobe::Json& settings, std::string& config_path) {
  auto set = [&settings](const char* key) {
    return [&settings, key](const auto& v) { settings[key] = v; };
  };
  cmd.add_option("--config", config_path, "JSON settings file; flags override its keys");
  cmd.add_option_function<int>("--sites", set("sites"), "chain length s");
  cmd.add_option_function<int>("--x0", set("x0"), "initial excitation site");
  cmd.add_option_function<std::vector<int>>("--m", set("m"), "measured site(s)")->delimiter(',');
  cmd.add_option_function<double>("--lambda-min", set("lambda_min"), "grid lower end");
  cmd.add_option_function<double>("--lambda-max", set("lambda_max"), "grid upper end");
  cmd.add_option_function<std::size_t>("--grid-points", set("grid_points"), "grid size");
  cmd.add_option_function<std::vector<double>>("--lambda-true", set("lambda_true"), "true coupling(s)")
      ->delimiter(',');
  cmd.add_option_function<std::vector<std::uint64_t>>("--trials", set("trials"), "trial schedule M")
      ->delimiter(',');
  cmd.add_option_function<std::size_t>("--seeds", set("seeds"), "independent campaigns per setting");
  cmd.add_option_function<std::uint64_t>("--seed", set("seed"), "master seed");
  cmd.add_option_function<double>("--t-meas", set("t_meas"), "interaction time; reports nu = lambda/t");
  cmd.add_option_function<std::string>("--out-dir", set("out_dir"), "output directory");
  cmd.add_option_function<std::string>("--format", set("format"), "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd.add_option_function<std::vector<std::string>>("--models", set("models"), "LM, FP, FP+LM")
      ->delimiter(',');
  cmd.add_option_function<std::string>("--two-step", set("two_step"), "per-stage or split")
      ->check(CLI::IsMember({"per-stage", "split"}));
  cmd.add_option_function<unsigned>("--threads", set("threads"), "worker threads (0 = hardware)");
}

feynprobe::Json load_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw feynprobe::ConfigError("cannot read config file " + path);
  try {
    return feynprobe::Json::parse(in);
  } catch (const feynprobe::Json::exception& e) {
    throw feynprobe::ConfigError("config file " + path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-chain coupling estimation: Fisher scans and Bayesian campaigns"};
  app.require_subcommand(1);

  feynprobe::Json flags = feynprobe::Json::object();
  std::string config_path;
  std::vector<std::pair<CLI::App*, std::string>> commands;
  for (const auto& [name, cmd] : feynprobe::command_names()) {
    auto* sub = app.add_subcommand(name);
    add_settings_flags(*sub, flags, config_path);
    commands.emplace_back(sub, name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    std::string name;
    for (const auto& [sub, n] : commands) {
      if (sub->parsed()) name = n;
    }
    feynprobe::Json settings = config_path.empty() ? feynprobe::Json::object() : load_settings(config_path);
    if (!settings.is_object()) throw feynprobe::ConfigError("config file must hold a JSON object");
    settings.update(flags);
    if (!settings.contains("out_dir")) {
      if (const char* env = std::getenv("FEYNPROBE_OUT_DIR"); env && *env) settings["out_dir"] = env;
    }
    const auto cfg = feynprobe::ExperimentConfig::from_json(feynprobe::parse_command(name), settings);
    for (const auto& path : feynprobe::run_experiment(cfg)) std::cout << path.string() << "\n";
    return 0;
  } catch (const feynprobe::IoError& e) {
    std::cerr << "feynprobe: " << e.what() << "\n";
    return kExitIo;
  } catch (const feynprobe::ConfigError& e) {
    std::cerr << "feynprobe: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const feynprobe::Error& e) {
    std::cerr << "feynprobe: " << e.what() << "\n";
    return 1;
  }
}
