// Copyright 2026 The anonreach Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// anonreach <command> <config.json> [--seed N] [--trials N] [--out DIR]
//                                   [--format csv|json]

#include <cstdint>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "anonreach.hpp"

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  std::string format = "csv";
};

int Run(anonreach::Scenario expected, const Options& opt) {
  using namespace anonreach;
  ExperimentConfig cfg = load_config(opt.config_path);
  if (cfg.scenario != expected) {
    throw ConfigError(opt.config_path + ": scenario is '" + ScenarioName(cfg.scenario) +
                      "', this command runs '" + ScenarioName(expected) + "'");
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.trials) cfg.trials = *opt.trials;
  if (opt.out) cfg.output = *opt.out;
  validate_config(cfg);
  const auto result = run_experiment(cfg);
  const auto format = opt.format == "json" ? OutputFormat::kJson : OutputFormat::kCsv;
  for (const auto& path : emit_results(result, cfg.output, format)) std::cout << path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using anonreach::Scenario;
  CLI::App app{"Reach measurement and bidding under k-anonymous ad requests"};
  app.require_subcommand(1);
  Options opt;
  const std::map<std::string, std::pair<Scenario, std::string>> commands = {
      {"measure", {Scenario::kMeasure, "Expected reach, spread and bounds of an impression log"}},
      {"simulate", {Scenario::kSimulate, "Campaigns under one discount, with a bid trace"}},
      {"sweep-k", {Scenario::kGroupSize, "Relative ROAS across group sizes"}},
      {"coverage", {Scenario::kCoverage, "ROAS across targeted coverage levels"}},
      {"abcd", {Scenario::kApproaches, "Measurement error and ROAS of approaches A to D"}},
      {"mc", {Scenario::kReachDistribution, "Monte Carlo reach distributions"}},
  };
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.second);
    sub->add_option("config", opt.config_path, "Experiment config (JSON)")->required();
    sub->add_option("--seed", opt.seed, "Override the master seed");
    sub->add_option("--trials", opt.trials, "Override the trial count")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
  }
  CLI11_PARSE(app, argc, argv);
  try {
    for (const auto& [name, entry] : commands) {
      if (app.got_subcommand(name)) return Run(entry.first, opt);
    }
  } catch (const anonreach::ConfigError& e) {
    std::cerr << "anonreach: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "anonreach: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
