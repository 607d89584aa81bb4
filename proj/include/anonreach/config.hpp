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

// Experiment configuration and its JSON form. Parsing is strict: unknown
// keys, wrong types and missing required keys are ConfigErrors naming the
// offending path.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "anonreach/auction.hpp"
#include "anonreach/error.hpp"
#include "anonreach/population.hpp"
#include "anonreach/simulation.hpp"

namespace anonreach {

inline constexpr int kSchemaVersion = 1;

enum class Scenario {
  kMeasure,           // closed-form measurement of one impression log
  kSimulate,          // campaigns under one discount, with a bid trace
  kReachDistribution, // Monte Carlo reach distributions
  kGroupSize,         // ROAS against group size
  kCoverage,          // ROAS against targeted coverage
  kApproaches,        // measurement and bidding approaches side by side
};

struct PopulationSpec {
  int num_users = 120;
  int group_size = 6;
  bool overlapping = false;
  int num_groups = 0;  // overlapping groups only
  std::string targeting = "all";  // all | count | fraction
  int targeted_count = 0;
  double targeted_fraction = 1.0;
  Placement placement = Placement::kRandom;
  int spread_groups = 0;
  std::string property_vector = "uniform";  // uniform | geometric | explicit
  double geometric_ratio = 0.6;
  std::vector<double> property_values;

  bool operator==(const PopulationSpec&) const = default;
};

struct StreamSpec {
  std::int64_t num_requests = 2000;
  // When positive, T is this rate times the number of users requests can
  // come from, and num_requests is ignored.
  double requests_per_user = 0.0;
  ArrivalMode arrival = ArrivalMode::kTargetedUsers;

  bool operator==(const StreamSpec&) const = default;
};

struct CampaignSpec {
  int cap = 1;
  // At most one of the three budget forms may be set.
  std::optional<double> budget;
  std::optional<double> budget_fraction;  // of T times the mean price
  std::optional<double> budget_per_targeted_user;
  double learning_rate = 0.1;
  double initial_lambda = 10.0;
  double bid_floor = 0.1;
  double bid_cap = 10.0;
  double price_mu = 0.0;
  double price_sigma2 = 0.5;
  Discount discount = Discount::kUniform;

  bool operator==(const CampaignSpec&) const = default;
};

struct SweepSpec {
  std::string axis = "none";  // none | k | spread_groups | approach
  std::vector<double> values;
  std::vector<Discount> approaches;

  bool operator==(const SweepSpec&) const = default;
};

// Reach-distribution experiment: one reference point, a sweep over
// impression counts and a sweep over group sizes.
struct DistributionSpec {
  std::int64_t reference_impressions = 250;
  std::vector<std::int64_t> impression_values;
  std::vector<int> k_values;

  bool operator==(const DistributionSpec&) const = default;
};

// Impression log to measure: explicit per-group counts, or `count` wins
// drawn from the stream spec.
struct ImpressionSpec {
  std::vector<std::int64_t> wins_per_group;
  std::int64_t count = 0;

  bool operator==(const ImpressionSpec&) const = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  Scenario scenario = Scenario::kMeasure;
  PopulationSpec population;
  StreamSpec stream;
  CampaignSpec campaign;
  SweepSpec sweep;
  DistributionSpec distribution;
  ImpressionSpec impressions;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string output = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

// --- names ---------------------------------------------------------------

namespace internal {

template <typename E>
struct NameTable {
  E value;
  const char* name;
};

inline constexpr NameTable<Scenario> kScenarioNames[] = {
    {Scenario::kMeasure, "measure"},
    {Scenario::kSimulate, "simulate"},
    {Scenario::kReachDistribution, "reach_distribution"},
    {Scenario::kGroupSize, "group_size"},
    {Scenario::kCoverage, "coverage"},
    {Scenario::kApproaches, "approaches"},
};

inline constexpr NameTable<ArrivalMode> kArrivalNames[] = {
    {ArrivalMode::kTargetedUsers, "targeted_users"},
    {ArrivalMode::kGroupMembers, "group_members"},
    {ArrivalMode::kPropertyVectors, "property_vectors"},
};

inline constexpr NameTable<Placement> kPlacementNames[] = {
    {Placement::kConcentrated, "concentrated"},
    {Placement::kSpread, "spread"},
    {Placement::kRandom, "random"},
};

inline constexpr NameTable<Discount> kDiscountNames[] = {
    {Discount::kUniqueImpressions, "A"}, {Discount::kUniqueGroups, "B"},
    {Discount::kUniform, "C"},           {Discount::kNonuniform, "D"},
    {Discount::kIdentity, "identity"},
};

template <typename E, std::size_t N>
const char* NameOf(const NameTable<E> (&table)[N], E v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  throw InternalStateError("unnamed enum value");
}

template <typename E, std::size_t N>
E ValueOf(const NameTable<E> (&table)[N], const std::string& name, const std::string& path) {
  std::string choices;
  for (const auto& e : table) {
    if (name == e.name) return e.value;
    choices += choices.empty() ? "" : ", ";
    choices += e.name;
  }
  throw ConfigError(path + ": unknown value '" + name + "' (expected one of " + choices + ")");
}

}  // namespace internal

inline const char* ScenarioName(Scenario s) { return internal::NameOf(internal::kScenarioNames, s); }

inline Scenario ParseScenario(const std::string& name) {
  return internal::ValueOf(internal::kScenarioNames, name, "scenario");
}

// --- JSON reading --------------------------------------------------------

namespace internal {

using Json = nlohmann::ordered_json;

// Reads the keys of one JSON object and rejects any it did not consume.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const Json& require(const std::string& key) {
    if (!obj_.contains(key)) throw ConfigError("missing required field '" + join(key) + "'");
    used_.insert(key);
    return obj_.at(key);
  }

  const Json* optional(const std::string& key) {
    if (!obj_.contains(key)) return nullptr;
    used_.insert(key);
    return &obj_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    return convert<T>(require(key), join(key));
  }

  template <typename T>
  void read(const std::string& key, T& into) {
    if (const Json* v = optional(key)) into = convert<T>(*v, join(key));
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& into) {
    if (const Json* v = optional(key)) {
      into = v->is_null() ? std::nullopt : std::optional<T>(convert<T>(*v, join(key)));
    }
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw ConfigError("unknown field '" + join(it.key()) +
                          "' (check the spelling or remove it)");
      }
    }
  }

  template <typename T>
  static T convert(const Json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path + ": expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return v.get<T>();
        if (v.get<std::int64_t>() < 0) throw ConfigError(path + ": must be >= 0");
      }
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path + ": expected a number");
      return v.get<T>();
    } else {
      if (!v.is_array()) throw ConfigError(path + ": expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<typename T::value_type>(v[i], path + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const Json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename E, std::size_t N>
void ReadEnum(ObjectReader& r, const std::string& key, const NameTable<E> (&table)[N], E& into) {
  if (const Json* v = r.optional(key)) {
    into = ValueOf(table, ObjectReader::convert<std::string>(*v, r.join(key)), r.join(key));
  }
}

inline void ReadPopulation(const Json& j, PopulationSpec& p) {
  ObjectReader r(j, "population");
  p.num_users = r.get<int>("num_users");
  p.group_size = r.get<int>("group_size");
  r.read("overlapping", p.overlapping);
  r.read("num_groups", p.num_groups);
  r.read("targeting", p.targeting);
  r.read("targeted_count", p.targeted_count);
  r.read("targeted_fraction", p.targeted_fraction);
  ReadEnum(r, "placement", kPlacementNames, p.placement);
  r.read("spread_groups", p.spread_groups);
  r.read("property_vector", p.property_vector);
  r.read("geometric_ratio", p.geometric_ratio);
  r.read("property_values", p.property_values);
  r.finish();
}

inline void ReadStream(const Json& j, StreamSpec& s) {
  ObjectReader r(j, "stream");
  r.read("num_requests", s.num_requests);
  r.read("requests_per_user", s.requests_per_user);
  ReadEnum(r, "arrival", kArrivalNames, s.arrival);
  r.finish();
}

inline void ReadCampaign(const Json& j, CampaignSpec& c) {
  ObjectReader r(j, "campaign");
  c.cap = r.get<int>("cap");
  r.read("budget", c.budget);
  r.read("budget_fraction", c.budget_fraction);
  r.read("budget_per_targeted_user", c.budget_per_targeted_user);
  r.read("learning_rate", c.learning_rate);
  r.read("initial_lambda", c.initial_lambda);
  r.read("bid_floor", c.bid_floor);
  r.read("bid_cap", c.bid_cap);
  r.read("price_mu", c.price_mu);
  r.read("price_sigma2", c.price_sigma2);
  ReadEnum(r, "discount", kDiscountNames, c.discount);
  r.finish();
}

inline void ReadSweep(const Json& j, SweepSpec& s) {
  ObjectReader r(j, "sweep");
  s.axis = r.get<std::string>("axis");
  r.read("values", s.values);
  if (const Json* v = r.optional("approaches")) {
    const auto names = ObjectReader::convert<std::vector<std::string>>(*v, "sweep.approaches");
    s.approaches.clear();
    for (std::size_t i = 0; i < names.size(); ++i) {
      s.approaches.push_back(
          ValueOf(kDiscountNames, names[i], "sweep.approaches[" + std::to_string(i) + "]"));
    }
  }
  r.finish();
}

inline void ReadDistribution(const Json& j, DistributionSpec& d) {
  ObjectReader r(j, "distribution");
  r.read("reference_impressions", d.reference_impressions);
  r.read("impression_values", d.impression_values);
  r.read("k_values", d.k_values);
  r.finish();
}

inline void ReadImpressions(const Json& j, ImpressionSpec& s) {
  ObjectReader r(j, "impressions");
  r.read("wins_per_group", s.wins_per_group);
  r.read("count", s.count);
  r.finish();
}

}  // namespace internal

// Cross-field checks shared by every entry point.
inline void validate_config(const ExperimentConfig& cfg) {
  const auto& p = cfg.population;
  const auto& c = cfg.campaign;
  if (cfg.schema_version != kSchemaVersion) {
    throw ConfigError("schema_version " + std::to_string(cfg.schema_version) +
                      " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (p.num_users < 1 || p.group_size < 1) {
    throw ConfigError("population.num_users and population.group_size must be >= 1");
  }
  if (p.overlapping && p.num_groups < 1) {
    throw ConfigError("population.num_groups must be >= 1 for overlapping groups");
  }
  if (p.targeting != "all" && p.targeting != "count" && p.targeting != "fraction") {
    throw ConfigError("population.targeting: unknown value '" + p.targeting +
                      "' (expected one of all, count, fraction)");
  }
  if (p.property_vector != "uniform" && p.property_vector != "geometric" &&
      p.property_vector != "explicit") {
    throw ConfigError("population.property_vector: unknown value '" + p.property_vector +
                      "' (expected one of uniform, geometric, explicit)");
  }
  if (p.property_vector == "explicit" &&
      static_cast<int>(p.property_values.size()) != p.group_size) {
    throw ConfigError("population.property_values must have group_size entries");
  }
  if (cfg.stream.num_requests < 0) throw ConfigError("stream.num_requests must be >= 0");
  if (!(cfg.stream.requests_per_user >= 0.0)) {
    throw ConfigError("stream.requests_per_user must be >= 0");
  }
  if (c.cap < 1) throw ConfigError("campaign.cap must be >= 1");
  const int budget_forms = c.budget.has_value() + c.budget_fraction.has_value() +
                           c.budget_per_targeted_user.has_value();
  if (budget_forms > 1) {
    throw ConfigError(
        "campaign: set at most one of budget, budget_fraction, budget_per_targeted_user");
  }
  for (const auto& b : {c.budget, c.budget_fraction, c.budget_per_targeted_user}) {
    if (b && !(*b > 0.0)) throw ConfigError("campaign: budget must be > 0");
  }
  if (!(c.bid_floor >= 0.0 && c.bid_floor <= c.bid_cap)) {
    throw ConfigError("campaign: need 0 <= bid_floor <= bid_cap");
  }
  if (!(c.price_sigma2 > 0.0)) throw ConfigError("campaign.price_sigma2 must be > 0");
  const auto& s = cfg.sweep;
  if (s.axis != "none" && s.axis != "k" && s.axis != "spread_groups" && s.axis != "approach") {
    throw ConfigError("sweep.axis: unknown value '" + s.axis +
                      "' (expected one of none, k, spread_groups, approach)");
  }
  if ((s.axis == "k" || s.axis == "spread_groups") && s.values.empty()) {
    throw ConfigError("sweep.values must not be empty for axis '" + s.axis + "'");
  }
  for (double v : s.values) {
    if (!(v >= 1.0) || v != std::floor(v)) {
      throw ConfigError("sweep.values must be positive integers");
    }
  }
  if (s.axis == "approach" && s.approaches.empty()) {
    throw ConfigError("sweep.approaches must not be empty for axis 'approach'");
  }
}

inline ExperimentConfig config_from_json(const nlohmann::ordered_json& j) {
  using internal::ObjectReader;
  ExperimentConfig cfg;
  ObjectReader r(j, "");
  cfg.schema_version = r.get<int>("schema_version");
  if (cfg.schema_version != kSchemaVersion) validate_config(cfg);
  cfg.scenario = ParseScenario(r.get<std::string>("scenario"));
  internal::ReadPopulation(r.require("population"), cfg.population);
  if (const auto* v = r.optional("stream")) internal::ReadStream(*v, cfg.stream);
  internal::ReadCampaign(r.require("campaign"), cfg.campaign);
  if (const auto* v = r.optional("sweep")) internal::ReadSweep(*v, cfg.sweep);
  if (const auto* v = r.optional("distribution")) internal::ReadDistribution(*v, cfg.distribution);
  if (const auto* v = r.optional("impressions")) internal::ReadImpressions(*v, cfg.impressions);
  cfg.trials = r.get<int>("trials");
  cfg.seed = r.get<std::uint64_t>("seed");
  r.read("output", cfg.output);
  r.finish();
  validate_config(cfg);
  return cfg;
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  using internal::NameOf;
  nlohmann::ordered_json j;
  j["schema_version"] = cfg.schema_version;
  j["scenario"] = ScenarioName(cfg.scenario);
  const auto& p = cfg.population;
  j["population"] = {
      {"num_users", p.num_users},
      {"group_size", p.group_size},
      {"overlapping", p.overlapping},
      {"num_groups", p.num_groups},
      {"targeting", p.targeting},
      {"targeted_count", p.targeted_count},
      {"targeted_fraction", p.targeted_fraction},
      {"placement", NameOf(internal::kPlacementNames, p.placement)},
      {"spread_groups", p.spread_groups},
      {"property_vector", p.property_vector},
      {"geometric_ratio", p.geometric_ratio},
      {"property_values", p.property_values},
  };
  j["stream"] = {
      {"num_requests", cfg.stream.num_requests},
      {"requests_per_user", cfg.stream.requests_per_user},
      {"arrival", NameOf(internal::kArrivalNames, cfg.stream.arrival)},
  };
  const auto& c = cfg.campaign;
  auto& cj = j["campaign"];
  cj["cap"] = c.cap;
  if (c.budget) cj["budget"] = *c.budget;
  if (c.budget_fraction) cj["budget_fraction"] = *c.budget_fraction;
  if (c.budget_per_targeted_user) cj["budget_per_targeted_user"] = *c.budget_per_targeted_user;
  cj["learning_rate"] = c.learning_rate;
  cj["initial_lambda"] = c.initial_lambda;
  cj["bid_floor"] = c.bid_floor;
  cj["bid_cap"] = c.bid_cap;
  cj["price_mu"] = c.price_mu;
  cj["price_sigma2"] = c.price_sigma2;
  cj["discount"] = NameOf(internal::kDiscountNames, c.discount);
  std::vector<std::string> approaches;
  for (Discount d : cfg.sweep.approaches) approaches.push_back(NameOf(internal::kDiscountNames, d));
  j["sweep"] = {{"axis", cfg.sweep.axis}, {"values", cfg.sweep.values}, {"approaches", approaches}};
  j["distribution"] = {
      {"reference_impressions", cfg.distribution.reference_impressions},
      {"impression_values", cfg.distribution.impression_values},
      {"k_values", cfg.distribution.k_values},
  };
  j["impressions"] = {{"wins_per_group", cfg.impressions.wins_per_group},
                      {"count", cfg.impressions.count}};
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  return j;
}

inline ExperimentConfig load_config_string(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return load_config_string(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << config_to_json(cfg).dump(2) << '\n';
}

// Defaults for each scenario. The shipped configs/ files hold the same values.
inline ExperimentConfig default_config(Scenario scenario) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  cfg.seed = 20260101;
  cfg.output = std::string("out/") + ScenarioName(scenario);
  switch (scenario) {
    case Scenario::kMeasure:
      cfg.campaign.cap = 3;
      cfg.impressions.count = 250;
      break;
    case Scenario::kSimulate:
      cfg.campaign.budget_fraction = 0.035;
      cfg.trials = 20;
      break;
    case Scenario::kReachDistribution:
      cfg.population.num_users = 120;
      cfg.population.group_size = 6;
      cfg.campaign.cap = 3;
      cfg.distribution.reference_impressions = 250;
      cfg.distribution.impression_values = {25,  50,  100, 150, 200,  250,  300,
                                            400, 500, 600, 800, 1000, 1500, 2000};
      cfg.distribution.k_values = {1, 2, 3, 4, 5, 6};
      cfg.trials = 10000;
      break;
    case Scenario::kGroupSize:
      cfg.campaign.cap = 1;
      cfg.campaign.budget_fraction = 0.035;
      cfg.sweep.axis = "k";
      cfg.sweep.values = {1, 2, 3, 6, 12, 120};
      cfg.trials = 200;
      break;
    case Scenario::kCoverage:
      cfg.population.num_users = 144;
      cfg.population.group_size = 12;
      cfg.population.targeting = "count";
      cfg.population.targeted_count = 12;
      cfg.population.placement = Placement::kSpread;
      cfg.stream.requests_per_user = 2000.0 / 120.0;
      cfg.stream.arrival = ArrivalMode::kGroupMembers;
      cfg.campaign.cap = 1;
      cfg.campaign.budget_per_targeted_user = 0.75;
      cfg.sweep.axis = "spread_groups";
      cfg.sweep.values = {1, 2, 3, 4, 6, 12};
      cfg.trials = 200;
      break;
    case Scenario::kApproaches:
      cfg.population.num_users = 2000;
      cfg.population.group_size = 20;
      cfg.population.property_vector = "geometric";
      cfg.population.geometric_ratio = 0.6;
      cfg.stream.arrival = ArrivalMode::kPropertyVectors;
      cfg.campaign.cap = 1;
      cfg.campaign.budget_fraction = 0.015;
      cfg.campaign.price_sigma2 = 0.1;
      cfg.sweep.axis = "approach";
      cfg.sweep.approaches = {Discount::kUniqueImpressions, Discount::kUniqueGroups,
                              Discount::kUniform, Discount::kNonuniform};
      cfg.trials = 200;
      break;
  }
  return cfg;
}

}  // namespace anonreach
