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

// Experiment runners. Every random draw comes from a seed derived from the
// config's master seed and the draw's role, so a run is a pure function of
// its config.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "anonreach/auction.hpp"
#include "anonreach/config.hpp"
#include "anonreach/measurement.hpp"
#include "anonreach/optimization.hpp"
#include "anonreach/population.hpp"
#include "anonreach/report.hpp"
#include "anonreach/rng.hpp"
#include "anonreach/simulation.hpp"

namespace anonreach {

// Roles for DeriveSeed.
enum SeedRole : std::uint64_t {
  kSeedPopulation = 1,
  kSeedStream = 2,
  kSeedPrices = 3,
  kSeedImpressions = 4,
  kSeedMonteCarlo = 5,
};

// Spearman rank correlation; tied values share their mean rank.
inline double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("spearman_correlation: need two equal-length series of length >= 2");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t m = i; m <= j; ++m) r[idx[m]] = mean_rank;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// --- building blocks -------------------------------------------------------

inline PopulationModel build_population(const PopulationSpec& spec, std::uint64_t seed) {
  if (spec.overlapping) {
    if (spec.targeting != "all") {
      throw ConfigError("population: overlapping groups support targeting 'all' only");
    }
    return build_overlapping(spec.num_users, spec.group_size, spec.num_groups, seed);
  }
  if (spec.targeting == "count") {
    return build_partition(spec.num_users, spec.group_size,
                           TargetSpec::Count(spec.targeted_count, spec.placement,
                                             spec.spread_groups),
                           seed);
  }
  if (spec.targeting == "fraction") {
    return build_partition(spec.num_users, spec.group_size, spec.targeted_fraction, seed);
  }
  return build_partition(spec.num_users, spec.group_size, TargetSpec::All(), seed);
}

// One property vector per group, all alike.
inline std::vector<PropertyVector> build_properties(const PopulationSpec& spec,
                                                    const PopulationModel& model) {
  const int k = model.group_size();
  PropertyVector q = spec.property_vector == "geometric"  ? PropertyVector::Geometric(k, spec.geometric_ratio)
                     : spec.property_vector == "explicit" ? PropertyVector(spec.property_values)
                                                          : PropertyVector::Uniform(k);
  if (q.size() != k) throw ConfigError("population.property_values must have group_size entries");
  return std::vector<PropertyVector>(static_cast<std::size_t>(model.num_groups()), q);
}

// T, either fixed or proportional to the users requests can come from.
inline std::int64_t resolve_num_requests(const StreamSpec& spec, const PopulationModel& model) {
  if (!(spec.requests_per_user > 0.0)) return spec.num_requests;
  std::int64_t sources = 0;
  if (spec.arrival == ArrivalMode::kTargetedUsers) {
    for (UserId i : model.targeted_users()) sources += model.groups_of(i).empty() ? 0 : 1;
  } else {
    for (GroupId j = 0; j < model.num_groups(); ++j) {
      if (!model.targeted_members(j).empty()) sources += model.group_size();
    }
  }
  return std::llround(spec.requests_per_user * static_cast<double>(sources));
}

inline constexpr double kDefaultBudgetFraction = 0.4;

inline double resolve_budget(const CampaignSpec& spec, std::int64_t num_requests,
                             const PopulationModel& model, const LogNormalSecondPrice& auction) {
  if (spec.budget) return *spec.budget;
  if (spec.budget_per_targeted_user) return *spec.budget_per_targeted_user * model.num_targeted();
  const double fraction = spec.budget_fraction.value_or(kDefaultBudgetFraction);
  return fraction * static_cast<double>(num_requests) * auction.mean_price();
}

inline LogNormalSecondPrice make_auction(const CampaignSpec& spec) {
  return LogNormalSecondPrice(spec.price_mu, spec.price_sigma2);
}

inline BidderConfig make_bidder_config(const CampaignSpec& spec, double budget,
                                       std::int64_t num_requests) {
  return BidderConfig{budget, num_requests, spec.learning_rate, spec.initial_lambda,
                      BidBounds{spec.bid_floor, spec.bid_cap}};
}

namespace internal {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

inline Moments MeanVariance(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.variance = ss / static_cast<double>(xs.size() - 1);
  }
  return m;
}

inline double Sum(const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Per-trial outcome of one arm.
struct ArmTrial {
  double wins = 0.0;
  double reach = 0.0;
  double spend = 0.0;
  double expected_reach = 0.0;
  double relative_error = kNaN;  // of the estimator against the true reach
  double within_two_sigma = kNaN;
};

struct ArmSummary {
  std::int64_t num_requests = 0;
  double budget = 0.0;
  Moments wins, reach, spend, expected_reach;
  double roas = 0.0;  // total reach over total spend
  double mean_relative_error = kNaN;
  double within_two_sigma = kNaN;
};

inline double MeanDefined(const std::vector<double>& xs) {
  double s = 0.0;
  int n = 0;
  for (double x : xs) {
    if (std::isnan(x)) continue;
    s += x;
    ++n;
  }
  return n ? s / n : kNaN;
}

// Runs cfg.trials campaigns of one arm. Stream and price seeds depend only
// on the trial, so arms of a sweep share their random numbers.
inline ArmSummary RunArm(const ExperimentConfig& cfg, const PopulationModel& model) {
  const auto auction = make_auction(cfg.campaign);
  const auto props = cfg.stream.arrival == ArrivalMode::kPropertyVectors ||
                             cfg.campaign.discount == Discount::kNonuniform
                         ? build_properties(cfg.population, model)
                         : std::vector<PropertyVector>{};
  ArmSummary out;
  out.num_requests = resolve_num_requests(cfg.stream, model);
  out.budget = resolve_budget(cfg.campaign, out.num_requests, model, auction);
  const auto bidder = make_bidder_config(cfg.campaign, out.budget, out.num_requests);
  const int cap = cfg.campaign.cap;
  std::vector<ArmTrial> trials(static_cast<std::size_t>(cfg.trials));
  ParallelFor(trials.size(), [&](std::size_t t) {
    const auto stream = generate_stream(model, out.num_requests, cfg.stream.arrival,
                                        DeriveSeed(cfg.seed, {kSeedStream, t}), props);
    const auto prices =
        draw_prices(auction, out.num_requests, DeriveSeed(cfg.seed, {kSeedPrices, t}));
    DiscountPolicy policy(model, cfg.campaign.discount, cap, props);
    const auto r = run_campaign(model, stream, prices, auction, bidder, policy, cap);
    ArmTrial& a = trials[t];
    a.wins = static_cast<double>(r.wins.size());
    a.reach = static_cast<double>(r.true_reach);
    a.spend = r.spend;
    a.expected_reach = r.expected_reach;
    if (r.true_reach > 0) {
      a.relative_error = std::abs(r.expected_reach - a.reach) / a.reach;
    }
    if (cap == 1) {
      const auto counts = ImpressionCounts::FromWins(model.num_groups(), r.wins);
      const double sigma = std::sqrt(std::max(0.0, unique_reach_variance(model, counts)));
      a.within_two_sigma = std::abs(r.expected_reach - a.reach) <= 2.0 * sigma + 1e-9 ? 1.0 : 0.0;
    }
  });
  std::vector<double> wins, reach, spend, est, err, band;
  for (const auto& a : trials) {
    wins.push_back(a.wins);
    reach.push_back(a.reach);
    spend.push_back(a.spend);
    est.push_back(a.expected_reach);
    err.push_back(a.relative_error);
    band.push_back(a.within_two_sigma);
  }
  out.wins = MeanVariance(wins);
  out.reach = MeanVariance(reach);
  out.spend = MeanVariance(spend);
  out.expected_reach = MeanVariance(est);
  out.roas = Sum(spend) > 0.0 ? Sum(reach) / Sum(spend) : 0.0;
  out.mean_relative_error = MeanDefined(err);
  out.within_two_sigma = MeanDefined(band);
  return out;
}

inline nlohmann::ordered_json RunMetadata(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["config"] = config_to_json(cfg);
  return j;
}

}  // namespace internal

// --- scenarios ---------------------------------------------------------------

// Relative ROAS against group size. Every arm faces the same streams and
// prices; ROAS is normalized by the k = 1 arm.
inline RunResult run_group_size_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.sweep.axis != "k") throw ConfigError("group_size: sweep.axis must be 'k'");
  if (std::find(cfg.sweep.values.begin(), cfg.sweep.values.end(), 1.0) == cfg.sweep.values.end()) {
    throw ConfigError("group_size: sweep.values must include 1, the baseline arm");
  }
  std::vector<internal::ArmSummary> arms;
  std::vector<int> ks;
  for (double v : cfg.sweep.values) {
    ExperimentConfig arm = cfg;
    arm.population.group_size = static_cast<int>(v);
    const auto model = build_population(arm.population, DeriveSeed(cfg.seed, {kSeedPopulation}));
    arms.push_back(internal::RunArm(arm, model));
    ks.push_back(static_cast<int>(v));
  }
  double baseline = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == 1) baseline = arms[i].roas;
  }
  Table t{"group_size",
          {"k", "num_groups", "trials", "num_requests", "budget", "mean_wins", "mean_reach",
           "reach_variance", "mean_spend", "roas", "relative_roas", "mean_expected_reach",
           "mean_relative_error", "within_two_sigma"},
          {}};
  std::vector<double> xs, rel;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto& a = arms[i];
    const double r = baseline > 0.0 ? a.roas / baseline : internal::kNaN;
    t.add({std::int64_t{ks[i]}, std::int64_t{cfg.population.num_users / ks[i]},
           std::int64_t{cfg.trials}, a.num_requests, a.budget, a.wins.mean, a.reach.mean,
           a.reach.variance, a.spend.mean, a.roas, r, a.expected_reach.mean,
           a.mean_relative_error, a.within_two_sigma});
    xs.push_back(ks[i]);
    rel.push_back(r);
  }
  RunResult out;
  out.scenario = ScenarioName(Scenario::kGroupSize);
  out.summary = internal::RunMetadata(cfg);
  out.summary["spearman_k_vs_relative_roas"] = xs.size() >= 2 ? spearman_correlation(xs, rel) : internal::kNaN;
  out.tables.push_back(std::move(t));
  return out;
}

// ROAS against coverage: the same targeted users placed over more or fewer
// groups.
inline RunResult run_coverage(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.sweep.axis != "spread_groups") {
    throw ConfigError("coverage: sweep.axis must be 'spread_groups'");
  }
  Table t{"coverage",
          {"spread_groups", "coverage", "trials", "num_requests", "budget", "mean_wins",
           "mean_reach", "reach_variance", "mean_spend", "roas", "mean_expected_reach",
           "mean_relative_error"},
          {}};
  std::vector<double> cov, roas;
  for (double v : cfg.sweep.values) {
    ExperimentConfig arm = cfg;
    arm.population.targeting = "count";
    arm.population.placement = Placement::kSpread;
    arm.population.spread_groups = static_cast<int>(v);
    const auto model = build_population(arm.population, DeriveSeed(cfg.seed, {kSeedPopulation}));
    const auto a = internal::RunArm(arm, model);
    const double c = coverage(model);
    t.add({static_cast<std::int64_t>(v), c, std::int64_t{cfg.trials}, a.num_requests, a.budget,
           a.wins.mean, a.reach.mean, a.reach.variance, a.spend.mean, a.roas,
           a.expected_reach.mean, a.mean_relative_error});
    cov.push_back(c);
    roas.push_back(a.roas);
  }
  RunResult out;
  out.scenario = ScenarioName(Scenario::kCoverage);
  out.summary = internal::RunMetadata(cfg);
  out.summary["spearman_coverage_vs_roas"] = cov.size() >= 2 ? spearman_correlation(cov, roas) : internal::kNaN;
  out.tables.push_back(std::move(t));
  return out;
}

// Reach an approach reports for an impression log.
inline double measured_reach(Discount approach, const PopulationModel& model,
                             std::span<const PropertyVector> props, const ImpressionCounts& counts,
                             std::int64_t true_reach_value, int cap) {
  switch (approach) {
    case Discount::kUniqueImpressions:
      return static_cast<double>(counts.total());
    case Discount::kUniqueGroups: {
      double r = 0.0;
      for (auto n : counts.wins_per_group) r += static_cast<double>(std::min<std::int64_t>(n, cap));
      return r;
    }
    case Discount::kUniform:
      return expected_reach(model, counts, cap);
    case Discount::kNonuniform:
      return expected_reach_nonuniform(model, props, counts, cap);
    case Discount::kIdentity:
      return static_cast<double>(true_reach_value);
  }
  return 0.0;
}

// Measurement approaches compared on one shared impression log per campaign
// (the wins of the undiscounted campaign), and bidding approaches compared by
// ROAS relative to a bidder that sees user identities.
inline RunResult run_approach_comparison(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.sweep.axis != "approach") throw ConfigError("approaches: sweep.axis must be 'approach'");
  if (cfg.population.overlapping) {
    throw UnsupportedTopologyError("approaches: property vectors need non-overlapping groups");
  }
  const auto model = build_population(cfg.population, DeriveSeed(cfg.seed, {kSeedPopulation}));
  const auto props = build_properties(cfg.population, model);
  const auto auction = make_auction(cfg.campaign);
  const auto num_requests = resolve_num_requests(cfg.stream, model);
  const double budget = resolve_budget(cfg.campaign, num_requests, model, auction);
  const auto bidder = make_bidder_config(cfg.campaign, budget, num_requests);
  const int cap = cfg.campaign.cap;
  const auto& approaches = cfg.sweep.approaches;
  const std::size_t na = approaches.size();

  struct Trial {
    std::vector<double> measured, reach, spend, rel_roas;
    double reference_reach = 0.0;
  };
  std::vector<Trial> trials(static_cast<std::size_t>(cfg.trials));
  ParallelFor(trials.size(), [&](std::size_t t) {
    const auto stream = generate_stream(model, num_requests, cfg.stream.arrival,
                                        DeriveSeed(cfg.seed, {kSeedStream, t}), props);
    const auto prices = draw_prices(auction, num_requests, DeriveSeed(cfg.seed, {kSeedPrices, t}));
    auto play = [&](Discount d) {
      DiscountPolicy policy(model, d, cap, props);
      return run_campaign(model, stream, prices, auction, bidder, policy, cap);
    };
    const auto identity = play(Discount::kIdentity);
    const auto reference = play(Discount::kUniqueImpressions);
    const auto ref_counts = ImpressionCounts::FromWins(model.num_groups(), reference.wins);
    Trial& tr = trials[t];
    tr.reference_reach = static_cast<double>(reference.true_reach);
    for (Discount d : approaches) {
      const auto r = d == Discount::kUniqueImpressions ? reference : play(d);
      tr.measured.push_back(
          measured_reach(d, model, props, ref_counts, reference.true_reach, cap));
      tr.reach.push_back(static_cast<double>(r.true_reach));
      tr.spend.push_back(r.spend);
      tr.rel_roas.push_back(identity.roas() > 0.0 ? r.roas() / identity.roas() : internal::kNaN);
    }
  });

  Table t{"approaches",
          {"approach", "trials", "mean_measured_reach", "mean_reference_reach",
           "mean_relative_error", "overestimate_fraction", "mean_reach", "mean_spend", "roas",
           "mean_relative_roas"},
          {}};
  for (std::size_t a = 0; a < na; ++a) {
    std::vector<double> measured, reference, err, over, reach, spend, rel;
    for (const auto& tr : trials) {
      measured.push_back(tr.measured[a]);
      reference.push_back(tr.reference_reach);
      if (tr.reference_reach > 0.0) {
        err.push_back(std::abs(tr.measured[a] - tr.reference_reach) / tr.reference_reach);
      }
      over.push_back(tr.measured[a] >= tr.reference_reach - 1e-9 ? 1.0 : 0.0);
      reach.push_back(tr.reach[a]);
      spend.push_back(tr.spend[a]);
      rel.push_back(tr.rel_roas[a]);
    }
    const double total_spend = internal::Sum(spend);
    t.add({std::string(DiscountName(approaches[a])), std::int64_t{cfg.trials},
           internal::MeanVariance(measured).mean, internal::MeanVariance(reference).mean,
           internal::MeanDefined(err), internal::MeanVariance(over).mean,
           internal::MeanVariance(reach).mean, internal::MeanVariance(spend).mean,
           total_spend > 0.0 ? internal::Sum(reach) / total_spend : 0.0,
           internal::MeanDefined(rel)});
  }
  RunResult out;
  out.scenario = ScenarioName(Scenario::kApproaches);
  out.summary = internal::RunMetadata(cfg);
  out.summary["num_requests"] = num_requests;
  out.summary["budget"] = budget;
  out.summary["measurement_log"] = "wins of the undiscounted campaign (approach A)";
  out.summary["roas_baseline"] = "campaign bidding with user identity";
  out.tables.push_back(std::move(t));
  return out;
}

namespace internal {

// First `n` entries of `users`, as per-group win counts.
inline ImpressionCounts CountsFromUsers(const PopulationModel& model,
                                        const std::vector<UserId>& users, std::int64_t n) {
  auto counts = ImpressionCounts::Zero(model.num_groups());
  for (std::int64_t w = 0; w < n; ++w) {
    const auto& g = model.groups_of(users[static_cast<std::size_t>(w)]);
    ++counts.wins_per_group[static_cast<std::size_t>(g.front())];
  }
  return counts;
}

inline void AddHistogram(Table& t, std::int64_t key, const ReachDistribution& d) {
  for (std::size_t r = 0; r < d.histogram.size(); ++r) {
    if (d.histogram[r] == 0) continue;
    t.add({key, static_cast<std::int64_t>(r), d.histogram[r],
           static_cast<double>(d.histogram[r]) / d.trials});
  }
}

}  // namespace internal

// Monte Carlo reach distributions next to the closed-form expectation: at a
// reference impression count, across impression counts, and across group
// sizes. Impressions come from uniformly drawn targeted users; one draw of
// users is shared by every panel.
inline RunResult run_reach_distribution(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.population.overlapping) {
    throw UnsupportedTopologyError("reach_distribution: needs non-overlapping groups");
  }
  const auto& d = cfg.distribution;
  std::int64_t max_n = d.reference_impressions;
  for (auto n : d.impression_values) max_n = std::max(max_n, n);
  if (max_n < 0 || d.reference_impressions < 0) {
    throw ConfigError("distribution: impression counts must be >= 0");
  }
  const int cap = cfg.campaign.cap;
  const auto pop_seed = DeriveSeed(cfg.seed, {kSeedPopulation});
  const auto model = build_population(cfg.population, pop_seed);
  if (model.num_targeted() == 0) throw ConfigError("reach_distribution: no targeted users");

  std::vector<UserId> users(static_cast<std::size_t>(max_n));
  {
    Rng rng(DeriveSeed(cfg.seed, {kSeedImpressions}));
    const auto& targeted = model.targeted_users();
    std::uniform_int_distribution<std::size_t> pick(0, targeted.size() - 1);
    for (auto& u : users) u = targeted[pick(rng)];
  }

  RunResult out;
  out.scenario = ScenarioName(Scenario::kReachDistribution);
  out.summary = internal::RunMetadata(cfg);

  const auto ref_counts = internal::CountsFromUsers(model, users, d.reference_impressions);
  const auto ref = mc_reach_distribution(model, ref_counts, cap, cfg.trials,
                                         DeriveSeed(cfg.seed, {kSeedMonteCarlo, 0}));
  const double ref_expected = expected_reach(model, ref_counts, cap);
  Table ref_hist{"reference_histogram", {"impressions", "reach", "count", "frequency"}, {}};
  internal::AddHistogram(ref_hist, d.reference_impressions, ref);
  out.summary["reference"] = {
      {"impressions", d.reference_impressions}, {"group_size", model.group_size()},
      {"cap", cap},                             {"expected_reach", ref_expected},
      {"mc_mean", ref.mean},                    {"mc_std_error", ref.std_error},
      {"mc_variance", ref.variance},
  };
  out.tables.push_back(std::move(ref_hist));

  Table by_n{"by_impressions",
             {"impressions", "expected_reach", "mc_mean", "mc_std_error", "mc_variance"},
             {}};
  Table hist_n{"impression_histograms", {"impressions", "reach", "count", "frequency"}, {}};
  for (std::size_t i = 0; i < d.impression_values.size(); ++i) {
    const auto n = d.impression_values[i];
    const auto counts = internal::CountsFromUsers(model, users, n);
    const auto mc = mc_reach_distribution(model, counts, cap, cfg.trials,
                                          DeriveSeed(cfg.seed, {kSeedMonteCarlo, 1, i}));
    by_n.add({n, expected_reach(model, counts, cap), mc.mean, mc.std_error, mc.variance});
    internal::AddHistogram(hist_n, n, mc);
  }
  out.tables.push_back(std::move(by_n));
  out.tables.push_back(std::move(hist_n));

  Table by_k{"by_group_size",
             {"k", "expected_reach", "mc_mean", "mc_std_error", "mc_variance",
              "unique_reach_variance"},
             {}};
  for (std::size_t i = 0; i < d.k_values.size(); ++i) {
    PopulationSpec spec = cfg.population;
    spec.group_size = d.k_values[i];
    const auto mk = build_population(spec, pop_seed);
    if (mk.targeted_users() != model.targeted_users()) {
      throw ConfigError("distribution.k_values: targeting must not depend on group size");
    }
    const auto counts = internal::CountsFromUsers(mk, users, d.reference_impressions);
    const auto mc = mc_reach_distribution(mk, counts, cap, cfg.trials,
                                          DeriveSeed(cfg.seed, {kSeedMonteCarlo, 2, i}));
    by_k.add({std::int64_t{d.k_values[i]}, expected_reach(mk, counts, cap), mc.mean,
              mc.std_error, mc.variance, unique_reach_variance(mk, counts)});
  }
  out.tables.push_back(std::move(by_k));
  return out;
}

namespace internal {

inline Table ReachCurveTable(const std::vector<ReachCurvePoint>& points) {
  Table t{"reach_curve", {"t", "cap", "expected_reach", "sigma", "lower_bound", "upper_bound"}, {}};
  for (const auto& p : points) {
    t.add({p.t, std::int64_t{p.cap}, p.expected_reach, p.sigma, p.lower_bound, p.upper_bound});
  }
  return t;
}

}  // namespace internal

// Closed-form measurement of one impression log, for every cap up to the
// configured one.
inline RunResult run_measure(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto model = build_population(cfg.population, DeriveSeed(cfg.seed, {kSeedPopulation}));
  const int cap = cfg.campaign.cap;
  RunResult out;
  out.scenario = ScenarioName(Scenario::kMeasure);
  out.summary = internal::RunMetadata(cfg);

  ImpressionCounts counts;
  if (!cfg.impressions.wins_per_group.empty()) {
    if (static_cast<int>(cfg.impressions.wins_per_group.size()) != model.num_groups()) {
      throw ConfigError("impressions.wins_per_group has " +
                        std::to_string(cfg.impressions.wins_per_group.size()) +
                        " entries, the population has " + std::to_string(model.num_groups()) +
                        " groups");
    }
    counts.wins_per_group = cfg.impressions.wins_per_group;
    internal::CheckCounts(model, counts);
  } else {
    const auto props = cfg.stream.arrival == ArrivalMode::kPropertyVectors
                           ? build_properties(cfg.population, model)
                           : std::vector<PropertyVector>{};
    const auto stream = generate_stream(model, cfg.impressions.count, cfg.stream.arrival,
                                        DeriveSeed(cfg.seed, {kSeedImpressions}), props);
    std::vector<Win> wins;
    std::vector<UserId> served;
    for (std::int64_t t = 0; t < stream.size(); ++t) {
      wins.push_back({t, stream.group(t)});
      served.push_back(stream.requests[static_cast<std::size_t>(t)].hidden_user);
    }
    counts = ImpressionCounts::FromWins(model.num_groups(), wins);
    out.summary["true_reach"] = true_reach(model, served, cap);
    out.tables.push_back(internal::ReachCurveTable(reach_curve(model, wins, cap)));
  }

  Table t{"measurement",
          {"cap", "expected_reach", "expected_reach_alternative", "sigma",
           "chebyshev_two_sigma_probability", "lower_bound", "upper_bound",
           "expected_overexposed"},
          {}};
  const double var1 = unique_reach_variance(model, counts);
  for (int m = 1; m <= cap; ++m) {
    double lo = internal::kNaN, hi = internal::kNaN;
    if (model.is_partition()) {
      const auto b = reach_bounds(model, counts, m);
      lo = b.lower;
      hi = b.upper;
    }
    t.add({std::int64_t{m}, expected_reach(model, counts, m),
           expected_reach_alternative(model, counts, m),
           m == 1 ? std::sqrt(std::max(0.0, var1)) : internal::kNaN,
           m == 1 ? chebyshev_bound(std::max(0.0, var1), 2.0).probability : internal::kNaN, lo, hi,
           expected_overexposed(model, counts, m)});
  }
  out.summary["total_impressions"] = counts.total();
  out.tables.insert(out.tables.begin(), std::move(t));
  return out;
}

// Campaigns under the configured discount. The first campaign's bid trace and
// reach curve are kept.
inline RunResult run_simulate(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto model = build_population(cfg.population, DeriveSeed(cfg.seed, {kSeedPopulation}));
  const bool need_props = cfg.stream.arrival == ArrivalMode::kPropertyVectors ||
                          cfg.campaign.discount == Discount::kNonuniform;
  const auto props = need_props ? build_properties(cfg.population, model) : std::vector<PropertyVector>{};
  const auto auction = make_auction(cfg.campaign);
  const auto num_requests = resolve_num_requests(cfg.stream, model);
  const double budget = resolve_budget(cfg.campaign, num_requests, model, auction);
  const auto bidder = make_bidder_config(cfg.campaign, budget, num_requests);
  const int cap = cfg.campaign.cap;

  std::vector<CampaignResult> results(static_cast<std::size_t>(cfg.trials));
  ParallelFor(results.size(), [&](std::size_t t) {
    const auto stream = generate_stream(model, num_requests, cfg.stream.arrival,
                                        DeriveSeed(cfg.seed, {kSeedStream, t}), props);
    const auto prices = draw_prices(auction, num_requests, DeriveSeed(cfg.seed, {kSeedPrices, t}));
    DiscountPolicy policy(model, cfg.campaign.discount, cap, props);
    results[t] = run_campaign(model, stream, prices, auction, bidder, policy, cap, t == 0);
  });

  Table campaigns{"campaigns",
                  {"trial", "wins", "spend", "true_reach", "expected_reach", "final_lambda", "roas"},
                  {}};
  for (std::size_t t = 0; t < results.size(); ++t) {
    const auto& r = results[t];
    campaigns.add({static_cast<std::int64_t>(t), static_cast<std::int64_t>(r.wins.size()), r.spend,
                   r.true_reach, r.expected_reach, r.final_lambda, r.roas()});
  }
  Table trace{"trace",
              {"t", "group", "p_t", "lambda", "bid", "won", "price_paid", "cumulative_spend",
               "cumulative_expected_reach"},
              {}};
  for (const auto& r : results.front().trace) {
    trace.add({r.t, std::int64_t{r.group}, r.reach_prob, r.lambda, r.bid,
               std::int64_t{r.won ? 1 : 0}, r.price_paid, r.cumulative_spend,
               r.cumulative_expected_reach});
  }
  RunResult out;
  out.scenario = ScenarioName(Scenario::kSimulate);
  out.summary = internal::RunMetadata(cfg);
  out.summary["num_requests"] = num_requests;
  out.summary["budget"] = budget;
  out.summary["discount"] = DiscountName(cfg.campaign.discount);
  out.tables.push_back(std::move(campaigns));
  out.tables.push_back(std::move(trace));
  out.tables.push_back(internal::ReachCurveTable(reach_curve(model, results.front().wins, cap)));
  return out;
}

inline RunResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::kMeasure: return run_measure(cfg);
    case Scenario::kSimulate: return run_simulate(cfg);
    case Scenario::kReachDistribution: return run_reach_distribution(cfg);
    case Scenario::kGroupSize: return run_group_size_sweep(cfg);
    case Scenario::kCoverage: return run_coverage(cfg);
    case Scenario::kApproaches: return run_approach_comparison(cfg);
  }
  throw InternalStateError("unknown scenario");
}

}  // namespace anonreach
