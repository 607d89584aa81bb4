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

// Reach measurement from group-level impression counts.
//
// A win attributed to group j was served to one of the k members of j,
// each with probability 1/k. User i therefore sees the ad
// X_i ~ Binomial(n_i, 1/k) times, where n_i is the sum of n_j over the groups
// containing i, and the reach under cap c is the sum of min(X_i, c) over
// targeted users.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "anonreach/binomial.hpp"
#include "anonreach/error.hpp"
#include "anonreach/population.hpp"
#include "anonreach/rng.hpp"

namespace anonreach {

// Half-open range [start, end) of request indices.
struct Window {
  std::int64_t start = 0;
  std::int64_t end = std::numeric_limits<std::int64_t>::max();
  bool contains(std::int64_t t) const { return t >= start && t < end; }
};

// A won request: its index in the stream and the group it came from.
struct Win {
  std::int64_t t = 0;
  GroupId group = 0;
};

// n_j per group, optionally restricted to a window of request indices.
struct ImpressionCounts {
  std::vector<std::int64_t> wins_per_group;
  std::optional<Window> window;

  static ImpressionCounts Zero(int num_groups) {
    return {std::vector<std::int64_t>(static_cast<std::size_t>(num_groups), 0), std::nullopt};
  }

  static ImpressionCounts FromWins(int num_groups, std::span<const Win> wins,
                                   std::optional<Window> window = std::nullopt) {
    ImpressionCounts out = Zero(num_groups);
    out.window = window;
    for (const Win& w : wins) {
      if (w.group < 0 || w.group >= num_groups) {
        throw DomainError("ImpressionCounts: unknown group " + std::to_string(w.group));
      }
      if (window && !window->contains(w.t)) continue;
      ++out.wins_per_group[static_cast<std::size_t>(w.group)];
    }
    return out;
  }

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto n : wins_per_group) s += n;
    return s;
  }
};

namespace internal {

inline void CheckCounts(const PopulationModel& model, const ImpressionCounts& counts) {
  if (static_cast<int>(counts.wins_per_group.size()) != model.num_groups()) {
    throw DomainError("impression counts reference " +
                      std::to_string(counts.wins_per_group.size()) +
                      " groups, model has " + std::to_string(model.num_groups()));
  }
  for (auto n : counts.wins_per_group) {
    if (n < 0) throw DomainError("impression counts must be >= 0");
  }
}

inline void CheckCap(int cap) {
  if (cap < 1) throw DomainError("frequency cap must be >= 1, got " + std::to_string(cap));
}

// E[min(X, c)] for X ~ Binomial(n, p), summed as in the closed form
// sum_{l=1..c} l f(l) + c - c F(c).
inline double CappedMean(std::int64_t n, int cap, double p) {
  double acc = 0.0;
  for (int l = 1; l <= cap; ++l) acc += l * binom_pmf(l, n, p);
  return acc + cap - cap * binom_cdf(cap, n, p);
}

}  // namespace internal

// n_i = sum_{j in G_i} n_j.
inline std::int64_t exposure_trials(const PopulationModel& model,
                                    const ImpressionCounts& counts, UserId i) {
  std::int64_t n = 0;
  for (GroupId j : model.groups_of(i)) n += counts.wins_per_group[static_cast<std::size_t>(j)];
  return n;
}

// Expected reach under cap c, summed over targeted users in ascending order.
inline double expected_reach(const PopulationModel& model, const ImpressionCounts& counts,
                             int cap) {
  internal::CheckCap(cap);
  internal::CheckCounts(model, counts);
  const double p = 1.0 / model.group_size();
  double total = 0.0;
  for (UserId i : model.targeted_users()) {
    total += internal::CappedMean(exposure_trials(model, counts, i), cap, p);
  }
  return total;
}

// Same quantity through sum_i (c - sum_{l<c} (c - l) f(l; n_i, 1/k)), the
// form the streaming estimator accumulates.
inline double expected_reach_alternative(const PopulationModel& model,
                                         const ImpressionCounts& counts, int cap) {
  internal::CheckCap(cap);
  internal::CheckCounts(model, counts);
  const double p = 1.0 / model.group_size();
  double total = 0.0;
  for (UserId i : model.targeted_users()) {
    const auto n = exposure_trials(model, counts, i);
    double deficit = 0.0;
    for (int l = 0; l < cap; ++l) deficit += (cap - l) * binom_pmf(l, n, p);
    total += cap - deficit;
  }
  return total;
}

inline double expected_unique_reach(const PopulationModel& model,
                                    const ImpressionCounts& counts) {
  internal::CheckCounts(model, counts);
  const double miss = 1.0 - 1.0 / model.group_size();
  double total = 0.0;
  for (UserId i : model.targeted_users()) {
    total += 1.0 - std::pow(miss, static_cast<double>(exposure_trials(model, counts, i)));
  }
  return total;
}

// Cov[min(X_i,1), min(X_i',1)] for i != i'. Zero when the users share no
// group.
inline double reach_covariance(const PopulationModel& model, const ImpressionCounts& counts,
                               UserId i, UserId i2) {
  internal::CheckCounts(model, counts);
  const auto& gi = model.groups_of(i);
  const auto& gi2 = model.groups_of(i2);
  std::int64_t shared = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  while (a < gi.size() && b < gi2.size()) {
    if (gi[a] == gi2[b]) {
      shared += counts.wins_per_group[static_cast<std::size_t>(gi[a])];
      ++a;
      ++b;
    } else if (gi[a] < gi2[b]) {
      ++a;
    } else {
      ++b;
    }
  }
  const std::int64_t exclusive =
      exposure_trials(model, counts, i) + exposure_trials(model, counts, i2) - 2 * shared;
  const double k = model.group_size();
  const double both_miss = std::pow(1.0 - 2.0 / k, static_cast<double>(shared));
  const double indep_miss = std::pow(1.0 - 1.0 / k, 2.0 * static_cast<double>(shared));
  return (both_miss - indep_miss) * std::pow(1.0 - 1.0 / k, static_cast<double>(exclusive));
}

// Variance of unique reach: per-user Bernoulli variances plus covariances of
// every ordered pair of targeted users sharing a group.
inline double unique_reach_variance(const PopulationModel& model,
                                    const ImpressionCounts& counts) {
  internal::CheckCounts(model, counts);
  const double miss = 1.0 - 1.0 / model.group_size();
  double total = 0.0;
  std::vector<UserId> neighbours;
  for (UserId i : model.targeted_users()) {
    const double q = std::pow(miss, static_cast<double>(exposure_trials(model, counts, i)));
    total += (1.0 - q) * q;
    neighbours.clear();
    for (GroupId j : model.groups_of(i)) {
      for (UserId u : model.targeted_members(j)) {
        if (u != i) neighbours.push_back(u);
      }
    }
    std::sort(neighbours.begin(), neighbours.end());
    neighbours.erase(std::unique(neighbours.begin(), neighbours.end()), neighbours.end());
    for (UserId u : neighbours) total += reach_covariance(model, counts, i, u);
  }
  return total;
}

struct ChebyshevBound {
  double probability;  // upper bound on P(|R - E[R]| >= threshold)
  double threshold;    // epsilon * sigma
};

inline ChebyshevBound chebyshev_bound(double sigma2, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("chebyshev_bound: epsilon must be > 0");
  if (!(sigma2 >= 0.0)) throw DomainError("chebyshev_bound: variance must be >= 0");
  return {std::min(1.0, 1.0 / (epsilon * epsilon)), epsilon * std::sqrt(sigma2)};
}

// Expected number of targeted users served more than `cap` times.
inline double expected_overexposed(const PopulationModel& model,
                                   const ImpressionCounts& counts, int cap) {
  internal::CheckCap(cap);
  internal::CheckCounts(model, counts);
  const double p = 1.0 / model.group_size();
  double under = 0.0;
  for (UserId i : model.targeted_users()) {
    under += binom_cdf(cap, exposure_trials(model, counts, i), p);
  }
  return model.num_targeted() - under;
}

struct ReachBounds {
  double lower;
  double upper;
};

// Deterministic range of the realized reach for non-overlapping groups.
// Lower: every win of a group came from one user (min(n_j, c)); a group with
// an untargeted member can have served only that member, so it contributes 0.
// Upper: wins spread round robin over the targeted members, min(n_j, c|U_j|).
inline ReachBounds reach_bounds(const PopulationModel& model, const ImpressionCounts& counts,
                                int cap) {
  internal::CheckCap(cap);
  internal::CheckCounts(model, counts);
  if (!model.is_partition()) {
    throw UnsupportedTopologyError(
        "reach_bounds: closed-form bounds need non-overlapping groups");
  }
  ReachBounds b{0.0, 0.0};
  for (GroupId j = 0; j < model.num_groups(); ++j) {
    const auto n = counts.wins_per_group[static_cast<std::size_t>(j)];
    const auto targeted = static_cast<std::int64_t>(model.targeted_members(j).size());
    if (targeted == model.group_size()) b.lower += static_cast<double>(std::min<std::int64_t>(n, cap));
    b.upper += static_cast<double>(std::min<std::int64_t>(n, cap * targeted));
  }
  return b;
}

// Expected reach of one group whose members visit with probabilities `prop`.
inline double expected_reach_nonuniform(const PropertyVector& prop, std::int64_t n, int cap) {
  internal::CheckCap(cap);
  if (n < 0) throw DomainError("expected_reach_nonuniform: n must be >= 0");
  double total = 0.0;
  for (double q : prop.probs()) total += internal::CappedMean(n, cap, q);
  return total;
}

inline double expected_unique_reach_nonuniform(const PropertyVector& prop, std::int64_t n) {
  if (n < 0) throw DomainError("expected_unique_reach_nonuniform: n must be >= 0");
  double missed = 0.0;
  for (double q : prop.probs()) missed += std::pow(1.0 - q, static_cast<double>(n));
  return prop.size() - missed;
}

namespace internal {

inline void CheckNonuniformModel(const PopulationModel& model,
                                 std::span<const PropertyVector> props) {
  if (!model.is_partition()) {
    throw UnsupportedTopologyError(
        "non-uniform reach needs non-overlapping groups");
  }
  if (static_cast<int>(props.size()) != model.num_groups()) {
    throw ConfigError("non-uniform reach: need one property vector per group");
  }
  for (GroupId j = 0; j < model.num_groups(); ++j) {
    if (props[static_cast<std::size_t>(j)].size() != model.group_size()) {
      throw ConfigError("non-uniform reach: property vector of group " + std::to_string(j) +
                        " has wrong length");
    }
    const auto t = static_cast<int>(model.targeted_members(j).size());
    if (t != 0 && t != model.group_size()) {
      throw ConfigError("non-uniform reach: group " + std::to_string(j) +
                        " is only partially targeted");
    }
  }
}

}  // namespace internal

// Campaign total: sum of the per-group values over targeted groups.
inline double expected_reach_nonuniform(const PopulationModel& model,
                                        std::span<const PropertyVector> props,
                                        const ImpressionCounts& counts, int cap) {
  internal::CheckCounts(model, counts);
  internal::CheckNonuniformModel(model, props);
  double total = 0.0;
  for (GroupId j = 0; j < model.num_groups(); ++j) {
    if (model.targeted_members(j).empty()) continue;
    total += expected_reach_nonuniform(props[static_cast<std::size_t>(j)],
                                       counts.wins_per_group[static_cast<std::size_t>(j)], cap);
  }
  return total;
}

// Per-targeted-user trial counts n[i] plus the shared p.m.f. table at
// p = 1/k. In partition mode a user's count is its group's count, so one
// counter per group suffices.
class ExposureState {
 public:
  enum class Mode { kAuto, kPerUser };

  ExposureState(const PopulationModel& model, int cap, Mode mode = Mode::kAuto)
      : model_(&model),
        table_(1.0 / model.group_size(), cap),
        per_group_(mode == Mode::kAuto && model.is_partition()) {
    internal::CheckCap(cap);
    if (per_group_) {
      group_trials_.assign(static_cast<std::size_t>(model.num_groups()), 0);
    } else {
      user_trials_.assign(static_cast<std::size_t>(model.num_users()), 0);
    }
  }

  const PopulationModel& model() const { return *model_; }
  const BinomialTable& table() const { return table_; }
  int cap() const { return table_.cap(); }
  bool per_group() const { return per_group_; }

  std::int64_t trials(UserId i) const {
    if (!per_group_) return user_trials_.at(static_cast<std::size_t>(i));
    const auto& g = model_->groups_of(i);
    return g.empty() ? 0 : group_trials_[static_cast<std::size_t>(g.front())];
  }

  std::int64_t group_trials(GroupId j) const {
    if (!per_group_) throw InternalStateError("group_trials: per-user mode");
    return group_trials_.at(static_cast<std::size_t>(j));
  }

  // Records a win in group j. `on_user(i, n)` runs after user i's count
  // moved to n; in partition mode it runs once per group with i = -1.
  template <typename OnUser>
  void record_win(GroupId j, OnUser&& on_user) {
    if (!model_->valid_group(j)) throw DomainError("unknown group " + std::to_string(j));
    if (per_group_) {
      const auto n = ++group_trials_[static_cast<std::size_t>(j)];
      table_.ensure(n);
      on_user(-1, n);
      return;
    }
    for (UserId i : model_->targeted_members(j)) {
      const auto n = ++user_trials_[static_cast<std::size_t>(i)];
      table_.ensure(n);
      on_user(i, n);
    }
  }

 private:
  const PopulationModel* model_;
  BinomialTable table_;
  bool per_group_;
  std::vector<std::int64_t> user_trials_;
  std::vector<std::int64_t> group_trials_;
};

// Streaming expected reach for every cap m = 1..c. The model must outlive the
// estimator.
class ReachEstimator {
 public:
  using Mode = ExposureState::Mode;

  ReachEstimator(const PopulationModel& model, int cap, Mode mode = Mode::kAuto)
      : state_(model, cap, mode), reach_(static_cast<std::size_t>(cap), 0.0) {}

  int cap() const { return state_.cap(); }
  const ExposureState& state() const { return state_; }

  // R[m - 1] is the expected reach at cap m.
  std::span<const double> reach() const { return reach_; }
  double reach(int m) const { return reach_.at(static_cast<std::size_t>(m - 1)); }

  std::span<const double> stream_win(GroupId j) {
    const int c = cap();
    state_.record_win(j, [&](UserId, std::int64_t n) {
      const double weight =
          state_.per_group() ? static_cast<double>(state_.model().targeted_members(j).size())
                             : 1.0;
      if (weight == 0.0) return;
      const auto prev = state_.table().row(n - 1);
      const auto cur = state_.table().row(n);
      for (int l = 0; l < c; ++l) {
        const double d = weight * (prev[static_cast<std::size_t>(l)] - cur[static_cast<std::size_t>(l)]);
        for (int m = l + 1; m <= c; ++m) reach_[static_cast<std::size_t>(m - 1)] += (m - l) * d;
      }
    });
    return reach_;
  }

 private:
  ExposureState state_;
  std::vector<double> reach_;
};

// Empirical reach distribution from uniformly re-assigning each group win to
// one of the group's k members.
struct ReachDistribution {
  int trials = 0;
  double mean = 0.0;
  double variance = 0.0;   // unbiased
  double std_error = 0.0;  // sqrt(variance / trials)
  std::vector<std::int64_t> samples;
  std::vector<std::int64_t> histogram;  // histogram[r] = trials with reach r
};

inline ReachDistribution mc_reach_distribution(const PopulationModel& model,
                                               const ImpressionCounts& counts, int cap,
                                               int trials, std::uint64_t rng_seed) {
  internal::CheckCap(cap);
  internal::CheckCounts(model, counts);
  if (trials < 1) throw DomainError("mc_reach_distribution: trials must be >= 1");
  ReachDistribution out;
  out.trials = trials;
  out.samples.assign(static_cast<std::size_t>(trials), 0);
  const int k = model.group_size();
  ParallelFor(static_cast<std::size_t>(trials), [&](std::size_t t) {
    Rng rng(DeriveSeed(rng_seed, {t}));
    std::uniform_int_distribution<int> pick(0, k - 1);
    std::vector<std::int64_t> seen(static_cast<std::size_t>(model.num_users()), 0);
    for (GroupId j = 0; j < model.num_groups(); ++j) {
      const auto& members = model.members(j);
      for (std::int64_t w = 0; w < counts.wins_per_group[static_cast<std::size_t>(j)]; ++w) {
        ++seen[static_cast<std::size_t>(members[static_cast<std::size_t>(pick(rng))])];
      }
    }
    std::int64_t r = 0;
    for (UserId i : model.targeted_users()) {
      r += std::min<std::int64_t>(seen[static_cast<std::size_t>(i)], cap);
    }
    out.samples[t] = r;
  });
  double sum = 0.0;
  std::int64_t max_r = 0;
  for (auto r : out.samples) {
    sum += static_cast<double>(r);
    max_r = std::max(max_r, r);
  }
  out.mean = sum / trials;
  double ss = 0.0;
  for (auto r : out.samples) ss += (static_cast<double>(r) - out.mean) * (static_cast<double>(r) - out.mean);
  out.variance = trials > 1 ? ss / (trials - 1) : 0.0;
  out.std_error = std::sqrt(out.variance / trials);
  out.histogram.assign(static_cast<std::size_t>(max_r) + 1, 0);
  for (auto r : out.samples) ++out.histogram[static_cast<std::size_t>(r)];
  return out;
}

// One row of a reach curve. Missing values (sigma above cap 1, bounds on
// overlapping groups) are NaN and print as empty fields.
struct ReachCurvePoint {
  std::int64_t t = 0;
  int cap = 1;
  double expected_reach = 0.0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double lower_bound = std::numeric_limits<double>::quiet_NaN();
  double upper_bound = std::numeric_limits<double>::quiet_NaN();
};

// Streams `wins` through a ReachEstimator and reports every cap after each
// `report_every`-th win and after the last one.
inline std::vector<ReachCurvePoint> reach_curve(const PopulationModel& model,
                                                std::span<const Win> wins, int cap,
                                                int report_every = 1) {
  internal::CheckCap(cap);
  if (report_every < 1) throw DomainError("reach_curve: report_every must be >= 1");
  ReachEstimator est(model, cap);
  ImpressionCounts counts = ImpressionCounts::Zero(model.num_groups());
  std::vector<ReachCurvePoint> out;
  for (std::size_t w = 0; w < wins.size(); ++w) {
    est.stream_win(wins[w].group);
    ++counts.wins_per_group[static_cast<std::size_t>(wins[w].group)];
    if ((w + 1) % static_cast<std::size_t>(report_every) != 0 && w + 1 != wins.size()) continue;
    const double sigma = std::sqrt(std::max(0.0, unique_reach_variance(model, counts)));
    for (int m = 1; m <= cap; ++m) {
      ReachCurvePoint p;
      p.t = wins[w].t;
      p.cap = m;
      p.expected_reach = est.reach(m);
      if (m == 1) p.sigma = sigma;
      if (model.is_partition()) {
        const auto b = reach_bounds(model, counts, m);
        p.lower_bound = b.lower;
        p.upper_bound = b.upper;
      }
      out.push_back(p);
    }
  }
  return out;
}

namespace internal {

inline void WriteCsvNumber(std::ostream& os, double v) {
  if (std::isnan(v)) return;
  const auto prec = os.precision(17);
  os << v;
  os.precision(prec);
}

}  // namespace internal

inline void write_reach_curve_csv(std::ostream& os, std::span<const ReachCurvePoint> points) {
  os << "t,cap,expected_reach,sigma,lower_bound,upper_bound\n";
  for (const auto& p : points) {
    os << p.t << ',' << p.cap << ',';
    internal::WriteCsvNumber(os, p.expected_reach);
    os << ',';
    internal::WriteCsvNumber(os, p.sigma);
    os << ',';
    internal::WriteCsvNumber(os, p.lower_bound);
    os << ',';
    internal::WriteCsvNumber(os, p.upper_bound);
    os << '\n';
  }
}

}  // namespace anonreach
