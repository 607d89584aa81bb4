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

// Users, equal-size anonymity groups and the targeted set.
//
// Users and groups are 0-based. For every group j the model keeps the
// targeted members U_j, and for every user i the groups G_i that contain it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "anonreach/error.hpp"

namespace anonreach {

using UserId = int;
using GroupId = int;

class PopulationModel {
 public:
  PopulationModel(int num_users, int group_size,
                  std::vector<std::vector<UserId>> groups,
                  std::vector<bool> targeted)
      : num_users_(num_users),
        group_size_(group_size),
        groups_(std::move(groups)),
        targeted_(std::move(targeted)) {
    if (num_users < 1) throw ConfigError("population: num_users must be >= 1");
    if (group_size < 1) throw ConfigError("population: group_size must be >= 1");
    if (static_cast<int>(targeted_.size()) != num_users) {
      throw ConfigError("population: targeted mask has wrong length");
    }
    std::vector<int> seen(static_cast<std::size_t>(num_users), 0);
    for (std::size_t j = 0; j < groups_.size(); ++j) {
      auto& g = groups_[j];
      std::sort(g.begin(), g.end());
      if (static_cast<int>(g.size()) != group_size) {
        throw ConfigError("population: group " + std::to_string(j) + " has " +
                          std::to_string(g.size()) + " members, expected " +
                          std::to_string(group_size));
      }
      if (std::adjacent_find(g.begin(), g.end()) != g.end()) {
        throw ConfigError("population: group " + std::to_string(j) +
                          " lists a user twice");
      }
      for (UserId u : g) {
        if (u < 0 || u >= num_users) {
          throw ConfigError("population: group " + std::to_string(j) +
                            " references unknown user " + std::to_string(u));
        }
        ++seen[static_cast<std::size_t>(u)];
      }
    }
    partition_ = std::all_of(seen.begin(), seen.end(), [](int s) { return s <= 1; });
    rebuild_indices();
  }

  int num_users() const { return num_users_; }
  int group_size() const { return group_size_; }
  int num_groups() const { return static_cast<int>(groups_.size()); }
  int num_targeted() const { return num_targeted_; }
  bool is_partition() const { return partition_; }

  const std::vector<UserId>& members(GroupId j) const { return groups_.at(check(j)); }
  // U_j, ascending.
  const std::vector<UserId>& targeted_members(GroupId j) const {
    return targeted_members_.at(check(j));
  }
  // G_i, ascending.
  const std::vector<GroupId>& groups_of(UserId i) const {
    return groups_of_.at(static_cast<std::size_t>(i));
  }
  bool is_targeted(UserId i) const { return targeted_.at(static_cast<std::size_t>(i)); }
  const std::vector<bool>& targeted_mask() const { return targeted_; }
  const std::vector<std::vector<UserId>>& groups() const { return groups_; }

  // Targeted users in ascending order.
  const std::vector<UserId>& targeted_users() const { return targeted_users_; }

  bool valid_group(GroupId j) const { return j >= 0 && j < num_groups(); }

 private:
  std::size_t check(GroupId j) const {
    if (!valid_group(j)) throw DomainError("unknown group " + std::to_string(j));
    return static_cast<std::size_t>(j);
  }

  void rebuild_indices() {
    targeted_members_.assign(groups_.size(), {});
    groups_of_.assign(static_cast<std::size_t>(num_users_), {});
    for (std::size_t j = 0; j < groups_.size(); ++j) {
      for (UserId u : groups_[j]) {
        groups_of_[static_cast<std::size_t>(u)].push_back(static_cast<GroupId>(j));
        if (targeted_[static_cast<std::size_t>(u)]) targeted_members_[j].push_back(u);
      }
    }
    targeted_users_.clear();
    for (UserId i = 0; i < num_users_; ++i) {
      if (targeted_[static_cast<std::size_t>(i)]) targeted_users_.push_back(i);
    }
    num_targeted_ = static_cast<int>(targeted_users_.size());
  }

  int num_users_;
  int group_size_;
  std::vector<std::vector<UserId>> groups_;
  std::vector<bool> targeted_;
  bool partition_ = true;
  int num_targeted_ = 0;
  std::vector<std::vector<UserId>> targeted_members_;
  std::vector<std::vector<GroupId>> groups_of_;
  std::vector<UserId> targeted_users_;
};

// Where the targeted users sit inside a partition.
enum class Placement {
  kConcentrated,  // fill whole groups first
  kSpread,        // one per group, round robin
  kRandom,        // uniformly random subset
};

struct TargetSpec {
  enum class Kind { kAll, kList, kCount };
  Kind kind = Kind::kAll;
  std::vector<UserId> users;  // kList
  int count = 0;              // kCount
  Placement placement = Placement::kRandom;
  // kCount with kSpread: number of groups to spread over (0 = as many as
  // needed to put one targeted user in each).
  int spread_groups = 0;

  static TargetSpec All() { return {}; }
  static TargetSpec List(std::vector<UserId> users) {
    TargetSpec t;
    t.kind = Kind::kList;
    t.users = std::move(users);
    return t;
  }
  static TargetSpec Count(int count, Placement placement, int spread_groups = 0) {
    TargetSpec t;
    t.kind = Kind::kCount;
    t.count = count;
    t.placement = placement;
    t.spread_groups = spread_groups;
    return t;
  }
};

// Non-overlapping groups; user u sits in group u / group_size.
inline PopulationModel build_partition(int num_users, int group_size,
                                       const TargetSpec& target,
                                       std::uint64_t rng_seed) {
  if (num_users < 1 || group_size < 1) {
    throw ConfigError("build_partition: num_users and group_size must be >= 1");
  }
  if (num_users % group_size != 0) {
    throw ConfigError("build_partition: group_size " + std::to_string(group_size) +
                      " does not divide num_users " + std::to_string(num_users));
  }
  const int num_groups = num_users / group_size;
  std::vector<std::vector<UserId>> groups(static_cast<std::size_t>(num_groups));
  for (UserId u = 0; u < num_users; ++u) {
    groups[static_cast<std::size_t>(u / group_size)].push_back(u);
  }

  std::vector<bool> targeted(static_cast<std::size_t>(num_users), false);
  switch (target.kind) {
    case TargetSpec::Kind::kAll:
      std::fill(targeted.begin(), targeted.end(), true);
      break;
    case TargetSpec::Kind::kList:
      for (UserId u : target.users) {
        if (u < 0 || u >= num_users) {
          throw ConfigError("build_partition: targeted user " + std::to_string(u) +
                            " out of range");
        }
        targeted[static_cast<std::size_t>(u)] = true;
      }
      break;
    case TargetSpec::Kind::kCount: {
      if (target.count < 0 || target.count > num_users) {
        throw ConfigError("build_partition: targeted count out of range");
      }
      switch (target.placement) {
        case Placement::kConcentrated:
          for (int u = 0; u < target.count; ++u) targeted[static_cast<std::size_t>(u)] = true;
          break;
        case Placement::kSpread: {
          const int spread =
              target.spread_groups > 0 ? target.spread_groups : std::min(num_groups, target.count);
          if (spread > num_groups || spread * group_size < target.count) {
            throw ConfigError("build_partition: cannot spread " +
                              std::to_string(target.count) + " targeted users over " +
                              std::to_string(spread) + " groups");
          }
          for (int t = 0; t < target.count; ++t) {
            const int g = t % spread;
            const int slot = t / spread;
            targeted[static_cast<std::size_t>(g * group_size + slot)] = true;
          }
          break;
        }
        case Placement::kRandom: {
          std::vector<UserId> all(static_cast<std::size_t>(num_users));
          std::iota(all.begin(), all.end(), 0);
          std::vector<UserId> picked;
          std::mt19937_64 rng(rng_seed);
          std::sample(all.begin(), all.end(), std::back_inserter(picked), target.count, rng);
          for (UserId u : picked) targeted[static_cast<std::size_t>(u)] = true;
          break;
        }
      }
      break;
    }
  }
  return PopulationModel(num_users, group_size, std::move(groups), std::move(targeted));
}

// Random selection of round(targeted_fraction * num_users) targeted users.
inline PopulationModel build_partition(int num_users, int group_size,
                                       double targeted_fraction,
                                       std::uint64_t rng_seed) {
  if (!(targeted_fraction >= 0.0 && targeted_fraction <= 1.0)) {
    throw ConfigError("build_partition: targeted_fraction must lie in [0, 1]");
  }
  if (targeted_fraction == 1.0) {
    return build_partition(num_users, group_size, TargetSpec::All(), rng_seed);
  }
  const int count = static_cast<int>(std::lround(targeted_fraction * num_users));
  return build_partition(num_users, group_size,
                         TargetSpec::Count(count, Placement::kRandom), rng_seed);
}

// Each group draws group_size distinct users uniformly; users may land in
// several groups or in none. Every user is targeted.
inline PopulationModel build_overlapping(int num_users, int group_size,
                                         int num_groups, std::uint64_t rng_seed) {
  if (num_users < 1 || group_size < 1 || num_groups < 1) {
    throw ConfigError("build_overlapping: sizes must be >= 1");
  }
  if (group_size > num_users) {
    throw ConfigError("build_overlapping: group_size exceeds num_users");
  }
  std::mt19937_64 rng(rng_seed);
  std::vector<UserId> all(static_cast<std::size_t>(num_users));
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<UserId>> groups;
  groups.reserve(static_cast<std::size_t>(num_groups));
  for (int j = 0; j < num_groups; ++j) {
    std::vector<UserId> g;
    std::sample(all.begin(), all.end(), std::back_inserter(g), group_size, rng);
    groups.push_back(std::move(g));
  }
  return PopulationModel(num_users, group_size, std::move(groups),
                         std::vector<bool>(static_cast<std::size_t>(num_users), true));
}

// Mean of |U_j| / k over groups holding at least one targeted user.
inline double coverage(const PopulationModel& model) {
  double sum = 0.0;
  int qualifying = 0;
  for (GroupId j = 0; j < model.num_groups(); ++j) {
    const auto n = model.targeted_members(j).size();
    if (n == 0) continue;
    sum += static_cast<double>(n) / model.group_size();
    ++qualifying;
  }
  if (qualifying == 0) throw DomainError("coverage: no group contains a targeted user");
  return sum / qualifying;
}

// Visit probabilities of a group's members, ascending, summing to one. The
// order carries no user identity.
class PropertyVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit PropertyVector(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw ConfigError("PropertyVector: empty");
    double sum = 0.0;
    for (double q : probs_) {
      if (!(q >= 0.0) || !std::isfinite(q)) {
        throw ConfigError("PropertyVector: entries must be finite and >= 0");
      }
      sum += q;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw ConfigError("PropertyVector: entries sum to " + std::to_string(sum) +
                        ", expected 1");
    }
    for (double& q : probs_) q /= sum;
    std::sort(probs_.begin(), probs_.end());
  }

  static PropertyVector Uniform(int k) {
    return PropertyVector(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
  }

  // Weights ratio^0, ratio^1, ..., ratio^(k-1), normalized.
  static PropertyVector Geometric(int k, double ratio) {
    if (k < 1 || !(ratio > 0.0)) throw ConfigError("PropertyVector::Geometric: bad parameters");
    std::vector<double> w(static_cast<std::size_t>(k));
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      w[static_cast<std::size_t>(i)] = std::pow(ratio, i);
      s += w[static_cast<std::size_t>(i)];
    }
    for (double& x : w) x /= s;
    return PropertyVector(std::move(w));
  }

  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

}  // namespace anonreach
