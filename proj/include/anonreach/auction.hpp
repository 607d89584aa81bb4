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

// Second-price auctions against a log-normal competing price, and request
// streams drawn from a population.

#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "anonreach/error.hpp"
#include "anonreach/population.hpp"
#include "anonreach/rng.hpp"

namespace anonreach {

inline double StandardNormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double StandardNormalPdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// An auction form the bidder can optimize against: it maps the marginal value
// p / lambda to the bid solving h(b) / w(b) = p / lambda, where w and h are
// the derivatives of the win probability W(b) and expected cost H(b).
template <typename A>
concept AuctionMechanism = requires(const A& a, double v) {
  { a.bid_for_marginal_value(v) } -> std::convertible_to<double>;
};

struct AuctionOutcome {
  bool won = false;
  double paid = 0.0;
  double competing_price = 0.0;
};

// Second-price auction whose highest competing bid is
// exp(mu + sigma * Z), Z ~ N(0, 1). Ties lose.
class LogNormalSecondPrice {
 public:
  LogNormalSecondPrice(double mu = 0.0, double sigma2 = 0.5) : mu_(mu), sigma2_(sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(mu)) {
      throw ConfigError("LogNormalSecondPrice: need finite mu and sigma2 > 0");
    }
  }

  double mu() const { return mu_; }
  double sigma2() const { return sigma2_; }
  double sigma() const { return std::sqrt(sigma2_); }

  // W(b) = Phi((ln b - mu) / sigma).
  double win_probability(double bid) const {
    if (!(bid > 0.0)) return 0.0;
    return StandardNormalCdf((std::log(bid) - mu_) / sigma());
  }

  // H(b) = E[D; D < b] = exp(mu + sigma^2 / 2) Phi((ln b - mu - sigma^2) / sigma).
  double expected_cost(double bid) const {
    if (!(bid > 0.0)) return 0.0;
    return mean_price() * StandardNormalCdf((std::log(bid) - mu_ - sigma2_) / sigma());
  }

  double mean_price() const { return std::exp(mu_ + 0.5 * sigma2_); }

  // Paying the competing price makes h(b) = b w(b), so h / w is the identity.
  double bid_for_marginal_value(double value) const { return value; }

  double draw_price(Rng& rng) const {
    std::normal_distribution<double> z(0.0, 1.0);
    return std::exp(mu_ + sigma() * z(rng));
  }

  AuctionOutcome resolve(double bid, double competing_price) const {
    if (bid > competing_price) return {true, competing_price, competing_price};
    return {false, 0.0, competing_price};
  }

 private:
  double mu_;
  double sigma2_;
};

static_assert(AuctionMechanism<LogNormalSecondPrice>);

inline AuctionOutcome run_auction(const LogNormalSecondPrice& model, double bid, Rng& rng) {
  if (!(bid >= 0.0)) throw DomainError("run_auction: bid must be >= 0");
  return model.resolve(bid, model.draw_price(rng));
}

// How ad requests arrive.
enum class ArrivalMode {
  kTargetedUsers,   // a uniformly drawn targeted user, through one of its groups
  kGroupMembers,    // a uniformly drawn group with a targeted member, then any member
  kPropertyVectors, // a uniformly drawn targeted group, visitor by its property vector
};

struct Request {
  GroupId group = 0;
  // Ground truth only; never shown to the bidder or the estimators.
  UserId hidden_user = 0;
};

struct RequestStream {
  std::vector<Request> requests;
  std::uint64_t rng_seed = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(requests.size()); }
  GroupId group(std::int64_t t) const { return requests.at(static_cast<std::size_t>(t)).group; }
};

// Draws T requests. For kPropertyVectors, each group's members are matched to
// the sorted visit probabilities by a hidden random permutation.
inline RequestStream generate_stream(const PopulationModel& model, std::int64_t num_requests,
                                     ArrivalMode arrival, std::uint64_t rng_seed,
                                     std::span<const PropertyVector> props = {}) {
  if (num_requests < 0) throw ConfigError("generate_stream: T must be >= 0");
  RequestStream out;
  out.rng_seed = rng_seed;
  out.requests.reserve(static_cast<std::size_t>(num_requests));
  Rng rng(rng_seed);

  std::vector<GroupId> eligible;
  for (GroupId j = 0; j < model.num_groups(); ++j) {
    if (!model.targeted_members(j).empty()) eligible.push_back(j);
  }
  if (eligible.empty()) throw ConfigError("generate_stream: no targeted user belongs to a group");

  switch (arrival) {
    case ArrivalMode::kTargetedUsers: {
      std::vector<UserId> sources;
      for (UserId i : model.targeted_users()) {
        if (!model.groups_of(i).empty()) sources.push_back(i);
      }
      std::uniform_int_distribution<std::size_t> pick_user(0, sources.size() - 1);
      for (std::int64_t t = 0; t < num_requests; ++t) {
        const UserId u = sources[pick_user(rng)];
        const auto& gs = model.groups_of(u);
        std::uniform_int_distribution<std::size_t> pick_group(0, gs.size() - 1);
        out.requests.push_back({gs[pick_group(rng)], u});
      }
      break;
    }
    case ArrivalMode::kGroupMembers: {
      std::uniform_int_distribution<std::size_t> pick_group(0, eligible.size() - 1);
      std::uniform_int_distribution<int> pick_member(0, model.group_size() - 1);
      for (std::int64_t t = 0; t < num_requests; ++t) {
        const GroupId j = eligible[pick_group(rng)];
        out.requests.push_back({j, model.members(j)[static_cast<std::size_t>(pick_member(rng))]});
      }
      break;
    }
    case ArrivalMode::kPropertyVectors: {
      if (!model.is_partition()) {
        throw UnsupportedTopologyError("generate_stream: property vectors need non-overlapping groups");
      }
      if (static_cast<int>(props.size()) != model.num_groups()) {
        throw ConfigError("generate_stream: need one property vector per group");
      }
      std::vector<std::vector<UserId>> by_rank(static_cast<std::size_t>(model.num_groups()));
      std::vector<std::discrete_distribution<int>> visitor(static_cast<std::size_t>(model.num_groups()));
      for (GroupId j = 0; j < model.num_groups(); ++j) {
        const auto& q = props[static_cast<std::size_t>(j)];
        if (q.size() != model.group_size()) {
          throw ConfigError("generate_stream: property vector of group " + std::to_string(j) +
                            " has wrong length");
        }
        auto& order = by_rank[static_cast<std::size_t>(j)];
        order = model.members(j);
        std::shuffle(order.begin(), order.end(), rng);
        visitor[static_cast<std::size_t>(j)] =
            std::discrete_distribution<int>(q.probs().begin(), q.probs().end());
      }
      std::uniform_int_distribution<std::size_t> pick_group(0, eligible.size() - 1);
      for (std::int64_t t = 0; t < num_requests; ++t) {
        const GroupId j = eligible[pick_group(rng)];
        const int rank = visitor[static_cast<std::size_t>(j)](rng);
        out.requests.push_back({j, by_rank[static_cast<std::size_t>(j)][static_cast<std::size_t>(rank)]});
      }
      break;
    }
  }
  return out;
}

// Realized reach: sum over targeted users of min(times served, cap).
inline std::int64_t true_reach(const PopulationModel& model,
                               std::span<const UserId> served_users, int cap) {
  if (cap < 1) throw DomainError("true_reach: cap must be >= 1");
  std::vector<std::int64_t> seen(static_cast<std::size_t>(model.num_users()), 0);
  for (UserId u : served_users) {
    if (u < 0 || u >= model.num_users()) throw DomainError("true_reach: unknown user");
    ++seen[static_cast<std::size_t>(u)];
  }
  std::int64_t r = 0;
  for (UserId i : model.targeted_users()) {
    r += std::min<std::int64_t>(seen[static_cast<std::size_t>(i)], cap);
  }
  return r;
}

}  // namespace anonreach
