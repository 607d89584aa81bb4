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

// Probabilistic discounting: the probability p_t that a request from a group
// reaches a user still under the frequency cap, the bid p_t / lambda mapped
// through the auction, and the online pacing of lambda.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "anonreach/auction.hpp"
#include "anonreach/binomial.hpp"
#include "anonreach/error.hpp"
#include "anonreach/measurement.hpp"
#include "anonreach/population.hpp"

namespace anonreach {

// p_t = (1/k) sum_{i in U_j} F(c - 1; n_i, 1/k), evaluated directly from
// counts of wins before the request.
inline double reach_probability(const PopulationModel& model, const ImpressionCounts& counts,
                                GroupId j, int cap) {
  internal::CheckCap(cap);
  internal::CheckCounts(model, counts);
  const double p = 1.0 / model.group_size();
  double acc = 0.0;
  for (UserId i : model.targeted_members(j)) {
    acc += binom_cdf(cap - 1, exposure_trials(model, counts, i), p);
  }
  return std::clamp(acc * p, 0.0, 1.0);
}

// Streaming p_t over the cached p.m.f. rows; O(k c) per request, O(c) in
// partition mode. The model must outlive the state.
class ReachProbabilityState {
 public:
  using Mode = ExposureState::Mode;

  ReachProbabilityState(const PopulationModel& model, int cap, Mode mode = Mode::kAuto)
      : state_(model, cap, mode) {}

  int cap() const { return state_.cap(); }
  const ExposureState& state() const { return state_; }

  double reach_probability(GroupId j) const {
    const auto& model = state_.model();
    const auto& targeted = model.targeted_members(j);
    const double inv_k = 1.0 / model.group_size();
    const int c = cap();
    if (state_.per_group()) {
      const double under = state_.table().cdf(c - 1, state_.group_trials(j));
      return std::clamp(static_cast<double>(targeted.size()) * inv_k * under, 0.0, 1.0);
    }
    double acc = 0.0;
    for (UserId i : targeted) acc += state_.table().cdf(c - 1, state_.trials(i));
    return std::clamp(acc * inv_k, 0.0, 1.0);
  }

  void record_win(GroupId j) {
    state_.record_win(j, [](UserId, std::int64_t) {});
  }

 private:
  ExposureState state_;
};

// p_t = sum_i q_i F(c - 1; n, q_i) for a request from a group with property
// vector q and n prior wins.
inline double reach_probability_nonuniform(const PropertyVector& prop, std::int64_t n,
                                           int cap) {
  internal::CheckCap(cap);
  if (n < 0) throw DomainError("reach_probability_nonuniform: n must be >= 0");
  double acc = 0.0;
  for (double q : prop.probs()) acc += q * binom_cdf(cap - 1, n, q);
  return std::clamp(acc, 0.0, 1.0);
}

inline double reach_probability_nonuniform(const PopulationModel& model,
                                           std::span<const PropertyVector> props,
                                           const ImpressionCounts& counts, GroupId j,
                                           int cap) {
  internal::CheckCounts(model, counts);
  internal::CheckNonuniformModel(model, props);
  if (!model.valid_group(j)) throw DomainError("unknown group " + std::to_string(j));
  if (model.targeted_members(j).empty()) return 0.0;
  return reach_probability_nonuniform(props[static_cast<std::size_t>(j)],
                                      counts.wins_per_group[static_cast<std::size_t>(j)], cap);
}

struct BidBounds {
  double floor = 0.1;
  double cap = 10.0;
};

// b* = (h/w)^{-1}(p / lambda), clamped to the bid bounds.
template <AuctionMechanism Auction>
double optimal_bid(double reach_prob, double lambda, const Auction& auction,
                   BidBounds bounds = {}) {
  if (!(lambda > 0.0)) throw DomainError("optimal_bid: lambda must be > 0");
  const double raw = auction.bid_for_marginal_value(reach_prob / lambda);
  return std::clamp(raw, bounds.floor, bounds.cap);
}

struct BidderConfig {
  double budget = 0.0;
  std::int64_t num_requests = 0;  // T, known in advance
  double learning_rate = 0.1;
  double initial_lambda = 10.0;
  BidBounds bounds;
};

// Budget-paced bidder. The multiplier moves by
// lambda <- lambda - eps (1 - spend_t / (B / T)) and never drops below
// kLambdaFloor.
class BidderState {
 public:
  static constexpr double kLambdaFloor = 1e-6;

  explicit BidderState(const BidderConfig& config)
      : lambda_(config.initial_lambda),
        budget_(config.budget),
        learning_rate_(config.learning_rate),
        bounds_(config.bounds) {
    if (!(config.budget > 0.0)) throw ConfigError("BidderState: budget must be > 0");
    if (config.num_requests < 1) throw ConfigError("BidderState: T must be >= 1");
    if (!(config.initial_lambda > 0.0)) throw ConfigError("BidderState: lambda_1 must be > 0");
    if (!(config.learning_rate >= 0.0)) throw ConfigError("BidderState: learning rate must be >= 0");
    if (!(config.bounds.floor >= 0.0 && config.bounds.floor <= config.bounds.cap)) {
      throw ConfigError("BidderState: need 0 <= bid_floor <= bid_cap");
    }
    per_request_budget_ = config.budget / static_cast<double>(config.num_requests);
  }

  double lambda() const { return lambda_; }
  double budget() const { return budget_; }
  double spent() const { return spent_; }
  double remaining() const { return budget_ - spent_; }
  double per_request_budget() const { return per_request_budget_; }
  double learning_rate() const { return learning_rate_; }
  const BidBounds& bounds() const { return bounds_; }
  bool exhausted() const { return exhausted_; }

  template <AuctionMechanism Auction>
  double bid(double reach_prob, const Auction& auction) const {
    return optimal_bid(reach_prob, lambda_, auction, bounds_);
  }

  // Whether a payment fits the remaining budget. Once one does not, the
  // campaign stops bidding for good.
  bool can_pay(double payment) {
    if (payment > remaining()) exhausted_ = true;
    return !exhausted_;
  }

  void charge(double payment) { spent_ += payment; }

  // Applies the pacing step for a request that cost `spend_t`.
  double dual_update(double spend_t) {
    const double ratio = spend_t / per_request_budget_;
    lambda_ = std::max(kLambdaFloor, lambda_ - learning_rate_ * (1.0 - ratio));
    return lambda_;
  }

 private:
  double lambda_;
  double budget_;
  double spent_ = 0.0;
  double learning_rate_;
  BidBounds bounds_;
  double per_request_budget_ = 0.0;
  bool exhausted_ = false;
};

inline double dual_update(BidderState& state, double spend_t) { return state.dual_update(spend_t); }

}  // namespace anonreach
