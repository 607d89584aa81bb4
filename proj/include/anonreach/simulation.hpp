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

// One campaign played through a request stream: discount, bid, auction,
// pace, measure.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "anonreach/auction.hpp"
#include "anonreach/measurement.hpp"
#include "anonreach/optimization.hpp"
#include "anonreach/population.hpp"

namespace anonreach {

// How the bidder values a request.
enum class Discount {
  kUniqueImpressions,  // every request counts: p_t = 1
  kUniqueGroups,       // p_t = 1 until the group has been served once
  kUniform,            // uniform in-group arrivals
  kNonuniform,         // property-vector arrivals
  kIdentity,           // bidder sees the user: no privacy
};

inline const char* DiscountName(Discount d) {
  switch (d) {
    case Discount::kUniqueImpressions: return "A";
    case Discount::kUniqueGroups: return "B";
    case Discount::kUniform: return "C";
    case Discount::kNonuniform: return "D";
    case Discount::kIdentity: return "identity";
  }
  return "?";
}

class DiscountPolicy {
 public:
  DiscountPolicy(const PopulationModel& model, Discount kind, int cap,
                 std::span<const PropertyVector> props = {})
      : model_(&model),
        kind_(kind),
        cap_(cap),
        props_(props),
        uniform_(model, cap),
        group_wins_(static_cast<std::size_t>(model.num_groups()), 0),
        user_wins_(static_cast<std::size_t>(model.num_users()), 0) {
    if (kind == Discount::kNonuniform) {
      internal::CheckNonuniformModel(model, props);
    }
  }

  Discount kind() const { return kind_; }

  // `hidden_user` is consulted only by kIdentity.
  double reach_probability(GroupId j, UserId hidden_user) const {
    switch (kind_) {
      case Discount::kUniqueImpressions:
        return model_->targeted_members(j).empty() ? 0.0 : 1.0;
      case Discount::kUniqueGroups:
        return !model_->targeted_members(j).empty() &&
                       group_wins_[static_cast<std::size_t>(j)] == 0
                   ? 1.0
                   : 0.0;
      case Discount::kUniform:
        return uniform_.reach_probability(j);
      case Discount::kNonuniform:
        if (model_->targeted_members(j).empty()) return 0.0;
        return reach_probability_nonuniform(props_[static_cast<std::size_t>(j)],
                                            group_wins_[static_cast<std::size_t>(j)], cap_);
      case Discount::kIdentity:
        return model_->is_targeted(hidden_user) &&
                       user_wins_[static_cast<std::size_t>(hidden_user)] < cap_
                   ? 1.0
                   : 0.0;
    }
    return 0.0;
  }

  void record_win(GroupId j, UserId hidden_user) {
    ++group_wins_[static_cast<std::size_t>(j)];
    ++user_wins_[static_cast<std::size_t>(hidden_user)];
    if (kind_ == Discount::kUniform) uniform_.record_win(j);
  }

 private:
  const PopulationModel* model_;
  Discount kind_;
  int cap_;
  std::span<const PropertyVector> props_;
  ReachProbabilityState uniform_;
  std::vector<std::int64_t> group_wins_;
  std::vector<std::int64_t> user_wins_;
};

struct TraceRecord {
  std::int64_t t = 0;
  GroupId group = 0;
  double reach_prob = 0.0;
  double lambda = 0.0;
  double bid = 0.0;
  bool won = false;
  double price_paid = 0.0;
  double cumulative_spend = 0.0;
  double cumulative_expected_reach = 0.0;
};

struct CampaignResult {
  std::vector<Win> wins;
  std::vector<UserId> served_users;  // hidden identity of each win
  double spend = 0.0;
  std::int64_t true_reach = 0;
  double expected_reach = 0.0;  // uniform estimator on the won groups
  double final_lambda = 0.0;
  std::vector<double> spend_ratio;  // r_t for every request bid on
  std::vector<TraceRecord> trace;   // filled when requested

  double roas() const { return spend > 0.0 ? static_cast<double>(true_reach) / spend : 0.0; }
};

// Competing prices for T requests, drawn independently of the stream so
// several bidders can face the same market.
inline std::vector<double> draw_prices(const LogNormalSecondPrice& auction, std::int64_t n,
                                       std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  std::vector<double> prices(static_cast<std::size_t>(n));
  for (auto& p : prices) p = auction.draw_price(rng);
  return prices;
}

// Plays `stream` against `prices`. Requests stop being bid on once a winning
// price would exceed the remaining budget.
inline CampaignResult run_campaign(const PopulationModel& model, const RequestStream& stream,
                                   std::span<const double> prices,
                                   const LogNormalSecondPrice& auction,
                                   const BidderConfig& bidder_config, DiscountPolicy& policy,
                                   int cap, bool keep_trace = false) {
  if (prices.size() != stream.requests.size()) {
    throw ConfigError("run_campaign: need one competing price per request");
  }
  BidderState bidder(bidder_config);
  ReachEstimator estimator(model, cap);
  CampaignResult out;
  out.spend_ratio.reserve(stream.requests.size());
  for (std::int64_t t = 0; t < stream.size(); ++t) {
    if (bidder.exhausted()) break;
    const Request& req = stream.requests[static_cast<std::size_t>(t)];
    const double p = policy.reach_probability(req.group, req.hidden_user);
    const double lambda = bidder.lambda();
    const double bid = bidder.bid(p, auction);
    AuctionOutcome outcome = auction.resolve(bid, prices[static_cast<std::size_t>(t)]);
    if (outcome.won && !bidder.can_pay(outcome.paid)) outcome = {false, 0.0, outcome.competing_price};
    if (outcome.won) {
      bidder.charge(outcome.paid);
      policy.record_win(req.group, req.hidden_user);
      estimator.stream_win(req.group);
      out.wins.push_back({t, req.group});
      out.served_users.push_back(req.hidden_user);
    }
    if (bidder.exhausted()) break;
    out.spend_ratio.push_back(outcome.paid / bidder.per_request_budget());
    bidder.dual_update(outcome.paid);
    if (keep_trace) {
      out.trace.push_back({t, req.group, p, lambda, bid, outcome.won, outcome.paid,
                           bidder.spent(), estimator.reach(cap)});
    }
  }
  out.spend = bidder.spent();
  out.final_lambda = bidder.lambda();
  out.true_reach = true_reach(model, out.served_users, cap);
  out.expected_reach = estimator.reach(cap);
  return out;
}

inline void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace) {
  const auto prec = os.precision(17);
  os << "t,group,p_t,lambda,bid,won,price_paid,cumulative_spend,cumulative_expected_reach\n";
  for (const auto& r : trace) {
    os << r.t << ',' << r.group << ',' << r.reach_prob << ',' << r.lambda << ',' << r.bid << ','
       << (r.won ? 1 : 0) << ',' << r.price_paid << ',' << r.cumulative_spend << ','
       << r.cumulative_expected_reach << '\n';
  }
  os.precision(prec);
}

// One JSON object per line.
inline void write_trace_jsonl(std::ostream& os, std::span<const TraceRecord> trace) {
  const auto prec = os.precision(17);
  for (const auto& r : trace) {
    os << "{\"t\":" << r.t << ",\"group\":" << r.group << ",\"p_t\":" << r.reach_prob
       << ",\"lambda\":" << r.lambda << ",\"bid\":" << r.bid
       << ",\"won\":" << (r.won ? "true" : "false") << ",\"price_paid\":" << r.price_paid
       << ",\"cumulative_spend\":" << r.cumulative_spend
       << ",\"cumulative_expected_reach\":" << r.cumulative_expected_reach << "}\n";
  }
  os.precision(prec);
}

}  // namespace anonreach
