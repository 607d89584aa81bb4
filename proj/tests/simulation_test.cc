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


#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "anonreach.hpp"

namespace anonreach {
namespace {

struct World {
  PopulationModel model = build_partition(120, 6, TargetSpec::All(), 0);
  LogNormalSecondPrice auction;
  std::int64_t num_requests = 2000;
  RequestStream stream = generate_stream(model, num_requests, ArrivalMode::kTargetedUsers, 21);
  std::vector<double> prices = draw_prices(auction, num_requests, 22);

  CampaignResult Play(Discount d, double budget_fraction, int cap = 1, bool trace = false) {
    DiscountPolicy policy(model, d, cap);
    const BidderConfig cfg{budget_fraction * num_requests * auction.mean_price(), num_requests,
                           0.1, 10.0, {}};
    return run_campaign(model, stream, prices, auction, cfg, policy, cap, trace);
  }
};

TEST(CampaignTest, SpendNeverExceedsBudget) {
  World w;
  for (Discount d : {Discount::kUniqueImpressions, Discount::kUniqueGroups, Discount::kUniform,
                     Discount::kIdentity}) {
    for (double f : {0.01, 0.05, 0.4}) {
      const auto r = w.Play(d, f);
      EXPECT_LE(r.spend, f * 2000 * w.auction.mean_price() + 1e-9);
      EXPECT_EQ(r.wins.size(), r.served_users.size());
    }
  }
}

TEST(CampaignTest, SpendIsTheSumOfPayments) {
  World w;
  const auto r = w.Play(Discount::kUniform, 0.05, 2, true);
  double paid = 0.0;
  int won = 0;
  for (const auto& t : r.trace) {
    EXPECT_EQ(t.won, t.price_paid > 0.0);
    EXPECT_GE(t.bid, 0.1);
    EXPECT_LE(t.bid, 10.0);
    EXPECT_GE(t.reach_prob, 0.0);
    EXPECT_LE(t.reach_prob, 1.0);
    paid += t.price_paid;
    won += t.won;
    EXPECT_NEAR(t.cumulative_spend, paid, 1e-9);
  }
  EXPECT_NEAR(r.spend, paid, 1e-9);
  EXPECT_EQ(static_cast<std::size_t>(won), r.wins.size());
}

TEST(CampaignTest, PacingSettlesWhenTheBudgetBinds) {
  World w;
  const auto r = w.Play(Discount::kUniqueImpressions, 0.2);
  ASSERT_GT(r.spend_ratio.size(), 1000u);
  const std::size_t half = r.spend_ratio.size() / 2;
  const double mean =
      std::accumulate(r.spend_ratio.begin() + half, r.spend_ratio.end(), 0.0) /
      static_cast<double>(r.spend_ratio.size() - half);
  EXPECT_NEAR(mean, 1.0, 0.2);
}

TEST(CampaignTest, IdentityBidderNeverWastesImpressions) {
  World w;
  const auto r = w.Play(Discount::kIdentity, 0.4, 1, true);
  // Floor bids can still win once everyone is reached; every other win is a
  // new user.
  std::int64_t valued_wins = 0;
  for (const auto& t : r.trace) valued_wins += t.won && t.reach_prob == 1.0;
  EXPECT_EQ(r.true_reach, valued_wins);
}

TEST(CampaignTest, UniqueGroupsBidsOncePerGroup) {
  World w;
  const auto r = w.Play(Discount::kUniqueGroups, 0.4, 1, true);
  for (const auto& t : r.trace) {
    if (t.reach_prob == 0.0) {
      EXPECT_DOUBLE_EQ(t.bid, 0.1);
    }
  }
  EXPECT_NEAR(r.expected_reach,
              expected_reach(w.model, ImpressionCounts::FromWins(20, r.wins), 1), 1e-9);
}

TEST(CampaignTest, GroupSizeOneMakesUniformDiscountExact) {
  World w;
  w.model = build_partition(120, 1, TargetSpec::All(), 0);
  w.stream = generate_stream(w.model, w.num_requests, ArrivalMode::kTargetedUsers, 21);
  const auto a = w.Play(Discount::kUniform, 0.05);
  const auto b = w.Play(Discount::kIdentity, 0.05);
  EXPECT_EQ(a.true_reach, b.true_reach);
  EXPECT_DOUBLE_EQ(a.spend, b.spend);
  EXPECT_DOUBLE_EQ(a.expected_reach, static_cast<double>(a.true_reach));
}

TEST(CampaignTest, NeedsOnePricePerRequest) {
  World w;
  w.prices.pop_back();
  EXPECT_THROW(w.Play(Discount::kUniform, 0.1), ConfigError);
}

TEST(DiscountPolicyTest, NonuniformChecksTheModel) {
  auto overlap = build_overlapping(6, 2, 3, 1);
  std::vector<PropertyVector> props(3, PropertyVector::Uniform(2));
  EXPECT_THROW(DiscountPolicy(overlap, Discount::kNonuniform, 1, props), UnsupportedTopologyError);
  auto m = build_partition(6, 2, TargetSpec::All(), 0);
  DiscountPolicy p(m, Discount::kNonuniform, 1, props);
  EXPECT_EQ(p.reach_probability(0, 0), 1.0);
  p.record_win(0, 0);
  EXPECT_DOUBLE_EQ(p.reach_probability(0, 0), 0.5);
}

TEST(TraceTest, CsvAndJsonLines) {
  std::vector<TraceRecord> trace{{0, 3, 0.5, 10.0, 0.1, false, 0.0, 0.0, 0.0},
                                 {1, 2, 1.0, 9.9, 0.10101, true, 0.05, 0.05, 1.0}};
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "t,group,p_t,lambda,bid,won,price_paid,cumulative_spend,cumulative_expected_reach");
  std::ostringstream jl;
  write_trace_jsonl(jl, trace);
  std::istringstream in(jl.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["t"].get<int>(), n);
    ++n;
  }
  EXPECT_EQ(n, 2);
}

}  // namespace
}  // namespace anonreach
