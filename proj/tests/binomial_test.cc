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
#include <cstdint>
#include <random>

#include <gtest/gtest.h>

#include "anonreach.hpp"
#include "oracles.hpp"

namespace anonreach {
namespace {

TEST(BinomPmfTest, SmallValues) {
  EXPECT_DOUBLE_EQ(binom_pmf(1, 2, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(binom_pmf(0, 2, 0.5), 0.25);
  EXPECT_EQ(binom_pmf(3, 2, 0.5), 0.0);
  EXPECT_EQ(binom_pmf(0, 0, 0.3), 1.0);
}

TEST(BinomPmfTest, DegenerateProbabilities) {
  EXPECT_EQ(binom_pmf(0, 5, 0.0), 1.0);
  EXPECT_EQ(binom_pmf(1, 5, 0.0), 0.0);
  EXPECT_EQ(binom_pmf(5, 5, 1.0), 1.0);
  EXPECT_EQ(binom_pmf(4, 5, 1.0), 0.0);
}

TEST(BinomPmfTest, MatchesFactorialFormula) {
  for (int n = 0; n <= 40; ++n) {
    for (double p : {0.01, 1.0 / 6, 0.5, 0.9}) {
      for (int x = 0; x <= n; ++x) {
        const double want = testing::FactorialPmf(x, n, p);
        EXPECT_NEAR(binom_pmf(x, n, p), want, 1e-13 + 1e-11 * want) << x << " " << n << " " << p;
      }
    }
  }
}

TEST(BinomPmfTest, LargeTrialCountsStayFinite) {
  double sum = 0.0;
  for (int x = 0; x <= 5000; ++x) sum += binom_pmf(x, 5000, 0.3);
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(BinomPmfTest, RejectsBadArguments) {
  EXPECT_THROW(binom_pmf(1, 2, -0.1), DomainError);
  EXPECT_THROW(binom_pmf(1, 2, 1.5), DomainError);
  EXPECT_THROW(binom_pmf(1, 2, std::nan("")), DomainError);
  EXPECT_THROW(binom_pmf(-1, 2, 0.5), DomainError);
  EXPECT_THROW(binom_pmf(1, -2, 0.5), DomainError);
}

TEST(BinomCdfTest, ExtendedDomain) {
  EXPECT_EQ(binom_cdf(2, 2, 0.5), 1.0);
  EXPECT_EQ(binom_cdf(7, 2, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(binom_cdf(0, 2, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(binom_cdf(1, 2, 0.5), 0.75);
}

TEST(BinomCdfTest, MonotoneAndBounded) {
  for (int n = 0; n <= 30; ++n) {
    double prev = 0.0;
    for (int x = 0; x <= n + 2; ++x) {
      const double f = binom_cdf(x, n, 0.37);
      EXPECT_GE(f, prev - 1e-15);
      EXPECT_LE(f, 1.0);
      prev = f;
    }
    EXPECT_EQ(binom_cdf(n, n, 0.37), 1.0);
  }
}

TEST(BinomialTableTest, GrowsRowByRow) {
  BinomialTable t(0.5, 1);
  EXPECT_EQ(t.num_rows(), 1);
  t.extend(1);
  t.extend(2);
  const auto row = t.row(2);
  ASSERT_EQ(row.size(), 2u);
  EXPECT_DOUBLE_EQ(row[0], 0.25);
  EXPECT_DOUBLE_EQ(row[1], 0.5);
  t.extend(1);  // existing row: no-op
  EXPECT_EQ(t.num_rows(), 3);
}

TEST(BinomialTableTest, DiagonalIsPowerOfP) {
  BinomialTable t(0.5, 2);
  t.ensure(2);
  EXPECT_DOUBLE_EQ(t.pmf(2, 2), 0.25);
  EXPECT_EQ(t.pmf(2, 1), 0.0);
}

TEST(BinomialTableTest, MatchesDirectPmfAndCdf) {
  for (double p : {1.0, 0.5, 1.0 / 3, 1.0 / 6, 1.0 / 120}) {
    for (int cap : {1, 2, 4, 8}) {
      BinomialTable t(p, cap);
      t.ensure(600);
      for (std::int64_t n = 0; n <= 600; n += (n < 20 ? 1 : 37)) {
        for (int l = 0; l <= cap; ++l) {
          const double want = binom_pmf(l, n, p);
          EXPECT_NEAR(t.pmf(l, n), want, 1e-12 + 1e-9 * want) << p << " " << n << " " << l;
          EXPECT_NEAR(t.cdf(l, n), binom_cdf(l, n, p), 1e-12);
        }
      }
    }
  }
}

TEST(BinomialTableTest, OutOfOrderUseIsAnError) {
  BinomialTable t(0.5, 2);
  EXPECT_THROW(t.extend(3), InternalStateError);
  EXPECT_THROW(t.row(1), InternalStateError);
  EXPECT_THROW(t.pmf(3, 0), DomainError);
  EXPECT_THROW(BinomialTable(0.0, 1), DomainError);
  EXPECT_THROW(BinomialTable(0.5, 0), DomainError);
}

TEST(BinomialTableTest, RowsSumToOneWhenCapCoversN) {
  BinomialTable t(0.25, 8);
  t.ensure(8);
  for (std::int64_t n = 0; n <= 8; ++n) {
    double s = 0.0;
    for (double v : t.row(n)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
}

}  // namespace
}  // namespace anonreach
