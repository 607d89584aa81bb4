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

// Binomial p.m.f./c.d.f. with the extended domain f(x; n, p) = 0 and
// F(x; n, p) = 1 for x > n, and the row-wise cache used by the streaming
// estimators.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anonreach/error.hpp"

namespace anonreach {

namespace internal {

inline void CheckProbability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(std::string(what) + ": probability must lie in [0, 1], got " +
                      std::to_string(p));
  }
}

// log C(n, x) for x <= n. Exact sum of logs for short products, lgamma
// otherwise.
inline double LogChoose(std::int64_t n, std::int64_t x) {
  const std::int64_t r = std::min(x, n - x);
  if (r <= 64) {
    double acc = 0.0;
    for (std::int64_t i = 1; i <= r; ++i) {
      acc += std::log(static_cast<double>(n - r + i) / static_cast<double>(i));
    }
    return acc;
  }
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(x) + 1.0) -
         std::lgamma(static_cast<double>(n - x) + 1.0);
}

}  // namespace internal

// f(x; n, p). Exactly 0 for x > n.
inline double binom_pmf(std::int64_t x, std::int64_t n, double p) {
  internal::CheckProbability(p, "binom_pmf");
  if (x < 0 || n < 0) throw DomainError("binom_pmf: negative argument");
  if (x > n) return 0.0;
  if (p == 0.0) return x == 0 ? 1.0 : 0.0;
  if (p == 1.0) return x == n ? 1.0 : 0.0;
  const double log_f = internal::LogChoose(n, x) +
                       static_cast<double>(x) * std::log(p) +
                       static_cast<double>(n - x) * std::log1p(-p);
  return std::min(1.0, std::exp(log_f));
}

// F(x; n, p). Exactly 1 for x >= n.
inline double binom_cdf(std::int64_t x, std::int64_t n, double p) {
  internal::CheckProbability(p, "binom_cdf");
  if (x < 0 || n < 0) throw DomainError("binom_cdf: negative argument");
  if (x >= n) return 1.0;
  double acc = 0.0;
  for (std::int64_t i = 0; i <= x; ++i) acc += binom_pmf(i, n, p);
  return std::clamp(acc, 0.0, 1.0);
}

// Cache of p.m.f. rows [f(0; n, p), ..., f(cap; n, p)] for n = 0, 1, 2, ...
// grown one trial count at a time through
//
//   f(l; n, p) = f(l; n - 1, p) * n / (n - l) * (1 - p)   for n > l,
//   f(n; n, p) = p^n,
//   f(l; n, p) = 0                                        for l > n.
//
// Rows are never evicted. Readers may share a table once it stops growing.
class BinomialTable {
 public:
  BinomialTable(double success_prob, int cap)
      : success_prob_(success_prob), cap_(cap) {
    if (!(success_prob > 0.0 && success_prob <= 1.0)) {
      throw DomainError("BinomialTable: success probability must lie in (0, 1]");
    }
    if (cap < 1) throw DomainError("BinomialTable: cap must be >= 1");
    values_.assign(stride(), 0.0);
    values_[0] = 1.0;
  }

  double success_prob() const { return success_prob_; }
  int cap() const { return cap_; }

  // Number of stored rows; rows 0 .. num_rows() - 1 are present.
  std::int64_t num_rows() const {
    return static_cast<std::int64_t>(values_.size() / stride());
  }

  // Adds the row for `new_n`. A no-op when that row already exists.
  void extend(std::int64_t new_n) {
    if (new_n < num_rows()) return;
    if (new_n != num_rows()) {
      throw InternalStateError("BinomialTable::extend: row " +
                               std::to_string(new_n - 1) +
                               " missing before row " + std::to_string(new_n));
    }
    const std::size_t prev = values_.size() - stride();
    values_.resize(values_.size() + stride(), 0.0);
    const std::size_t row = values_.size() - stride();
    const double q = 1.0 - success_prob_;
    const double n = static_cast<double>(new_n);
    for (int l = 0; l <= cap_; ++l) {
      if (new_n > l) {
        values_[row + l] = values_[prev + l] * n / (n - l) * q;
      } else if (new_n == l) {
        values_[row + l] = std::pow(success_prob_, l);
      }
    }
  }

  // Grows the table until row `n` exists.
  void ensure(std::int64_t n) {
    while (num_rows() <= n) extend(num_rows());
  }

  std::span<const double> row(std::int64_t n) const {
    check_row(n);
    return {values_.data() + static_cast<std::size_t>(n) * stride(), stride()};
  }

  // f(l; n, p) for l <= cap.
  double pmf(int l, std::int64_t n) const {
    if (l < 0 || l > cap_) throw DomainError("BinomialTable::pmf: l outside [0, cap]");
    return row(n)[static_cast<std::size_t>(l)];
  }

  // F(x; n, p) for x <= cap, summed in ascending l.
  double cdf(int x, std::int64_t n) const {
    if (x < 0 || x > cap_) throw DomainError("BinomialTable::cdf: x outside [0, cap]");
    if (x >= n) return 1.0;
    const auto r = row(n);
    double acc = 0.0;
    for (int l = 0; l <= x; ++l) acc += r[static_cast<std::size_t>(l)];
    return std::min(acc, 1.0);
  }

 private:
  std::size_t stride() const { return static_cast<std::size_t>(cap_) + 1; }

  void check_row(std::int64_t n) const {
    if (n < 0 || n >= num_rows()) {
      throw InternalStateError("BinomialTable: row " + std::to_string(n) +
                               " not computed");
    }
  }

  double success_prob_;
  int cap_;
  std::vector<double> values_;  // row-major, stride cap + 1
};

}  // namespace anonreach
