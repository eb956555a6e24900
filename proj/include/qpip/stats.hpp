// Copyright 2026 The qpip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace qpip {

/// Standard deviation of the mean of `n` Bernoulli(p) draws.
inline double binomial_sigma(double p, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("binomial_sigma: n = 0");
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

/// Slack for "within k sigma" comparisons. A rate of exactly 0 or 1 has zero
/// variance, so a floor of one count keeps the test meaningful.
inline double sigma_slack(double p, std::uint64_t n, double k = 3.0) {
  return std::max(k * binomial_sigma(p, n), 1.0 / static_cast<double>(n));
}

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for `successes` out of `n` at two-sided `level`.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double level = 0.99) {
  if (n == 0) return {0.0, 1.0};
  const boost::math::normal_distribution<> normal;
  const double z = boost::math::quantile(normal, 0.5 + level / 2.0);
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (phat + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct ChiSquaredResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Pearson test of homogeneity for a rows x cols table of counts. Columns
/// whose total is zero are dropped.
inline ChiSquaredResult chi_squared_homogeneity(const std::vector<std::vector<std::uint64_t>>& table) {
  if (table.size() < 2) throw std::invalid_argument("chi_squared_homogeneity: need two rows");
  const std::size_t cols = table.front().size();
  std::vector<double> row_total(table.size(), 0.0), col_total(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table[r].size() != cols) throw std::invalid_argument("chi_squared_homogeneity: ragged table");
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = static_cast<double>(table[r][c]);
      row_total[r] += v;
      col_total[c] += v;
      total += v;
    }
  }
  ChiSquaredResult out;
  std::size_t used_cols = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    if (col_total[c] == 0.0) continue;
    ++used_cols;
    for (std::size_t r = 0; r < table.size(); ++r) {
      const double expected = row_total[r] * col_total[c] / total;
      if (expected > 0.0) {
        const double diff = static_cast<double>(table[r][c]) - expected;
        out.statistic += diff * diff / expected;
      }
    }
  }
  out.dof = static_cast<double>((table.size() - 1) * (used_cols > 0 ? used_cols - 1 : 0));
  if (out.dof <= 0.0) return out;
  const boost::math::chi_squared_distribution<> dist(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

}  // namespace qpip
