#pragma once

// Shared fixtures for the test suite: random tables and a brute-force
// goodness-of-fit check.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "subcube/distribution.hpp"

namespace subcube::fixtures {

/// Strictly positive random table over {0,1}^n (normalized exponentials).
inline DistributionTable random_table(int n, std::mt19937_64& gen) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(std::size_t{1} << n);
  double total = 0.0;
  for (auto& v : p) {
    v = e(gen) + 1e-3;
    total += v;
  }
  for (auto& v : p) v /= total;
  return DistributionTable(n, std::move(p));
}

/// Random table with roughly a third of its atoms set to zero (at least one
/// atom survives).
inline DistributionTable sparse_table(int n, std::mt19937_64& gen) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution drop(1.0 / 3.0);
  std::vector<double> p(std::size_t{1} << n);
  double total = 0.0;
  for (auto& v : p) {
    v = drop(gen) ? 0.0 : e(gen) + 1e-3;
    total += v;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    total = 1.0;
  }
  for (auto& v : p) v /= total;
  return DistributionTable(n, std::move(p));
}

/// Pearson goodness-of-fit of observed counts against expected probabilities.
/// Cells with expected count below 5 are pooled. Returns true when the
/// statistic stays below the (1 - alpha) chi-square quantile.
inline bool fits(const std::map<std::uint64_t, std::uint64_t>& observed, const std::map<std::uint64_t, double>& expected,
                 std::uint64_t samples, double alpha) {
  for (const auto& [k, c] : observed) {
    auto it = expected.find(k);
    if (it == expected.end() || it->second <= 0.0) return false;  // outcome outside the support
  }
  double stat = 0.0;
  int cells = 0;
  double pooled_expected = 0.0;
  double pooled_observed = 0.0;
  for (const auto& [k, p] : expected) {
    const double e = p * static_cast<double>(samples);
    const auto it = observed.find(k);
    const double o = it == observed.end() ? 0.0 : static_cast<double>(it->second);
    if (e < 5.0) {
      pooled_expected += e;
      pooled_observed += o;
      continue;
    }
    stat += (o - e) * (o - e) / e;
    ++cells;
  }
  if (pooled_expected > 0.0) {
    stat += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) / std::max(pooled_expected, 1e-12);
    ++cells;
  }
  if (cells <= 1) return true;
  const boost::math::chi_squared dist(cells - 1);
  return stat <= boost::math::quantile(dist, 1.0 - alpha);
}

}  // namespace subcube::fixtures
