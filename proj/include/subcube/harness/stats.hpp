#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

namespace subcube::harness {

inline constexpr double kConfidence = 0.99;
inline constexpr const char* kConfidenceMethod = "clopper-pearson one-sided 0.99";

/// One-sided Clopper-Pearson lower bound on a success probability.
inline double clopper_pearson_lower(std::uint64_t successes, std::uint64_t trials, double confidence = kConfidence) {
  if (trials == 0) return 0.0;
  if (successes == 0) return 0.0;
  using boost::math::binomial_distribution;
  return binomial_distribution<>::find_lower_bound_on_p(static_cast<double>(trials), static_cast<double>(successes),
                                                        1.0 - confidence);
}

inline double clopper_pearson_upper(std::uint64_t successes, std::uint64_t trials, double confidence = kConfidence) {
  if (trials == 0) return 1.0;
  if (successes == trials) return 1.0;
  using boost::math::binomial_distribution;
  return binomial_distribution<>::find_upper_bound_on_p(static_cast<double>(trials), static_cast<double>(successes),
                                                        1.0 - confidence);
}

/// A 2/3 contract holds when the lower confidence bound on the success rate
/// is at least 2/3.
struct ContractCheck {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double rate = 0.0;
  double lower_bound = 0.0;
  bool holds = false;

  static ContractCheck of(std::uint64_t successes, std::uint64_t trials) {
    ContractCheck c;
    c.successes = successes;
    c.trials = trials;
    c.rate = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
    c.lower_bound = clopper_pearson_lower(successes, trials);
    c.holds = c.lower_bound >= 2.0 / 3.0;
    return c;
  }
};

/// Sample quantile with linear interpolation between order statistics.
template <class T>
double quantile(std::vector<T> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return static_cast<double>(values[lo]) + frac * (static_cast<double>(values[hi]) - static_cast<double>(values[lo]));
}

template <class T>
double median(std::vector<T> values) {
  return quantile(std::move(values), 0.5);
}

}  // namespace subcube::harness
