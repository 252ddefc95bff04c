#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "subcube/bitstring.hpp"
#include "subcube/distribution.hpp"
#include "subcube/error.hpp"
#include "subcube/query.hpp"
#include "subcube/rng.hpp"

namespace subcube {

/// Exact pmf over the ordered domain [N] = {1, ..., N}.
class IntervalDistribution {
 public:
  explicit IntervalDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("IntervalDistribution: empty domain");
    double total = 0.0;
    for (double p : probs_) {
      if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("IntervalDistribution: bad probability");
      total += p;
    }
    if (std::fabs(total - 1.0) > kMassTolerance) {
      throw std::invalid_argument("IntervalDistribution: probabilities sum to " + std::to_string(total));
    }
    cumulative_.resize(probs_.size() + 1);
    cumulative_[0] = 0.0;
    std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin() + 1);
  }

  static IntervalDistribution uniform(std::uint64_t size) { return uniform_on(size, 1, size); }

  // Uniform on [a, b] inside [size].
  static IntervalDistribution uniform_on(std::uint64_t size, std::uint64_t a, std::uint64_t b) {
    if (a < 1 || a > b || b > size) throw std::invalid_argument("uniform_on: need 1 <= a <= b <= N");
    std::vector<double> probs(size, 0.0);
    for (std::uint64_t t = a; t <= b; ++t) probs[t - 1] = 1.0 / static_cast<double>(b - a + 1);
    return IntervalDistribution(std::move(probs));
  }

  static IntervalDistribution point_mass(std::uint64_t size, std::uint64_t t) { return uniform_on(size, t, t); }

  std::uint64_t size() const noexcept { return probs_.size(); }
  double prob(std::uint64_t t) const { return probs_.at(t - 1); }
  std::span<const double> probs() const noexcept { return probs_; }

  // Mass of [a, b]; 0 for an empty range.
  double mass(std::uint64_t a, std::uint64_t b) const {
    if (b < a) return 0.0;
    return cumulative_[b] - cumulative_[a - 1];
  }

  std::uint64_t sample(std::uint64_t a, std::uint64_t b, double u) const {
    const double base = cumulative_[a - 1];
    const double m = cumulative_[b] - base;
    auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(a);
    auto last = cumulative_.begin() + static_cast<std::ptrdiff_t>(b + 1);
    auto it = std::upper_bound(first, last, base + u * m);
    if (it == last) {
      std::uint64_t t = b;
      while (t > a && probs_[t - 1] <= 0.0) --t;
      return t;
    }
    return static_cast<std::uint64_t>(it - cumulative_.begin());
  }

  /// The same pmf over {0,1}^ell, element t written as bin_ell(t-1), padded
  /// with zero mass up to 2^ell.
  DistributionTable to_binary_table() const {
    int ell = 0;
    while ((std::uint64_t{1} << ell) < size()) ++ell;
    std::vector<double> probs(std::uint64_t{1} << ell, 0.0);
    std::copy(probs_.begin(), probs_.end(), probs.begin());
    return DistributionTable(ell, std::move(probs));
  }

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

/// Interval access to a distribution over [N].
class IntervalOracle {
 public:
  IntervalOracle(std::shared_ptr<const IntervalDistribution> dist, std::uint64_t seed)
      : dist_(std::move(dist)), rng_(seed) {}
  IntervalOracle(IntervalDistribution dist, std::uint64_t seed)
      : IntervalOracle(std::make_shared<const IntervalDistribution>(std::move(dist)), seed) {}

  std::uint64_t size() const noexcept { return dist_->size(); }
  const IntervalDistribution& distribution() const noexcept { return *dist_; }
  const QueryCounts& counts() const noexcept { return counter_.counts(); }

  std::uint64_t interval_sample(std::uint64_t a, std::uint64_t b) {
    if (a < 1 || a > b || b > size()) {
      throw OracleError(OracleErrorKind::malformed_query,
                        "interval [" + std::to_string(a) + ", " + std::to_string(b) + "] not inside [1, " +
                            std::to_string(size()) + "]");
    }
    if (!(dist_->mass(a, b) > 0.0)) {
      throw OracleError(OracleErrorKind::zero_probability_condition,
                        "interval [" + std::to_string(a) + ", " + std::to_string(b) + "] has zero probability");
    }
    const std::uint64_t t = dist_->sample(a, b, uniform01(rng_));
    counter_.record(QueryClass::interval);
    return t;
  }

  void charge_interval(std::uint64_t k) { counter_.record(QueryClass::interval, k); }

 private:
  std::shared_ptr<const IntervalDistribution> dist_;
  Rng rng_;
  QueryCounter counter_;
};

/// Binary prefix and marginal-prefix access over {0,1}^ell, ell = ceil(log2 N),
/// served by one interval query each. The domain is padded with zero-mass
/// elements N+1..2^ell; a prefix whose interval lies entirely in the padding
/// has zero probability.
class IntervalPrefixAdapter {
 public:
  explicit IntervalPrefixAdapter(IntervalOracle& oracle) : o_(&oracle) {
    while ((std::uint64_t{1} << ell_) < o_->size()) ++ell_;
  }

  int dimension() const noexcept { return ell_; }
  const QueryCounts& counts() const noexcept { return o_->counts(); }

  BitString prefix_sample(const PrefixQuery& q) {
    q.validate(ell_);
    const BitString w = q.pinned();
    const auto [a, b] = range(w);
    return bin(ell_, o_->interval_sample(a, b) - 1);
  }

  int marginal_prefix_sample(int i, const BitString& w) {
    check_slice(i, w);
    const auto [a, b] = range(w);
    return bin(ell_, o_->interval_sample(a, b) - 1).bit(i);
  }

  double prefix_bit_law(int i, const BitString& w) const {
    check_slice(i, w);
    const auto [a, b] = range(w);
    const double total = o_->distribution().mass(a, b);
    if (!(total > 0.0)) {
      throw OracleError(OracleErrorKind::zero_probability_condition,
                        "prefix " + w.to_string() + " has zero probability");
    }
    const auto [a1, b1] = clipped(prefix_to_interval(ell_, i + 1, w.append(1)));
    return o_->distribution().mass(a1, b1) / total;
  }
  double marginal_bit_law(int i, const BitString& w) const { return prefix_bit_law(i, w); }

  double unconditional_bit_law(int i) const {
    if (i < 1 || i > ell_) throw std::out_of_range("unconditional_bit_law: coordinate out of range");
    double one = 0.0;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << (i - 1)); ++v) {
      const auto [a, b] = clipped(prefix_to_interval(ell_, i + 1, BitString(v, i - 1).append(1)));
      one += o_->distribution().mass(a, b);
    }
    return one;
  }

  void charge_prefix(std::uint64_t k) { o_->charge_interval(k); }
  void charge_marginal(std::uint64_t k) { o_->charge_interval(k); }

 private:
  void check_slice(int i, const BitString& w) const {
    if (i < 1 || i > ell_ || w.size() != i - 1) {
      throw OracleError(OracleErrorKind::malformed_query, "slice invalid for the padded domain");
    }
  }

  Interval clipped(Interval r) const {
    r.last = std::min(r.last, o_->size());
    return r;  // first > last means the interval is all padding
  }

  // Interval query for cylinder w, or a ZeroProbabilityCondition when the
  // cylinder is all padding.
  Interval range(const BitString& w) const {
    const Interval r = clipped(prefix_to_interval(ell_, w.size() + 1, w));
    if (r.first > r.last) {
      throw OracleError(OracleErrorKind::zero_probability_condition,
                        "prefix " + w.to_string() + " covers only padding elements");
    }
    return r;
  }

  IntervalOracle* o_;
  int ell_ = 0;
};

}  // namespace subcube
