#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "subcube/bitstring.hpp"
#include "subcube/error.hpp"
#include "subcube/rng.hpp"

namespace subcube {

// Dense tables are exact ground truth; beyond this size only structured
// representations are used.
inline constexpr int kMaxDenseBits = 20;
inline constexpr double kMassTolerance = 1e-12;

/// Exact pmf over {0,1}^n, indexed lexicographically (coordinate 1 = MSB).
///
/// Besides the pmf the table keeps, for every prefix length k, the masses of
/// all 2^k prefix cylinders (summed pairwise from the leaves) and the running
/// cumulative sum used for sampling. All three are immutable after
/// construction.
class DistributionTable {
 public:
  DistributionTable() : DistributionTable(0, {1.0}) {}

  DistributionTable(int n, std::vector<double> probs) : n_(n), probs_(std::move(probs)) {
    if (n < 0 || n > kMaxDenseBits) {
      throw std::invalid_argument("DistributionTable: dimension " + std::to_string(n) +
                                  " outside [0, " + std::to_string(kMaxDenseBits) + "]");
    }
    if (probs_.size() != (std::size_t{1} << n)) {
      throw std::invalid_argument("DistributionTable: expected 2^" + std::to_string(n) +
                                  " probabilities, got " + std::to_string(probs_.size()));
    }
    double total = 0.0;
    for (double p : probs_) {
      if (!std::isfinite(p) || p < 0.0) {
        throw std::invalid_argument("DistributionTable: probabilities must be finite and >= 0");
      }
      total += p;
    }
    if (std::fabs(total - 1.0) > kMassTolerance) {
      throw std::invalid_argument("DistributionTable: probabilities sum to " +
                                  std::to_string(total) + ", not 1");
    }
    build_indexes();
  }

  static DistributionTable uniform(int n) {
    const std::size_t size = std::size_t{1} << n;
    return DistributionTable(n, std::vector<double>(size, 1.0 / static_cast<double>(size)));
  }

  static DistributionTable point_mass(const BitString& x) {
    std::vector<double> probs(std::size_t{1} << x.size(), 0.0);
    probs[x.value()] = 1.0;
    return DistributionTable(x.size(), std::move(probs));
  }

  /// Product distribution with Pr[x_i = 1] = p_one[i-1].
  static DistributionTable product(std::span<const double> p_one) {
    const int n = static_cast<int>(p_one.size());
    if (n > kMaxDenseBits) throw std::invalid_argument("product: dimension too large for a table");
    std::vector<double> probs(std::size_t{1} << n);
    for (std::uint64_t x = 0; x < probs.size(); ++x) {
      double v = 1.0;
      for (int i = 1; i <= n; ++i) {
        const double p = p_one[static_cast<std::size_t>(i - 1)];
        v *= ((x >> (n - i)) & 1u) ? p : 1.0 - p;
      }
      probs[x] = v;
    }
    return DistributionTable(n, std::move(probs));
  }

  int dimension() const noexcept { return n_; }
  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  std::span<const double> cumulative() const noexcept { return cumulative_; }

  double operator[](std::uint64_t index) const { return probs_.at(index); }
  double prob(const BitString& x) const {
    check_length(x, n_);
    return probs_[x.value()];
  }

  /// Pr[x_[|w|] = w].
  double prefix_mass(const BitString& w) const {
    if (w.size() > n_) throw std::invalid_argument("prefix_mass: prefix longer than dimension");
    if (w.size() == n_) return probs_[w.value()];
    return levels_[static_cast<std::size_t>(w.size())][w.value()];
  }

  /// Pr[x_i = 1 | x_[i-1] = w]; throws ZeroProbabilityCondition when Pr[w] = 0.
  double conditional_one(int i, const BitString& w) const {
    check_slice(i, w);
    const double one = prefix_mass(w.append(1));
    const double total = prefix_mass(w.append(0)) + one;
    if (total <= 0.0) {
      throw OracleError(OracleErrorKind::zero_probability_condition,
                        "prefix " + w.to_string() + " has zero probability");
    }
    return one / total;
  }

  /// Pr[x_i = 1].
  double marginal_one(int i) const {
    if (i < 1 || i > n_) throw std::out_of_range("marginal_one: coordinate out of range");
    const auto& level = i == n_ ? probs_ : levels_[static_cast<std::size_t>(i)];
    double one = 0.0;
    for (std::uint64_t w = 1; w < level.size(); w += 2) one += level[w];
    return one;
  }

  BitString sample(Rng& rng) const { return BitString(sample_range(0, size(), uniform01(rng)), n_); }

  /// Index of an atom drawn from the table restricted to [lo, hi) given a
  /// uniform u. The range must carry positive mass.
  std::uint64_t sample_range(std::uint64_t lo, std::uint64_t hi, double u) const {
    const double base = cumulative_[lo];
    const double mass = cumulative_[hi] - base;
    if (!(mass > 0.0)) {
      throw OracleError(OracleErrorKind::zero_probability_condition, "empty conditioning range");
    }
    return search(lo, hi, base + u * mass);
  }

  friend bool operator==(const DistributionTable& a, const DistributionTable& b) {
    return a.n_ == b.n_ && a.probs_ == b.probs_;
  }

 private:
  static void check_length(const BitString& x, int n) {
    if (x.size() != n) {
      throw std::invalid_argument("expected a string of length " + std::to_string(n) + ", got " +
                                  std::to_string(x.size()));
    }
  }

  void check_slice(int i, const BitString& w) const {
    if (i < 1 || i > n_ || w.size() != i - 1) {
      throw OracleError(OracleErrorKind::malformed_query,
                        "slice (i=" + std::to_string(i) + ", |w|=" + std::to_string(w.size()) +
                            ") invalid for n=" + std::to_string(n_));
    }
  }

  std::uint64_t search(std::uint64_t lo, std::uint64_t hi, double target) const {
    // First atom k in [lo, hi) with cumulative_[k+1] > target.
    auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(lo + 1);
    auto last = cumulative_.begin() + static_cast<std::ptrdiff_t>(hi + 1);
    auto it = std::upper_bound(first, last, target);
    std::uint64_t k = static_cast<std::uint64_t>(it - cumulative_.begin()) - 1;
    if (it == last) {
      // Rounding pushed the target past the range; take its last positive atom.
      k = hi - 1;
      while (k > lo && probs_[k] <= 0.0) --k;
    }
    return k;
  }

  void build_indexes() {
    levels_.assign(static_cast<std::size_t>(n_), {});
    const std::vector<double>* below = &probs_;
    for (int k = n_ - 1; k >= 0; --k) {
      auto& level = levels_[static_cast<std::size_t>(k)];
      level.resize(std::size_t{1} << k);
      for (std::size_t w = 0; w < level.size(); ++w) level[w] = (*below)[2 * w] + (*below)[2 * w + 1];
      below = &level;
    }
    cumulative_.resize(probs_.size() + 1);
    cumulative_[0] = 0.0;
    std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin() + 1);
  }

  int n_ = 0;
  std::vector<double> probs_;
  std::vector<std::vector<double>> levels_;  // levels_[k][w] = Pr[x_[k] = w], k < n
  std::vector<double> cumulative_;
};

/// Product of independent bits, Pr[x_i = 1] = p_one[i-1]. Usable at any
/// dimension up to kMaxBits; convert with to_table() when small.
struct ProductSpec {
  std::vector<double> p_one;

  int dimension() const noexcept { return static_cast<int>(p_one.size()); }

  DistributionTable to_table() const { return DistributionTable::product(p_one); }

  BitString sample(Rng& rng) const {
    std::uint64_t v = 0;
    for (double p : p_one) v = (v << 1) | (bernoulli(rng, p) ? 1u : 0u);
    return BitString(v, dimension());
  }
};

}  // namespace subcube
