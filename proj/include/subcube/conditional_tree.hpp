#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "subcube/bitstring.hpp"
#include "subcube/distribution.hpp"
#include "subcube/error.hpp"

namespace subcube {

/// The "probability tree" view of a distribution over {0,1}^n: for each slice
/// i and prefix w in {0,1}^{i-1}, Pr[x_i = 1 | x_[i-1] = w]. Entries under
/// zero-probability prefixes may be left unset.
class ConditionalTree {
 public:
  explicit ConditionalTree(int n) : n_(n) {
    if (n < 0 || n > kMaxDenseBits) {
      throw std::invalid_argument("ConditionalTree: dimension out of range");
    }
    cond_.resize(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
      cond_[static_cast<std::size_t>(i - 1)].assign(std::size_t{1} << (i - 1), kUnset);
    }
  }

  static ConditionalTree of(const DistributionTable& table) {
    ConditionalTree tree(table.dimension());
    for (int i = 1; i <= table.dimension(); ++i) {
      for (std::uint64_t w = 0; w < (std::uint64_t{1} << (i - 1)); ++w) {
        const BitString prefix(w, i - 1);
        if (table.prefix_mass(prefix) > 0.0) tree.set(i, prefix, table.conditional_one(i, prefix));
      }
    }
    return tree;
  }

  int dimension() const noexcept { return n_; }

  void set(int i, const BitString& w, double p) {
    check(i, w);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("ConditionalTree: conditional probability outside [0,1]");
    }
    slot(i, w) = p;
  }

  std::optional<double> get(int i, const BitString& w) const {
    check(i, w);
    const double v = cond_[static_cast<std::size_t>(i - 1)][w.value()];
    if (std::isnan(v)) return std::nullopt;
    return v;
  }

  std::size_t stored() const {
    std::size_t count = 0;
    for (const auto& level : cond_)
      for (double v : level) count += std::isnan(v) ? 0 : 1;
    return count;
  }

  /// The pmf described by the tree. Every prefix reached with positive mass
  /// must have its conditional set.
  DistributionTable to_table() const {
    std::vector<double> mass{1.0};
    for (int i = 1; i <= n_; ++i) {
      std::vector<double> next(mass.size() * 2, 0.0);
      const auto& level = cond_[static_cast<std::size_t>(i - 1)];
      for (std::size_t w = 0; w < mass.size(); ++w) {
        if (mass[w] <= 0.0) continue;
        const double p = level[w];
        if (std::isnan(p)) {
          throw std::invalid_argument("ConditionalTree: missing conditional for slice " +
                                      std::to_string(i) + " under positive-probability prefix " +
                                      BitString(w, i - 1).to_string());
        }
        next[2 * w] = mass[w] * (1.0 - p);
        next[2 * w + 1] = mass[w] * p;
      }
      mass = std::move(next);
    }
    return DistributionTable(n_, std::move(mass));
  }

 private:
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  void check(int i, const BitString& w) const {
    if (i < 1 || i > n_ || w.size() != i - 1) {
      throw OracleError(OracleErrorKind::malformed_query,
                        "ConditionalTree: slice (i=" + std::to_string(i) + ", |w|=" +
                            std::to_string(w.size()) + ") invalid for n=" + std::to_string(n_));
    }
  }

  double& slot(int i, const BitString& w) { return cond_[static_cast<std::size_t>(i - 1)][w.value()]; }

  int n_;
  std::vector<std::vector<double>> cond_;
};

inline double conditional_bit_prob(const ConditionalTree& tree, int i, const BitString& w) {
  if (auto p = tree.get(i, w)) return *p;
  throw OracleError(OracleErrorKind::zero_probability_condition,
                    "prefix " + w.to_string() + " has zero probability");
}

}  // namespace subcube
