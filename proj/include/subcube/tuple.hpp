#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subcube/distribution.hpp"
#include "subcube/error.hpp"

namespace subcube {

using Tuple = std::vector<std::size_t>;

/// Subset of an alphabet {0, ..., size-1}.
class SymbolSet {
 public:
  SymbolSet() = default;
  explicit SymbolSet(std::size_t alphabet, bool filled = false) : members_(alphabet, filled) {}

  static SymbolSet full(std::size_t alphabet) { return SymbolSet(alphabet, true); }
  static SymbolSet single(std::size_t alphabet, std::size_t symbol) {
    SymbolSet s(alphabet);
    s.insert(symbol);
    return s;
  }

  void insert(std::size_t symbol) { members_.at(symbol) = true; }
  bool contains(std::size_t symbol) const { return symbol < members_.size() && members_[symbol]; }
  std::size_t alphabet() const noexcept { return members_.size(); }
  std::size_t count() const { return static_cast<std::size_t>(std::count(members_.begin(), members_.end(), true)); }
  bool empty() const { return count() == 0; }
  bool is_full() const { return count() == members_.size(); }

  friend bool operator==(const SymbolSet&, const SymbolSet&) = default;

 private:
  std::vector<bool> members_;
};

/// Mixed alphabets Omega_1 x ... x Omega_n, each with its canonical ordering
/// 0..|Omega_i|-1 and optional display labels.
class TupleDomain {
 public:
  TupleDomain() = default;
  explicit TupleDomain(std::vector<std::size_t> sizes, std::vector<std::vector<std::string>> labels = {})
      : sizes_(std::move(sizes)), labels_(std::move(labels)) {
    for (auto s : sizes_) {
      if (s < 1) throw std::invalid_argument("TupleDomain: every alphabet needs at least one symbol");
    }
    if (!labels_.empty()) {
      if (labels_.size() != sizes_.size()) throw std::invalid_argument("TupleDomain: label arity");
      for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (labels_[i].size() != sizes_[i]) throw std::invalid_argument("TupleDomain: label count");
      }
    }
    offsets_.assign(sizes_.size() + 1, 0);
    for (std::size_t i = 0; i < sizes_.size(); ++i) offsets_[i + 1] = offsets_[i] + bit_width(i + 1);
  }

  std::size_t arity() const noexcept { return sizes_.size(); }
  // 1-based like the binary coordinates.
  std::size_t alphabet_size(std::size_t i) const { return sizes_.at(i - 1); }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }

  int bit_width(std::size_t i) const {
    const std::size_t s = alphabet_size(i);
    int w = 0;
    while ((std::size_t{1} << w) < s) ++w;
    return w;
  }
  int total_bits() const { return offsets_.empty() ? 0 : offsets_.back(); }
  // Binary coordinates occupied by coordinate i are offset(i)+1 .. offset(i)+bit_width(i).
  int bit_offset(std::size_t i) const { return offsets_.at(i - 1); }

  std::size_t cardinality() const {
    return std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{1}, std::multiplies<>());
  }

  // Mixed-radix index, coordinate 1 most significant.
  std::size_t index_of(const Tuple& x) const {
    check(x);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) idx = idx * sizes_[i] + x[i];
    return idx;
  }

  Tuple tuple_of(std::size_t index) const {
    Tuple x(sizes_.size());
    for (std::size_t i = sizes_.size(); i-- > 0;) {
      x[i] = index % sizes_[i];
      index /= sizes_[i];
    }
    return x;
  }

  void check(const Tuple& x) const {
    if (x.size() != sizes_.size()) {
      throw OracleError(OracleErrorKind::dimension_mismatch, "tuple arity " + std::to_string(x.size()));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] >= sizes_[i]) throw OracleError(OracleErrorKind::malformed_query, "symbol out of range");
    }
  }

  std::string label(std::size_t i, std::size_t symbol) const {
    if (labels_.empty()) return std::to_string(symbol);
    return labels_.at(i - 1).at(symbol);
  }

  friend bool operator==(const TupleDomain& a, const TupleDomain& b) { return a.sizes_ == b.sizes_; }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<std::string>> labels_;
  std::vector<int> offsets_;
};

/// Exact pmf over a TupleDomain, stored densely in mixed-radix order with the
/// same block-sum and cumulative indexes as DistributionTable.
class TupleDistribution {
 public:
  TupleDistribution(TupleDomain domain, std::vector<double> probs)
      : domain_(std::move(domain)), probs_(std::move(probs)) {
    if (domain_.arity() == 0) throw std::invalid_argument("TupleDistribution: empty domain");
    if (probs_.size() != domain_.cardinality()) {
      throw std::invalid_argument("TupleDistribution: expected " +
                                  std::to_string(domain_.cardinality()) + " probabilities");
    }
    if (probs_.size() > (std::size_t{1} << kMaxDenseBits)) {
      throw std::invalid_argument("TupleDistribution: domain too large for a dense table");
    }
    double total = 0.0;
    for (double p : probs_) {
      if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("TupleDistribution: bad probability");
      total += p;
    }
    if (std::fabs(total - 1.0) > kMassTolerance) {
      throw std::invalid_argument("TupleDistribution: probabilities sum to " + std::to_string(total));
    }
    build_indexes();
  }

  static TupleDistribution uniform(TupleDomain domain) {
    const std::size_t size = domain.cardinality();
    return TupleDistribution(std::move(domain), std::vector<double>(size, 1.0 / static_cast<double>(size)));
  }

  static TupleDistribution point_mass(TupleDomain domain, const Tuple& x) {
    std::vector<double> probs(domain.cardinality(), 0.0);
    probs[domain.index_of(x)] = 1.0;
    return TupleDistribution(std::move(domain), std::move(probs));
  }

  const TupleDomain& domain() const noexcept { return domain_; }
  std::span<const double> probs() const noexcept { return probs_; }
  double prob(const Tuple& x) const { return probs_[domain_.index_of(x)]; }

  /// Mass of the prefix block x_1..x_k = a (k = a.size()).
  double block_mass(std::span<const std::size_t> a) const {
    const std::size_t k = a.size();
    if (k == domain_.arity()) return probs_[domain_.index_of(Tuple(a.begin(), a.end()))];
    return levels_.at(k)[block_index(a)];
  }

  // Mixed-radix index of a prefix block among the blocks of its length.
  std::size_t block_index(std::span<const std::size_t> a) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] >= domain_.sizes()[i]) throw OracleError(OracleErrorKind::malformed_query, "symbol out of range");
      idx = idx * domain_.sizes()[i] + a[i];
    }
    return idx;
  }

  // Atom index range [lo, hi) of the block a.
  std::pair<std::size_t, std::size_t> block_range(std::span<const std::size_t> a) const {
    std::size_t width = 1;
    for (std::size_t i = a.size(); i < domain_.arity(); ++i) width *= domain_.sizes()[i];
    const std::size_t lo = block_index(a) * width;
    return {lo, lo + width};
  }

  double range_mass(std::size_t lo, std::size_t hi) const { return cumulative_[hi] - cumulative_[lo]; }

  /// Atom drawn from the union of disjoint ascending ranges using one uniform.
  std::size_t sample_ranges(std::span<const std::pair<std::size_t, std::size_t>> ranges, double u) const {
    double total = 0.0;
    for (auto [lo, hi] : ranges) total += range_mass(lo, hi);
    if (!(total > 0.0)) {
      throw OracleError(OracleErrorKind::zero_probability_condition, "conditioning event has zero probability");
    }
    double target = u * total;
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      const auto [lo, hi] = ranges[r];
      const double mass = range_mass(lo, hi);
      if (target < mass || r + 1 == ranges.size()) {
        if (mass <= 0.0) break;
        return search(lo, hi, cumulative_[lo] + std::min(target, mass) );
      }
      target -= mass;
    }
    // Rounding fell off the end: last range with mass.
    for (std::size_t r = ranges.size(); r-- > 0;) {
      const auto [lo, hi] = ranges[r];
      if (range_mass(lo, hi) > 0.0) return search(lo, hi, cumulative_[hi]);
    }
    throw OracleError(OracleErrorKind::zero_probability_condition, "conditioning event has zero probability");
  }

  /// The relabeled distribution over {0,1}^{total_bits}: each coordinate is
  /// written as bin(symbol index) in its bit_width, unused codes get mass 0.
  DistributionTable to_binary_table() const {
    const int bits = domain_.total_bits();
    if (bits > kMaxDenseBits) throw std::invalid_argument("to_binary_table: encoding too wide");
    std::vector<double> out(std::size_t{1} << bits, 0.0);
    for (std::size_t idx = 0; idx < probs_.size(); ++idx) out[encode(domain_.tuple_of(idx))] = probs_[idx];
    return DistributionTable(bits, std::move(out));
  }

  std::uint64_t encode(const Tuple& x) const {
    std::uint64_t v = 0;
    for (std::size_t i = 1; i <= domain_.arity(); ++i) v = (v << domain_.bit_width(i)) | x[i - 1];
    return v;
  }

 private:
  std::size_t search(std::size_t lo, std::size_t hi, double target) const {
    auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(lo + 1);
    auto last = cumulative_.begin() + static_cast<std::ptrdiff_t>(hi + 1);
    auto it = std::upper_bound(first, last, target);
    std::size_t k = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    if (it == last) {
      k = hi - 1;
      while (k > lo && probs_[k] <= 0.0) --k;
    }
    return k;
  }

  void build_indexes() {
    const std::size_t n = domain_.arity();
    levels_.assign(n, {});
    const std::vector<double>* below = &probs_;
    for (std::size_t k = n; k-- > 0;) {
      const std::size_t radix = domain_.sizes()[k];
      auto& level = levels_[k];
      level.assign(below->size() / radix, 0.0);
      for (std::size_t b = 0; b < level.size(); ++b) {
        double s = 0.0;
        for (std::size_t c = 0; c < radix; ++c) s += (*below)[b * radix + c];
        level[b] = s;
      }
      below = &level;
    }
    cumulative_.resize(probs_.size() + 1);
    cumulative_[0] = 0.0;
    std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin() + 1);
  }

  TupleDomain domain_;
  std::vector<double> probs_;
  std::vector<std::vector<double>> levels_;
  std::vector<double> cumulative_;
};

}  // namespace subcube
