#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "subcube/bitstring.hpp"
#include "subcube/distribution.hpp"
#include "subcube/error.hpp"
#include "subcube/query.hpp"
#include "subcube/rng.hpp"

namespace subcube {

// Access models. An oracle type satisfies exactly the concepts of the queries
// it can answer; the testers are constrained on these, so handing a tester a
// view with the wrong access model fails to compile.

template <class O>
concept Metered = requires(const O& o) {
  { o.counts() } -> std::convertible_to<QueryCounts>;
  { o.dimension() } -> std::convertible_to<int>;
};

template <class O>
concept UnconditionalAccess = Metered<O> && requires(O& o) {
  { o.draw_unconditional() } -> std::same_as<BitString>;
};

template <class O>
concept SubcubeAccess = Metered<O> && requires(O& o, const SubcubeQuery& q) {
  { o.subcube_sample(q) } -> std::same_as<BitString>;
};

template <class O>
concept PrefixAccess = Metered<O> && requires(O& o, const PrefixQuery& q) {
  { o.prefix_sample(q) } -> std::same_as<BitString>;
};

template <class O>
concept MarginalPrefixAccess = Metered<O> && requires(O& o, int i, const BitString& w) {
  { o.marginal_prefix_sample(i, w) } -> std::convertible_to<int>;
};

// Exact-law hooks: the oracle can report the exact law of the bit it would
// serve and be charged for samples it did not physically draw.

template <class O>
concept ExactPrefixAccess = PrefixAccess<O> && requires(O& o, int i, const BitString& w, std::uint64_t k) {
  { o.prefix_bit_law(i, w) } -> std::convertible_to<double>;
  { o.unconditional_bit_law(i) } -> std::convertible_to<double>;
  o.charge_prefix(k);
};

template <class O>
concept ExactMarginalPrefixAccess =
    MarginalPrefixAccess<O> && requires(O& o, int i, const BitString& w, std::uint64_t k) {
      { o.marginal_bit_law(i, w) } -> std::convertible_to<double>;
      o.charge_marginal(k);
    };

template <class O>
concept ExactUnconditionalAccess = UnconditionalAccess<O> && requires(O& o, int i, std::uint64_t k) {
  { o.unconditional_bit_law(i) } -> std::convertible_to<double>;
  o.charge_unconditional(k);
};

// Batched draws: the sum of bit i over k identical queries in one call.

template <class O>
concept BatchedPrefixBits = requires(O& o, int i, const BitString& w, std::uint64_t k) {
  { o.prefix_bit_sum(i, w, k) } -> std::convertible_to<std::uint64_t>;
};

template <class O>
concept BatchedMarginalBits = requires(O& o, int i, const BitString& w, std::uint64_t k) {
  { o.marginal_prefix_sum(i, w, k) } -> std::convertible_to<std::uint64_t>;
};

template <class O>
concept BatchedUnconditionalBits = requires(O& o, int i, std::uint64_t k) {
  { o.unconditional_bit_sum(i, k) } -> std::convertible_to<std::uint64_t>;
};

/// All access models over an explicit table, with its own RNG stream and
/// meter. Queries that raise ZeroProbabilityCondition are not metered.
class TableOracle {
 public:
  TableOracle(std::shared_ptr<const DistributionTable> table, std::uint64_t seed)
      : table_(std::move(table)), rng_(seed) {
    if (!table_) throw std::invalid_argument("TableOracle: null table");
  }
  TableOracle(DistributionTable table, std::uint64_t seed)
      : TableOracle(std::make_shared<const DistributionTable>(std::move(table)), seed) {}

  int dimension() const noexcept { return table_->dimension(); }
  const DistributionTable& table() const noexcept { return *table_; }
  const QueryCounts& counts() const noexcept { return counter_.counts(); }
  Rng& rng() noexcept { return rng_; }

  BitString draw_unconditional() {
    BitString x = table_->sample(rng_);
    counter_.record(QueryClass::unconditional);
    return x;
  }

  BitString subcube_sample(const SubcubeQuery& q) {
    check_dimension(q.n);
    BitString x;
    if (q.is_prefix()) {
      int k = 0;
      while (k < q.n && q.is_fixed(k + 1)) ++k;
      x = sample_cylinder(BitString(k == 0 ? 0 : q.values >> (q.n - k), k));
    } else {
      const auto& atoms = subcube_atoms(q);
      if (atoms.cumulative.empty() || !(atoms.cumulative.back() > 0.0)) {
        throw OracleError(OracleErrorKind::zero_probability_condition,
                          "subcube " + q.to_string() + " has zero probability");
      }
      x = BitString(atoms.pick(uniform01(rng_)), dimension());
    }
    counter_.record(QueryClass::subcube);
    return x;
  }

  BitString prefix_sample(const PrefixQuery& q) {
    q.validate(dimension());
    BitString x = sample_cylinder(q.pinned());
    counter_.record(QueryClass::prefix);
    return x;
  }

  int marginal_prefix_sample(int i, const BitString& w) {
    const double p = table_->conditional_one(i, w);
    const int b = bernoulli(rng_, p) ? 1 : 0;
    counter_.record(QueryClass::marginal);
    return b;
  }

  double prefix_bit_law(int i, const BitString& w) const { return table_->conditional_one(i, w); }
  double marginal_bit_law(int i, const BitString& w) const { return table_->conditional_one(i, w); }
  double unconditional_bit_law(int i) const { return table_->marginal_one(i); }

  void charge_unconditional(std::uint64_t k) { counter_.record(QueryClass::unconditional, k); }
  void charge_prefix(std::uint64_t k) { counter_.record(QueryClass::prefix, k); }
  void charge_marginal(std::uint64_t k) { counter_.record(QueryClass::marginal, k); }
  void charge_subcube(std::uint64_t k) { counter_.record(QueryClass::subcube, k); }

  std::uint64_t prefix_bit_sum(int i, const BitString& w, std::uint64_t k) {
    const std::uint64_t s = binomial(rng_, k, table_->conditional_one(i, w));
    counter_.record(QueryClass::prefix, k);
    return s;
  }

  std::uint64_t marginal_prefix_sum(int i, const BitString& w, std::uint64_t k) {
    const std::uint64_t s = binomial(rng_, k, table_->conditional_one(i, w));
    counter_.record(QueryClass::marginal, k);
    return s;
  }

  std::uint64_t unconditional_bit_sum(int i, std::uint64_t k,
                                      QueryClass metered_as = QueryClass::unconditional) {
    const std::uint64_t s = binomial(rng_, k, table_->marginal_one(i));
    counter_.record(metered_as, k);
    return s;
  }

 private:
  struct Atoms {
    std::vector<std::uint64_t> index;
    std::vector<double> cumulative;

    std::uint64_t pick(double u) const {
      const double target = u * cumulative.back();
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
      // Every stored atom has positive mass, so overshoot falls on the last one.
      if (it == cumulative.end()) --it;
      return index[static_cast<std::size_t>(it - cumulative.begin())];
    }
  };

  void check_dimension(int n) const {
    if (n != dimension()) {
      throw OracleError(OracleErrorKind::dimension_mismatch,
                        "query over " + std::to_string(n) + " coordinates sent to an oracle over " +
                            std::to_string(dimension()));
    }
  }

  BitString sample_cylinder(const BitString& w) {
    const int free_bits = dimension() - w.size();
    const std::uint64_t lo = w.value() << free_bits;
    const std::uint64_t hi = lo + (std::uint64_t{1} << free_bits);
    if (!(table_->prefix_mass(w) > 0.0)) {
      throw OracleError(OracleErrorKind::zero_probability_condition,
                        "prefix " + w.to_string() + " has zero probability");
    }
    return BitString(table_->sample_range(lo, hi, uniform01(rng_)), dimension());
  }

  // Matching atoms and their running mass, cached per distinct query.
  const Atoms& subcube_atoms(const SubcubeQuery& q) {
    auto key = std::make_pair(q.mask, q.values & q.mask);
    auto found = cache_.find(key);
    if (found != cache_.end()) return found->second;
    Atoms atoms;
    const std::uint64_t free_mask = ~q.mask & ((std::uint64_t{1} << q.n) - 1);
    double running = 0.0;
    // Enumerate submasks of free_mask in increasing order.
    std::uint64_t sub = 0;
    while (true) {
      const std::uint64_t x = (q.values & q.mask) | sub;
      const double p = (*table_)[x];
      if (p > 0.0) {
        running += p;
        atoms.index.push_back(x);
        atoms.cumulative.push_back(running);
      }
      if (sub == free_mask) break;
      sub = (sub - free_mask) & free_mask;
    }
    return cache_.emplace(key, std::move(atoms)).first->second;
  }

  std::shared_ptr<const DistributionTable> table_;
  Rng rng_;
  QueryCounter counter_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, Atoms> cache_;
};

/// Prefix-only access to an oracle. Unconditional draws are served as the
/// empty-prefix query and metered as prefix queries.
template <class O>
class PrefixView {
 public:
  explicit PrefixView(O& oracle) : o_(&oracle) {}

  int dimension() const { return o_->dimension(); }
  QueryCounts counts() const { return o_->counts(); }
  O& underlying() const { return *o_; }

  BitString prefix_sample(const PrefixQuery& q) { return o_->prefix_sample(q); }

  double prefix_bit_law(int i, const BitString& w) const
    requires ExactPrefixAccess<O>
  {
    return o_->prefix_bit_law(i, w);
  }
  double unconditional_bit_law(int i) const
    requires ExactPrefixAccess<O>
  {
    return o_->unconditional_bit_law(i);
  }
  void charge_prefix(std::uint64_t k)
    requires ExactPrefixAccess<O>
  {
    o_->charge_prefix(k);
  }

  std::uint64_t prefix_bit_sum(int i, const BitString& w, std::uint64_t k)
    requires BatchedPrefixBits<O>
  {
    return o_->prefix_bit_sum(i, w, k);
  }

  // Bit i summed over k empty-prefix queries.
  std::uint64_t unconditional_bit_sum(int i, std::uint64_t k)
    requires requires(O& o) { o.unconditional_bit_sum(i, k, QueryClass::prefix); }
  {
    return o_->unconditional_bit_sum(i, k, QueryClass::prefix);
  }

 private:
  O* o_;
};

/// Marginal-prefix-only access to an oracle.
template <class O>
class MarginalPrefixView {
 public:
  explicit MarginalPrefixView(O& oracle) : o_(&oracle) {}

  int dimension() const { return o_->dimension(); }
  QueryCounts counts() const { return o_->counts(); }

  int marginal_prefix_sample(int i, const BitString& w) { return o_->marginal_prefix_sample(i, w); }

  double marginal_bit_law(int i, const BitString& w) const
    requires ExactMarginalPrefixAccess<O>
  {
    return o_->marginal_bit_law(i, w);
  }
  void charge_marginal(std::uint64_t k)
    requires ExactMarginalPrefixAccess<O>
  {
    o_->charge_marginal(k);
  }

  std::uint64_t marginal_prefix_sum(int i, const BitString& w, std::uint64_t k)
    requires BatchedMarginalBits<O>
  {
    return o_->marginal_prefix_sum(i, w, k);
  }

 private:
  O* o_;
};

}  // namespace subcube
