#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "subcube/bitstring.hpp"
#include "subcube/error.hpp"
#include "subcube/query.hpp"
#include "subcube/rng.hpp"
#include "subcube/tuple.hpp"

namespace subcube {

/// Subcube condition over a TupleDomain: x_j must lie in allowed[j-1].
struct TupleSubcubeQuery {
  std::vector<SymbolSet> allowed;

  static TupleSubcubeQuery free(const TupleDomain& dom) {
    TupleSubcubeQuery q;
    for (std::size_t j = 1; j <= dom.arity(); ++j) q.allowed.push_back(SymbolSet::full(dom.alphabet_size(j)));
    return q;
  }
};

/// Prefix condition over a TupleDomain: x_1..x_{index-1} = fixed and
/// x_index in condition.
struct TuplePrefixQuery {
  std::size_t index = 1;
  Tuple fixed;
  SymbolSet condition;

  void validate(const TupleDomain& dom) const {
    if (index < 1 || index > dom.arity() || fixed.size() != index - 1 ||
        condition.alphabet() != dom.alphabet_size(index) || condition.empty()) {
      throw OracleError(OracleErrorKind::malformed_query, "tuple prefix query does not fit the domain");
    }
    for (std::size_t j = 0; j < fixed.size(); ++j) {
      if (fixed[j] >= dom.sizes()[j]) throw OracleError(OracleErrorKind::malformed_query, "symbol out of range");
    }
  }
};

/// Unconditional, subcube, prefix and marginal-prefix access over a tuple
/// distribution, with its own RNG stream and meter.
class TupleOracle {
 public:
  TupleOracle(std::shared_ptr<const TupleDistribution> dist, std::uint64_t seed)
      : dist_(std::move(dist)), rng_(seed) {}
  TupleOracle(TupleDistribution dist, std::uint64_t seed)
      : TupleOracle(std::make_shared<const TupleDistribution>(std::move(dist)), seed) {}

  const TupleDomain& domain() const noexcept { return dist_->domain(); }
  const TupleDistribution& distribution() const noexcept { return *dist_; }
  const QueryCounts& counts() const noexcept { return counter_.counts(); }

  Tuple draw_unconditional() {
    const std::pair<std::size_t, std::size_t> all{0, dist_->probs().size()};
    Tuple x = domain().tuple_of(dist_->sample_ranges(std::span(&all, 1), uniform01(rng_)));
    counter_.record(QueryClass::unconditional);
    return x;
  }

  Tuple subcube_sample(const TupleSubcubeQuery& q) {
    const auto& ranges = subcube_ranges(q);
    Tuple x = domain().tuple_of(dist_->sample_ranges(ranges, uniform01(rng_)));
    counter_.record(QueryClass::subcube);
    return x;
  }

  Tuple prefix_sample(const TuplePrefixQuery& q) {
    const auto ranges = prefix_ranges(q);
    Tuple x = domain().tuple_of(dist_->sample_ranges(ranges, uniform01(rng_)));
    counter_.record(QueryClass::prefix);
    return x;
  }

  // Coordinate q.index of a prefix-conditioned sample.
  std::size_t marginal_prefix_sample(const TuplePrefixQuery& q) {
    const auto ranges = prefix_ranges(q);
    const Tuple x = domain().tuple_of(dist_->sample_ranges(ranges, uniform01(rng_)));
    counter_.record(QueryClass::marginal);
    return x[q.index - 1];
  }

  double prefix_mass(const TuplePrefixQuery& q) const {
    double m = 0.0;
    for (auto [lo, hi] : prefix_ranges(q)) m += dist_->range_mass(lo, hi);
    return m;
  }

  double subcube_mass(const TupleSubcubeQuery& q) const {
    double m = 0.0;
    for (auto [lo, hi] : build_subcube_ranges(q)) m += dist_->range_mass(lo, hi);
    return m;
  }

  void charge_unconditional(std::uint64_t k) { counter_.record(QueryClass::unconditional, k); }
  void charge_prefix(std::uint64_t k) { counter_.record(QueryClass::prefix, k); }
  void charge_marginal(std::uint64_t k) { counter_.record(QueryClass::marginal, k); }
  void charge_subcube(std::uint64_t k) { counter_.record(QueryClass::subcube, k); }

 private:
  using Ranges = std::vector<std::pair<std::size_t, std::size_t>>;

  static void push_merged(Ranges& out, std::size_t lo, std::size_t hi) {
    if (!out.empty() && out.back().second == lo) {
      out.back().second = hi;
    } else {
      out.emplace_back(lo, hi);
    }
  }

  Ranges prefix_ranges(const TuplePrefixQuery& q) const {
    q.validate(domain());
    Ranges out;
    Tuple a = q.fixed;
    a.push_back(0);
    for (std::size_t s = 0; s < q.condition.alphabet(); ++s) {
      if (!q.condition.contains(s)) continue;
      a.back() = s;
      const auto [lo, hi] = dist_->block_range(a);
      push_merged(out, lo, hi);
    }
    return out;
  }

  Ranges build_subcube_ranges(const TupleSubcubeQuery& q) const {
    const TupleDomain& dom = domain();
    if (q.allowed.size() != dom.arity()) {
      throw OracleError(OracleErrorKind::dimension_mismatch, "subcube arity does not match the domain");
    }
    std::size_t depth = 0;  // coordinates after `depth` are unconstrained
    for (std::size_t j = 0; j < q.allowed.size(); ++j) {
      if (q.allowed[j].alphabet() != dom.sizes()[j] || q.allowed[j].empty()) {
        throw OracleError(OracleErrorKind::malformed_query, "subcube condition must be a nonempty subset");
      }
      if (!q.allowed[j].is_full()) depth = j + 1;
    }
    Ranges out;
    Tuple a(depth, 0);
    // Odometer over the allowed symbols of coordinates 1..depth.
    auto first_allowed = [&](std::size_t j, std::size_t from) {
      while (from < dom.sizes()[j] && !q.allowed[j].contains(from)) ++from;
      return from;
    };
    for (std::size_t j = 0; j < depth; ++j) a[j] = first_allowed(j, 0);
    while (true) {
      const auto [lo, hi] = dist_->block_range(a);
      push_merged(out, lo, hi);
      std::size_t j = depth;
      while (j > 0) {
        --j;
        a[j] = first_allowed(j, a[j] + 1);
        if (a[j] < dom.sizes()[j]) break;
        a[j] = first_allowed(j, 0);
        if (j == 0) return out;
      }
      if (depth == 0) return out;
    }
  }

  const Ranges& subcube_ranges(const TupleSubcubeQuery& q) {
    std::string key;
    for (const auto& set : q.allowed) {
      for (std::size_t s = 0; s < set.alphabet(); ++s) key += set.contains(s) ? '1' : '0';
      key += '|';
    }
    auto found = cache_.find(key);
    if (found != cache_.end()) return found->second;
    return cache_.emplace(std::move(key), build_subcube_ranges(q)).first->second;
  }

  std::shared_ptr<const TupleDistribution> dist_;
  Rng rng_;
  QueryCounter counter_;
  std::map<std::string, Ranges> cache_;
};

// ---- binary form --------------------------------------------------------

/// f(x): concatenation of bin(symbol index) over the coordinates, each in
/// its bit width.
inline BitString encode_tuple(const TupleDomain& dom, const Tuple& x) {
  dom.check(x);
  std::uint64_t v = 0;
  for (std::size_t j = 1; j <= dom.arity(); ++j) v = (v << dom.bit_width(j)) | x[j - 1];
  return BitString(v, dom.total_bits());
}

/// Inverse of encode_tuple; nullopt when some block is not a symbol code.
inline std::optional<Tuple> decode_bits(const TupleDomain& dom, const BitString& bits) {
  if (bits.size() != dom.total_bits()) return std::nullopt;
  Tuple x(dom.arity());
  for (std::size_t j = 1; j <= dom.arity(); ++j) {
    const int width = dom.bit_width(j);
    const int shift = dom.total_bits() - dom.bit_offset(j) - width;
    const std::uint64_t code = width == 0 ? 0 : (bits.value() >> shift) & ((std::uint64_t{1} << width) - 1);
    if (code >= dom.alphabet_size(j)) return std::nullopt;
    x[j - 1] = code;
  }
  return x;
}

namespace detail {

// Code bit r (1-based, MSB first) of symbol s in a block of `width` bits.
inline int code_bit(std::size_t s, int width, int r) { return static_cast<int>((s >> (width - r)) & 1u); }

}  // namespace detail

/// Coordinate holding binary position i (1-based) of the encoding.
inline std::size_t symbol_of_bit(const TupleDomain& dom, int i) {
  for (std::size_t j = 1; j <= dom.arity(); ++j) {
    if (i <= dom.bit_offset(j) + dom.bit_width(j)) {
      if (dom.bit_width(j) > 0) return j;
    }
  }
  throw OracleError(OracleErrorKind::malformed_query, "bit position outside the encoding");
}

/// Preimage sets A_j = {g_j(s) : s matches q} of a binary subcube condition.
/// Some A_j may be empty, in which case the condition has zero probability.
inline std::vector<SymbolSet> preimage_sets(const TupleDomain& dom, const SubcubeQuery& q) {
  if (q.n != dom.total_bits()) {
    throw OracleError(OracleErrorKind::dimension_mismatch, "binary query width does not match the encoding");
  }
  std::vector<SymbolSet> sets;
  for (std::size_t j = 1; j <= dom.arity(); ++j) {
    const int width = dom.bit_width(j);
    const int offset = dom.bit_offset(j);
    SymbolSet a(dom.alphabet_size(j));
    for (std::size_t s = 0; s < dom.alphabet_size(j); ++s) {
      bool ok = true;
      for (int r = 1; r <= width && ok; ++r) {
        const int i = offset + r;
        if (q.is_fixed(i) && q.fixed_value(i) != detail::code_bit(s, width, r)) ok = false;
      }
      if (ok) a.insert(s);
    }
    sets.push_back(std::move(a));
  }
  return sets;
}

inline SubcubeQuery cylinder_query(int n, const BitString& w) {
  SubcubeQuery q = SubcubeQuery::free(n);
  for (int k = 1; k <= w.size(); ++k) q.fix(k, w.bit(k));
  return q;
}

/// Reads preimage sets as a tuple prefix query with break-off `index`.
/// Throws logic_error if the sets are not prefix-shaped there, and
/// ZeroProbabilityCondition if some set is empty.
inline TuplePrefixQuery as_prefix_query(const TupleDomain& dom, const std::vector<SymbolSet>& sets,
                                        std::size_t index) {
  for (const auto& s : sets) {
    if (s.empty()) {
      throw OracleError(OracleErrorKind::zero_probability_condition, "prefix contains an unused symbol code");
    }
  }
  TuplePrefixQuery out{index, {}, sets[index - 1]};
  for (std::size_t j = 1; j < index; ++j) {
    if (sets[j - 1].count() != 1) throw std::logic_error("binary prefix query translated to a non-prefix query");
    std::size_t s = 0;
    while (!sets[j - 1].contains(s)) ++s;
    out.fixed.push_back(s);
  }
  for (std::size_t j = index + 1; j <= dom.arity(); ++j) {
    if (!sets[j - 1].is_full()) throw std::logic_error("binary prefix query translated to a non-prefix query");
  }
  return out;
}

inline std::size_t last_constrained(const std::vector<SymbolSet>& sets) {
  std::size_t index = 1;
  for (std::size_t j = 1; j <= sets.size(); ++j)
    if (!sets[j - 1].is_full()) index = j;
  return index;
}

/// The binary form mu* of a tuple oracle over {0,1}^{sum of bit widths}.
/// Every binary query is answered with exactly one query of the same kind
/// to the tuple oracle.
class EncodedOracle {
 public:
  explicit EncodedOracle(TupleOracle& oracle) : o_(&oracle) {}

  int dimension() const { return o_->domain().total_bits(); }
  const QueryCounts& counts() const noexcept { return o_->counts(); }
  const TupleDomain& domain() const noexcept { return o_->domain(); }

  BitString draw_unconditional() { return encode_tuple(domain(), o_->draw_unconditional()); }

  BitString subcube_sample(const SubcubeQuery& q) {
    TupleSubcubeQuery tq{preimage_sets(domain(), q)};
    for (const auto& s : tq.allowed) {
      if (s.empty()) throw OracleError(OracleErrorKind::zero_probability_condition, "subcube has no preimage");
    }
    return encode_tuple(domain(), o_->subcube_sample(tq));
  }

  BitString prefix_sample(const PrefixQuery& q) {
    q.validate(dimension());
    const auto sets = preimage_sets(domain(), cylinder_query(dimension(), q.pinned()));
    return encode_tuple(domain(), o_->prefix_sample(as_prefix_query(domain(), sets, last_constrained(sets))));
  }

  int marginal_prefix_sample(int i, const BitString& w) {
    const auto [tq, j] = slice_query(i, w);
    const std::size_t s = o_->marginal_prefix_sample(tq);
    return detail::code_bit(s, domain().bit_width(j), i - domain().bit_offset(j));
  }

  double prefix_bit_law(int i, const BitString& w) const {
    auto [tq, j] = slice_query(i, w);
    const double total = o_->prefix_mass(tq);
    if (!(total > 0.0)) {
      throw OracleError(OracleErrorKind::zero_probability_condition, "prefix " + w.to_string() + " has zero probability");
    }
    tq.condition = with_bit_one(tq.condition, j, i);
    return tq.condition.empty() ? 0.0 : o_->prefix_mass(tq) / total;
  }
  double marginal_bit_law(int i, const BitString& w) const { return prefix_bit_law(i, w); }

  double unconditional_bit_law(int i) const {
    const std::size_t j = symbol_of_bit(domain(), i);
    TupleSubcubeQuery q = TupleSubcubeQuery::free(domain());
    q.allowed[j - 1] = with_bit_one(q.allowed[j - 1], j, i);
    return q.allowed[j - 1].empty() ? 0.0 : o_->subcube_mass(q);
  }

  void charge_unconditional(std::uint64_t k) { o_->charge_unconditional(k); }
  void charge_prefix(std::uint64_t k) { o_->charge_prefix(k); }
  void charge_marginal(std::uint64_t k) { o_->charge_marginal(k); }
  void charge_subcube(std::uint64_t k) { o_->charge_subcube(k); }

 private:
  // Tuple prefix query answering the slice (i, w) and the coordinate j that
  // holds bit i.
  std::pair<TuplePrefixQuery, std::size_t> slice_query(int i, const BitString& w) const {
    if (i < 1 || i > dimension() || w.size() != i - 1) {
      throw OracleError(OracleErrorKind::malformed_query, "slice invalid for the encoding");
    }
    const std::size_t j = symbol_of_bit(domain(), i);
    const auto sets = preimage_sets(domain(), cylinder_query(dimension(), w));
    return {as_prefix_query(domain(), sets, j), j};
  }

  SymbolSet with_bit_one(const SymbolSet& a, std::size_t j, int i) const {
    const int width = domain().bit_width(j);
    const int r = i - domain().bit_offset(j);
    SymbolSet out(a.alphabet());
    for (std::size_t s = 0; s < a.alphabet(); ++s)
      if (a.contains(s) && detail::code_bit(s, width, r) == 1) out.insert(s);
    return out;
  }

  TupleOracle* o_;
};

}  // namespace subcube
