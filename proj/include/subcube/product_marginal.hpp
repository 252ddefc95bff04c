#pragma once

#include <cstdint>

#include "subcube/encoding.hpp"
#include "subcube/oracle.hpp"

namespace subcube {

/// Marginal-prefix access to the product of marginals of a binary
/// distribution. Each query costs one unconditional sample from the source
/// (an empty-prefix query when the source is prefix-only), of which bit i is
/// kept; the prefix w is irrelevant because the coordinates of a product are
/// independent.
template <class Source>
  requires PrefixAccess<Source> || UnconditionalAccess<Source>
class ProductMarginalOracle {
 public:
  explicit ProductMarginalOracle(Source& source) : src_(&source) {}

  int dimension() const { return src_->dimension(); }
  // Marginal queries served by this oracle (the source meters its own side).
  const QueryCounts& counts() const noexcept { return counter_.counts(); }
  QueryCounts source_counts() const { return src_->counts(); }

  int marginal_prefix_sample(int i, const BitString& w) {
    check_slice(i, w);
    const int b = draw_one().bit(i);
    counter_.record(QueryClass::marginal);
    return b;
  }

  double marginal_bit_law(int i, const BitString& w) const
    requires ExactPrefixAccess<Source> || ExactUnconditionalAccess<Source>
  {
    check_slice(i, w);
    return src_->unconditional_bit_law(i);
  }

  void charge_marginal(std::uint64_t k)
    requires ExactPrefixAccess<Source> || ExactUnconditionalAccess<Source>
  {
    if constexpr (PrefixAccess<Source>) {
      src_->charge_prefix(k);
    } else {
      src_->charge_unconditional(k);
    }
    counter_.record(QueryClass::marginal, k);
  }

  std::uint64_t marginal_prefix_sum(int i, const BitString& w, std::uint64_t k)
    requires BatchedUnconditionalBits<Source>
  {
    check_slice(i, w);
    const std::uint64_t s = src_->unconditional_bit_sum(i, k);
    counter_.record(QueryClass::marginal, k);
    return s;
  }

 private:
  BitString draw_one() {
    if constexpr (PrefixAccess<Source>) {
      return src_->prefix_sample(PrefixQuery{1, BitString(), 0b11});
    } else {
      return src_->draw_unconditional();
    }
  }

  void check_slice(int i, const BitString& w) const {
    if (i < 1 || i > dimension() || w.size() != i - 1) {
      throw OracleError(OracleErrorKind::malformed_query, "slice invalid for the product-of-marginals oracle");
    }
  }

  Source* src_;
  QueryCounter counter_;
};

/// Marginal-prefix access to the binary form of the product of marginals of
/// a tuple distribution. Binary position i lies inside the code of some
/// coordinate j; the bits of w inside that code restrict x_j to a set A_j, and
/// one subcube query (A_j at j, unconstrained elsewhere) serves the bit.
class TupleProductMarginalOracle {
 public:
  explicit TupleProductMarginalOracle(TupleOracle& source) : src_(&source) {}

  int dimension() const { return src_->domain().total_bits(); }
  const QueryCounts& counts() const noexcept { return counter_.counts(); }

  int marginal_prefix_sample(int i, const BitString& w) {
    auto [q, j] = slice_query(i, w);
    const Tuple x = src_->subcube_sample(q);
    counter_.record(QueryClass::marginal);
    return detail::code_bit(x[j - 1], src_->domain().bit_width(j), i - src_->domain().bit_offset(j));
  }

  double marginal_bit_law(int i, const BitString& w) const {
    auto [q, j] = slice_query(i, w);
    const double total = src_->subcube_mass(q);
    if (!(total > 0.0)) {
      throw OracleError(OracleErrorKind::zero_probability_condition, "prefix " + w.to_string() + " has zero probability");
    }
    const int width = src_->domain().bit_width(j);
    const int r = i - src_->domain().bit_offset(j);
    SymbolSet ones(q.allowed[j - 1].alphabet());
    for (std::size_t s = 0; s < ones.alphabet(); ++s)
      if (q.allowed[j - 1].contains(s) && detail::code_bit(s, width, r) == 1) ones.insert(s);
    if (ones.empty()) return 0.0;
    q.allowed[j - 1] = ones;
    return src_->subcube_mass(q) / total;
  }

  void charge_marginal(std::uint64_t k) {
    src_->charge_subcube(k);
    counter_.record(QueryClass::marginal, k);
  }

 private:
  std::pair<TupleSubcubeQuery, std::size_t> slice_query(int i, const BitString& w) const {
    const TupleDomain& dom = src_->domain();
    if (i < 1 || i > dimension() || w.size() != i - 1) {
      throw OracleError(OracleErrorKind::malformed_query, "slice invalid for the encoding");
    }
    const std::size_t j = symbol_of_bit(dom, i);
    const auto sets = preimage_sets(dom, cylinder_query(dimension(), w));
    for (const auto& s : sets) {
      if (s.empty()) {
        throw OracleError(OracleErrorKind::zero_probability_condition, "prefix contains an unused symbol code");
      }
    }
    TupleSubcubeQuery q = TupleSubcubeQuery::free(dom);
    q.allowed[j - 1] = sets[j - 1];
    return {q, j};
  }

  TupleOracle* src_;
  QueryCounter counter_;
};

}  // namespace subcube
