#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "subcube/bitstring.hpp"
#include "subcube/error.hpp"

namespace subcube {

enum class QueryClass { unconditional, prefix, subcube, marginal, interval };

inline constexpr std::array<QueryClass, 5> kQueryClasses = {
    QueryClass::unconditional, QueryClass::prefix, QueryClass::subcube, QueryClass::marginal,
    QueryClass::interval};

inline std::string_view to_string(QueryClass c) {
  switch (c) {
    case QueryClass::unconditional:
      return "unconditional";
    case QueryClass::prefix:
      return "prefix";
    case QueryClass::subcube:
      return "subcube";
    case QueryClass::marginal:
      return "marginal";
    case QueryClass::interval:
      return "interval";
  }
  return "?";
}

struct QueryCounts {
  std::array<std::uint64_t, kQueryClasses.size()> by_class{};

  std::uint64_t operator[](QueryClass c) const { return by_class[static_cast<std::size_t>(c)]; }
  std::uint64_t& operator[](QueryClass c) { return by_class[static_cast<std::size_t>(c)]; }

  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (auto v : by_class) sum += v;
    return sum;
  }

  QueryCounts& operator+=(const QueryCounts& o) {
    for (std::size_t k = 0; k < by_class.size(); ++k) by_class[k] += o.by_class[k];
    return *this;
  }
  friend QueryCounts operator+(QueryCounts a, const QueryCounts& b) { return a += b; }
  friend QueryCounts operator-(QueryCounts a, const QueryCounts& b) {
    for (std::size_t k = 0; k < a.by_class.size(); ++k) a.by_class[k] -= b.by_class[k];
    return a;
  }
  friend bool operator==(const QueryCounts&, const QueryCounts&) = default;
};

// Monotone per-class meter of samples served.
class QueryCounter {
 public:
  void record(QueryClass c, std::uint64_t count = 1) { counts_[c] += count; }
  const QueryCounts& counts() const noexcept { return counts_; }
  std::uint64_t total() const { return counts_.total(); }

 private:
  QueryCounts counts_;
};

/// Binary subcube condition: coordinate i is fixed to bit i of `values`
/// whenever bit i of `mask` is set (MSB = coordinate 1), and free otherwise.
struct SubcubeQuery {
  int n = 0;
  std::uint64_t mask = 0;
  std::uint64_t values = 0;

  static SubcubeQuery free(int n) { return SubcubeQuery{n, 0, 0}; }

  // "0*1" style: '0'/'1' fix a coordinate, '*' leaves it free.
  static SubcubeQuery parse(std::string_view pattern) {
    SubcubeQuery q{static_cast<int>(pattern.size()), 0, 0};
    if (q.n > kMaxBits) throw OracleError(OracleErrorKind::malformed_query, "pattern too long");
    for (char c : pattern) {
      q.mask <<= 1;
      q.values <<= 1;
      if (c == '0' || c == '1') {
        q.mask |= 1;
        q.values |= static_cast<std::uint64_t>(c - '0');
      } else if (c != '*') {
        throw OracleError(OracleErrorKind::malformed_query,
                          "subcube pattern character '" + std::string(1, c) + "'");
      }
    }
    return q;
  }

  SubcubeQuery& fix(int i, int b) {
    const std::uint64_t bitpos = std::uint64_t{1} << (n - i);
    mask |= bitpos;
    values = b ? (values | bitpos) : (values & ~bitpos);
    return *this;
  }

  bool is_fixed(int i) const { return (mask >> (n - i)) & 1u; }
  int fixed_value(int i) const { return static_cast<int>((values >> (n - i)) & 1u); }
  bool matches(const BitString& x) const { return (x.value() & mask) == (values & mask); }

  // Fixed coordinates form an initial segment.
  bool is_prefix() const {
    int i = 1;
    while (i <= n && is_fixed(i)) ++i;
    for (; i <= n; ++i)
      if (is_fixed(i)) return false;
    return true;
  }

  std::string to_string() const {
    std::string s;
    for (int i = 1; i <= n; ++i) s += is_fixed(i) ? static_cast<char>('0' + fixed_value(i)) : '*';
    return s;
  }
};

/// Binary prefix condition: x_[index-1] = fixed and x_index in `allowed`
/// (bit 0 of `allowed` admits a 0, bit 1 admits a 1).
struct PrefixQuery {
  int index = 1;
  BitString fixed;
  std::uint8_t allowed = 0b11;

  // Cylinder of all strings starting with w in {0,1}^n (|w| <= n).
  static PrefixQuery cylinder(int n, const BitString& w) {
    if (w.size() > n || n < 1) {
      throw OracleError(OracleErrorKind::malformed_query, "prefix longer than dimension");
    }
    if (w.size() < n) return PrefixQuery{w.size() + 1, w, 0b11};
    return PrefixQuery{n, w.prefix(n - 1), static_cast<std::uint8_t>(1u << w.bit(n))};
  }

  bool constrains_index() const { return allowed != 0b11; }

  // The fixed prefix including the break-off coordinate when it is pinned.
  BitString pinned() const {
    return constrains_index() ? fixed.append(allowed == 0b10 ? 1 : 0) : fixed;
  }

  void validate(int n) const {
    if (index < 1 || index > n || fixed.size() != index - 1 || allowed == 0 || allowed > 0b11) {
      throw OracleError(OracleErrorKind::malformed_query,
                        "prefix query (index=" + std::to_string(index) + ", |fixed|=" +
                            std::to_string(fixed.size()) + ") invalid for n=" + std::to_string(n));
    }
  }
};

}  // namespace subcube
