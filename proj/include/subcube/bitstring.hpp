#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "subcube/error.hpp"

namespace subcube {

inline constexpr int kMaxBits = 63;

/// A fixed-length string over {0,1}. Coordinates are 1-based and coordinate 1
/// is the most significant bit of value(), so value() is the lexicographic
/// index of the string (and equals unbin of it).
class BitString {
 public:
  BitString() = default;

  BitString(std::uint64_t value, int length) : value_(value), length_(length) {
    if (length < 0 || length > kMaxBits) {
      throw std::invalid_argument("BitString length out of range: " + std::to_string(length));
    }
    if (length < 64 && (value >> length) != 0) {
      throw std::invalid_argument("BitString value does not fit in " + std::to_string(length) +
                                  " bits");
    }
  }

  static BitString parse(std::string_view text) {
    std::uint64_t v = 0;
    for (char c : text) {
      if (c != '0' && c != '1') {
        throw std::invalid_argument("BitString: unexpected character '" + std::string(1, c) + "'");
      }
      v = (v << 1) | static_cast<std::uint64_t>(c - '0');
    }
    return BitString(v, static_cast<int>(text.size()));
  }

  int size() const noexcept { return length_; }
  bool empty() const noexcept { return length_ == 0; }
  std::uint64_t value() const noexcept { return value_; }

  friend bool operator==(const BitString&, const BitString&) = default;

  int bit(int i) const {
    if (i < 1 || i > length_) {
      throw std::out_of_range("BitString::bit index " + std::to_string(i));
    }
    return static_cast<int>((value_ >> (length_ - i)) & 1u);
  }

  // First k coordinates, x_[k].
  BitString prefix(int k) const {
    if (k < 0 || k > length_) {
      throw std::out_of_range("BitString::prefix length " + std::to_string(k));
    }
    return BitString(k == 0 ? 0 : value_ >> (length_ - k), k);
  }

  BitString append(int b) const { return BitString((value_ << 1) | (b ? 1u : 0u), length_ + 1); }

  BitString concat(const BitString& tail) const {
    return BitString((length_ + tail.length_ == 0) ? 0 : (value_ << tail.length_) | tail.value_,
                     length_ + tail.length_);
  }

  std::string to_string() const {
    std::string s(static_cast<std::size_t>(length_), '0');
    for (int i = 1; i <= length_; ++i) s[static_cast<std::size_t>(i - 1)] = bit(i) ? '1' : '0';
    return s;
  }

  friend auto operator<=>(const BitString&, const BitString&) = default;

 private:
  std::uint64_t value_ = 0;
  int length_ = 0;
};

// MSB-first integer <-> bit string maps used by the interval reduction.
inline std::uint64_t unbin(const BitString& bits) { return bits.value(); }

inline BitString bin(int ell, std::uint64_t value) {
  if (ell < 0 || ell > kMaxBits || (ell < 64 && (value >> ell) != 0)) {
    throw std::out_of_range("bin: value " + std::to_string(value) + " needs more than " +
                            std::to_string(ell) + " bits");
  }
  return BitString(value, ell);
}

/// Closed interval [first, last] of the 1-based domain {1, ..., 2^ell} whose
/// elements t have bin_ell(t-1) starting with w, where |w| = i-1.
struct Interval {
  std::uint64_t first = 1;
  std::uint64_t last = 1;

  std::uint64_t length() const noexcept { return last - first + 1; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval prefix_to_interval(int ell, int i, const BitString& w) {
  if (ell < 0 || ell > kMaxBits - 1 || i < 1 || i > ell + 1 || w.size() != i - 1) {
    throw OracleError(OracleErrorKind::malformed_query,
                      "prefix_to_interval: need |w| = i-1 <= ell (ell=" + std::to_string(ell) +
                          ", i=" + std::to_string(i) + ", |w|=" + std::to_string(w.size()) + ")");
  }
  const std::uint64_t width = std::uint64_t{1} << (ell - i + 1);
  return Interval{width * unbin(w) + 1, width * (unbin(w) + 1)};
}

}  // namespace subcube
