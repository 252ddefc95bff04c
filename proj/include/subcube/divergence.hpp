#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace subcube {

enum class DivergenceKind { tv, kl, chi2 };

inline std::string_view to_string(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::tv:
      return "TV";
    case DivergenceKind::kl:
      return "KL";
    case DivergenceKind::chi2:
      return "CHI2";
  }
  return "?";
}

namespace detail {

// a * log2(a / b) with 0 log(0/b) = 0 and a log(a/0) = +inf.
inline double kl_term(double a, double b) {
  if (a <= 0.0) return 0.0;
  if (b <= 0.0) return std::numeric_limits<double>::infinity();
  return a * std::log2(a / b);
}

}  // namespace detail

/// Single-bit divergences between Ber(p) and Ber(q). The chi-square form is
/// the symmetric bounded variant (p-q)^2 / ((p+q)(2-(p+q))); it is 0 at
/// p = q = 0 and p = q = 1.
inline double single_bit_divergence(DivergenceKind kind, double p, double q) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("single_bit_divergence: probabilities must lie in [0,1]");
  }
  switch (kind) {
    case DivergenceKind::tv:
      return std::fabs(p - q);
    case DivergenceKind::kl: {
      const double v = detail::kl_term(p, q) + detail::kl_term(1.0 - p, 1.0 - q);
      return v < 0.0 ? 0.0 : v;
    }
    case DivergenceKind::chi2: {
      if (p == q) return 0.0;
      const double s = p + q;
      return (p - q) * (p - q) / (s * (2.0 - s));
    }
  }
  return 0.0;
}

inline double chi2(double p, double q) { return single_bit_divergence(DivergenceKind::chi2, p, q); }
inline double kl(double p, double q) { return single_bit_divergence(DivergenceKind::kl, p, q); }

}  // namespace subcube
