#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "subcube/divergence.hpp"
#include "subcube/harness/csv.hpp"

namespace subcube::harness {

// Slack at or above -kSlackTolerance counts as satisfied; only rounding of
// equal terms can produce negative values of that size.
inline constexpr double kSlackTolerance = 1e-12;

namespace detail {

inline std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto count = static_cast<long>(std::llround((hi - lo) / step));
  for (long k = 0; k <= count; ++k) g.push_back(std::min(hi, lo + static_cast<double>(k) * step));
  return g;
}

struct SlackTally {
  InequalityRow row;
  explicit SlackTally(std::string name) {
    row.check = std::move(name);
    row.min_slack = std::numeric_limits<double>::infinity();
  }
  void add(double slack) {
    ++row.points;
    row.min_slack = std::min(row.min_slack, slack);
    if (slack < -kSlackTolerance) ++row.violations;
  }
};

}  // namespace detail

/// chi2(p, q) >= kl(p, q) / (12 log2 max{1/q, 1/(1-q)}) for p on
/// {0, step, ..., 1} and q on {step, ..., 1 - step}.
inline InequalityRow check_chi2_vs_kl(double step = 0.01) {
  detail::SlackTally t("chi2-vs-kl");
  for (double p : detail::grid(0.0, 1.0, step)) {
    for (double q : detail::grid(step, 1.0 - step, step)) {
      const double bound = kl(p, q) / (12.0 * std::log2(std::max(1.0 / q, 1.0 / (1.0 - q))));
      t.add(chi2(p, q) - bound);
    }
  }
  return t.row;
}

/// chi2(p, q) = chi2(q, p) = chi2(1-p, 1-q); slack is minus the largest gap.
inline InequalityRow check_chi2_symmetry(double step = 0.01) {
  detail::SlackTally t("chi2-symmetry");
  for (double p : detail::grid(0.0, 1.0, step)) {
    for (double q : detail::grid(0.0, 1.0, step)) {
      const double a = chi2(p, q);
      t.add(-std::max(std::fabs(a - chi2(q, p)), std::fabs(a - chi2(1.0 - p, 1.0 - q))));
    }
  }
  return t.row;
}

/// d(p, q) <= d(p', q') whenever p' <= p <= q <= q'.
inline InequalityRow check_monotonicity(DivergenceKind kind, double step = 0.05) {
  detail::SlackTally t(std::string("monotonicity-") + std::string(to_string(kind)));
  const auto g = detail::grid(0.0, 1.0, step);
  const std::size_t m = g.size();
  for (std::size_t a = 0; a < m; ++a)          // p'
    for (std::size_t b = a; b < m; ++b)        // p
      for (std::size_t c = b; c < m; ++c)      // q
        for (std::size_t d = c; d < m; ++d) {  // q'
          const double inner = single_bit_divergence(kind, g[b], g[c]);
          const double outer = single_bit_divergence(kind, g[a], g[d]);
          if (std::isinf(inner) && std::isinf(outer)) {
            t.add(0.0);
          } else {
            t.add(outer - inner);
          }
        }
  return t.row;
}

inline std::vector<PlotRow> inequality_suite(double step = 0.01) {
  return {check_chi2_vs_kl(step), check_chi2_symmetry(step), check_monotonicity(DivergenceKind::tv),
          check_monotonicity(DivergenceKind::kl), check_monotonicity(DivergenceKind::chi2)};
}

}  // namespace subcube::harness
