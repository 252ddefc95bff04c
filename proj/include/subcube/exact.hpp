#pragma once

// Exact (enumeration-based) divergences over dense tables. These are the
// ground truth every tester and oracle is checked against.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "subcube/conditional_tree.hpp"
#include "subcube/distribution.hpp"
#include "subcube/divergence.hpp"

namespace subcube {

namespace detail {

inline void require_same_dimension(const DistributionTable& a, const DistributionTable& b) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                                std::to_string(b.dimension()));
  }
}

}  // namespace detail

inline double tv_distance(const DistributionTable& p, const DistributionTable& q) {
  detail::require_same_dimension(p, q);
  double sum = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) sum += std::fabs(p[x] - q[x]);
  return 0.5 * sum;
}

/// Base-2 KL divergence; +inf when supp(p) is not contained in supp(q).
inline double kl_divergence(const DistributionTable& p, const DistributionTable& q) {
  detail::require_same_dimension(p, q);
  double sum = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0.0) continue;
    if (q[x] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += p[x] * std::log2(p[x] / q[x]);
  }
  return sum < 0.0 ? 0.0 : sum;
}

/// Pr[x_i = 1 | x_[i-1] = w], extended to zero-mass prefixes w by
/// conditioning on the longest prefix of w that still has positive mass.
inline double extended_conditional(const DistributionTable& table, int i, const BitString& w) {
  if (table.prefix_mass(w) > 0.0) return table.conditional_one(i, w);
  int k = w.size() - 1;
  while (k > 0 && table.prefix_mass(w.prefix(k)) <= 0.0) --k;
  const BitString root = w.prefix(k);
  const int free_bits = i - 1 - k;
  double one = 0.0;
  for (std::uint64_t u = 0; u < (std::uint64_t{1} << free_bits); ++u) {
    one += table.prefix_mass(root.concat(BitString(u, free_bits)).append(1));
  }
  return one / table.prefix_mass(root);
}

/// Slice-wise divergence: sum over slices i of E_{w ~ t}[d(t_i|w, m_i|w)],
/// where x|w denotes the conditional probability of a 1 at slice i.
inline double slicewise_divergence(DivergenceKind kind, const DistributionTable& t,
                                   const DistributionTable& m) {
  detail::require_same_dimension(t, m);
  const int n = t.dimension();
  double total = 0.0;
  for (int i = 1; i <= n; ++i) {
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << (i - 1)); ++v) {
      const BitString w(v, i - 1);
      const double weight = t.prefix_mass(w);
      if (weight <= 0.0) continue;
      const double tc = t.conditional_one(i, w);
      double mc;
      if (m.prefix_mass(w) > 0.0) {
        mc = m.conditional_one(i, w);
      } else if (kind == DivergenceKind::kl) {
        return std::numeric_limits<double>::infinity();
      } else {
        mc = extended_conditional(m, i, w);
      }
      total += weight * single_bit_divergence(kind, tc, mc);
    }
  }
  return total;
}

inline DistributionTable product_of_marginals(const DistributionTable& m) {
  std::vector<double> p_one(static_cast<std::size_t>(m.dimension()));
  for (int i = 1; i <= m.dimension(); ++i) p_one[static_cast<std::size_t>(i - 1)] = m.marginal_one(i);
  return DistributionTable::product(p_one);
}

/// Rebuilds m with each conditional pulled away from 0 and 1: a conditional
/// below `threshold` becomes min(threshold, t's conditional), one above
/// 1 - threshold becomes 1 - min(threshold, t's conditional of a 0), and the
/// rest are kept. Each slice moves by at most `threshold` in TV.
inline DistributionTable clamp_distribution(const DistributionTable& m, const DistributionTable& t,
                                            double threshold) {
  detail::require_same_dimension(m, t);
  if (!(threshold > 0.0 && threshold <= 0.5)) {
    throw std::invalid_argument("clamp_distribution: threshold must lie in (0, 1/2]");
  }
  const int n = m.dimension();
  ConditionalTree tree(n);
  for (int i = 1; i <= n; ++i) {
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << (i - 1)); ++v) {
      const BitString w(v, i - 1);
      const double mc = extended_conditional(m, i, w);
      const double tc = extended_conditional(t, i, w);
      double p = mc;
      if (mc < threshold) {
        p = std::min(threshold, tc);
      } else if (mc > 1.0 - threshold) {
        p = 1.0 - std::min(threshold, 1.0 - tc);
      }
      tree.set(i, w, p);
    }
  }
  return tree.to_table();
}

}  // namespace subcube
