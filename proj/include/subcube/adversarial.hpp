#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "subcube/bitstring.hpp"
#include "subcube/distribution.hpp"
#include "subcube/exact.hpp"
#include "subcube/oracle.hpp"
#include "subcube/query.hpp"
#include "subcube/rng.hpp"

namespace subcube {

// Cell biases stay below 1/4 so every cell of nu_b and every conditional
// 1/2 +- 2 delta lies strictly inside (0, 1).
inline constexpr double kMaxPairBias = 0.25;

struct PairBias {
  int b = 0;
  double delta = 0.0;

  PairBias(int sign, double magnitude) : b(sign), delta(magnitude) {
    if (b < -1 || b > 1) throw std::invalid_argument("PairBias: b must be -1, 0 or +1");
    if (!(delta >= 0.0 && delta < kMaxPairBias)) {
      throw std::invalid_argument("PairBias: delta " + std::to_string(delta) + " outside [0, 1/4)");
    }
  }

  // nu_b(cell) for cell in {0b00, 0b01, 0b10, 0b11}.
  double cell(unsigned v) const {
    const double s = (v == 0b00 || v == 0b11) ? 1.0 : -1.0;
    return 0.25 + s * b * delta;
  }
};

/// nu_b over {0,1}^2: (1/4 + b delta, 1/4 - b delta, 1/4 - b delta, 1/4 + b delta).
inline DistributionTable nu_b_table(int b, double delta) {
  const PairBias pb(b, delta);
  return DistributionTable(2, {pb.cell(0), pb.cell(1), pb.cell(2), pb.cell(3)});
}

/// A member of the paired family: coordinates (2k-1, 2k) form pair k with
/// law nu_{b_k}; the pairs are independent and, for odd n, the last
/// coordinate is an independent uniform bit. All pairs share delta = eps/sqrt(n).
struct AdversarialInstance {
  int n = 0;
  double eps = 0.0;
  double delta = 0.0;
  std::vector<int> biases;  // one per pair, each +1 or -1

  static AdversarialInstance make(int n, double eps, std::vector<int> biases) {
    if (n < 1 || n > kMaxBits) throw std::invalid_argument("AdversarialInstance: n out of range");
    if (static_cast<int>(biases.size()) != n / 2) {
      throw std::invalid_argument("AdversarialInstance: need " + std::to_string(n / 2) + " pair biases");
    }
    for (int b : biases) {
      if (b != 1 && b != -1) throw std::invalid_argument("AdversarialInstance: biases must be +1 or -1");
    }
    AdversarialInstance inst{n, eps, eps / std::sqrt(static_cast<double>(n)), std::move(biases)};
    (void)PairBias(1, inst.delta);  // range check
    return inst;
  }

  int pairs() const noexcept { return n / 2; }
  PairBias pair(int k) const { return PairBias(biases.at(static_cast<std::size_t>(k - 1)), delta); }

  double prob(std::uint64_t x) const {
    double v = 1.0;
    for (int k = 1; k <= pairs(); ++k) v *= pair(k).cell(static_cast<unsigned>((x >> (n - 2 * k)) & 3u));
    if (n % 2 == 1) v *= 0.5;
    return v;
  }

  DistributionTable to_table() const {
    if (n > kMaxDenseBits) throw std::invalid_argument("AdversarialInstance: too large for a dense table");
    std::vector<double> probs(std::size_t{1} << n);
    for (std::uint64_t x = 0; x < probs.size(); ++x) probs[x] = prob(x);
    return DistributionTable(n, std::move(probs));
  }

  BitString sample(Rng& rng) const {
    std::uint64_t v = 0;
    for (int k = 1; k <= pairs(); ++k) {
      const PairBias pb = pair(k);
      const double u = uniform01(rng);
      unsigned cell = 3;
      double acc = 0.0;
      for (unsigned c = 0; c < 4; ++c) {
        acc += pb.cell(c);
        if (u < acc) {
          cell = c;
          break;
        }
      }
      v = (v << 2) | cell;
    }
    if (n % 2 == 1) v = (v << 1) | (bernoulli(rng, 0.5) ? 1u : 0u);
    return BitString(v, n);
  }

  /// Pr[x_i = 1 | x_[i-1] = w]: 1/2 at the first coordinate of a pair and
  /// at an unpaired last coordinate, 1/2 +- 2 b delta at the second.
  double conditional_one(int i, const BitString& w) const {
    if (i < 1 || i > n || w.size() != i - 1) {
      throw OracleError(OracleErrorKind::malformed_query, "slice invalid for the instance");
    }
    if (i % 2 == 1) return 0.5;
    const PairBias pb = pair(i / 2);
    const unsigned first = static_cast<unsigned>(w.bit(i - 1));
    return pb.cell((first << 1) | 1u) / 0.5;
  }
};

/// Draws b_k uniformly from {+1, -1} for each pair.
inline AdversarialInstance sample_no_instance(int n, double eps, Rng& rng) {
  std::vector<int> biases(static_cast<std::size_t>(n / 2));
  for (auto& b : biases) b = bernoulli(rng, 0.5) ? 1 : -1;
  return AdversarialInstance::make(n, eps, std::move(biases));
}

/// One q-conditioned sample of nu_b from one unconditional sample x of nu_b,
/// without knowledge of b. p = x_1 xor x_2.
///   q:      00..11  **   0*    1*     *0   *1
///   output: q       x    0p    1(~p)  p0   (~p)1
inline BitString simulate_pair_conditional(const SubcubeQuery& q, const BitString& x) {
  if (q.n != 2 || x.size() != 2) throw std::invalid_argument("simulate_pair_conditional: expects two bits");
  const bool f1 = q.is_fixed(1);
  const bool f2 = q.is_fixed(2);
  if (f1 && f2) return BitString(q.values & 3u, 2);
  if (!f1 && !f2) return x;
  const unsigned p = static_cast<unsigned>(x.bit(1) ^ x.bit(2));
  unsigned out1;
  unsigned out2;
  if (f1) {
    out1 = static_cast<unsigned>(q.fixed_value(1));
    out2 = out1 == 0 ? p : 1u ^ p;
  } else {
    out2 = static_cast<unsigned>(q.fixed_value(2));
    out1 = out2 == 0 ? p : 1u ^ p;
  }
  return BitString((out1 << 1) | out2, 2);
}

namespace detail {

inline BitString simulate_pairs(const SubcubeQuery& q, const BitString& x) {
  const int n = q.n;
  std::uint64_t v = 0;
  for (int k = 1; k <= n / 2; ++k) {
    SubcubeQuery pq = SubcubeQuery::free(2);
    if (q.is_fixed(2 * k - 1)) pq.fix(1, q.fixed_value(2 * k - 1));
    if (q.is_fixed(2 * k)) pq.fix(2, q.fixed_value(2 * k));
    const BitString px(static_cast<std::uint64_t>((x.value() >> (n - 2 * k)) & 3u), 2);
    v = (v << 2) | simulate_pair_conditional(pq, px).value();
  }
  if (n % 2 == 1) v = (v << 1) | static_cast<std::uint64_t>(q.is_fixed(n) ? q.fixed_value(n) : x.bit(n));
  return BitString(v, n);
}

}  // namespace detail

/// A q-conditioned sample of the instance from one unconditional sample:
/// the pair simulation is applied to every pair separately.
inline BitString subcube_query_via_unconditional(const SubcubeQuery& q, const AdversarialInstance& inst, Rng& rng) {
  if (q.n != inst.n) throw OracleError(OracleErrorKind::dimension_mismatch, "query width differs from instance");
  return detail::simulate_pairs(q, inst.sample(rng));
}

/// The same map applied to a given unconditional sample x.
inline BitString simulate_instance_conditional(const SubcubeQuery& q, const BitString& x) {
  if (q.n != x.size()) throw OracleError(OracleErrorKind::dimension_mismatch, "query width differs from sample");
  return detail::simulate_pairs(q, x);
}

/// Pairwise (x, y) -> (x xor y, y) pushforward. The map is an involution.
inline DistributionTable xor_transform(const DistributionTable& d) {
  const int n = d.dimension();
  if (n % 2 != 0) throw std::invalid_argument("xor_transform: dimension must be even");
  std::vector<double> out(d.size(), 0.0);
  for (std::uint64_t x = 0; x < d.size(); ++x) {
    std::uint64_t y = x;
    for (int k = 1; k <= n / 2; ++k) {
      const int shift = n - 2 * k;  // pair occupies bits shift+1 (first) and shift (second)
      const std::uint64_t second = (x >> shift) & 1u;
      y ^= second << (shift + 1);
    }
    out[y] += d[x];
  }
  return DistributionTable(n, std::move(out));
}

/// prod_i Ber(1/2 + b_i eps / sqrt(n)) for the given signs.
inline ProductSpec uniformity_lb_instance(int n, double eps, const std::vector<int>& biases) {
  if (n < 1 || static_cast<int>(biases.size()) != n) {
    throw std::invalid_argument("uniformity_lb_instance: need one sign per coordinate");
  }
  const double shift = eps / std::sqrt(static_cast<double>(n));
  if (!(shift >= 0.0 && shift < 0.5)) throw std::invalid_argument("uniformity_lb_instance: eps/sqrt(n) outside [0, 1/2)");
  ProductSpec spec;
  for (int b : biases) {
    if (b != 1 && b != -1) throw std::invalid_argument("uniformity_lb_instance: signs must be +1 or -1");
    spec.p_one.push_back(0.5 + b * shift);
  }
  return spec;
}

inline ProductSpec uniformity_lb_instance(int n, double eps, Rng& rng) {
  std::vector<int> biases(static_cast<std::size_t>(n));
  for (auto& b : biases) b = bernoulli(rng, 0.5) ? 1 : -1;
  return uniformity_lb_instance(n, eps, biases);
}

/// Oracle over an instance of any size. Subcube queries are answered by the
/// pair simulation from one unconditional sample.
class PairedInstanceOracle {
 public:
  PairedInstanceOracle(AdversarialInstance inst, std::uint64_t seed) : inst_(std::move(inst)), rng_(seed) {}

  int dimension() const noexcept { return inst_.n; }
  const AdversarialInstance& instance() const noexcept { return inst_; }
  const QueryCounts& counts() const noexcept { return counter_.counts(); }

  BitString draw_unconditional() {
    counter_.record(QueryClass::unconditional);
    return inst_.sample(rng_);
  }

  BitString subcube_sample(const SubcubeQuery& q) {
    if (q.n != inst_.n) throw OracleError(OracleErrorKind::dimension_mismatch, "query width differs from instance");
    counter_.record(QueryClass::subcube);
    return detail::simulate_pairs(q, inst_.sample(rng_));
  }

  BitString prefix_sample(const PrefixQuery& q) {
    q.validate(inst_.n);
    SubcubeQuery sq = SubcubeQuery::free(inst_.n);
    const BitString pinned = q.pinned();
    for (int k = 1; k <= pinned.size(); ++k) sq.fix(k, pinned.bit(k));
    counter_.record(QueryClass::prefix);
    return detail::simulate_pairs(sq, inst_.sample(rng_));
  }

  int marginal_prefix_sample(int i, const BitString& w) {
    const double p = inst_.conditional_one(i, w);
    counter_.record(QueryClass::marginal);
    return bernoulli(rng_, p) ? 1 : 0;
  }

  double prefix_bit_law(int i, const BitString& w) const { return inst_.conditional_one(i, w); }
  double marginal_bit_law(int i, const BitString& w) const { return inst_.conditional_one(i, w); }
  double unconditional_bit_law(int i) const {
    if (i < 1 || i > inst_.n) throw std::out_of_range("unconditional_bit_law: coordinate out of range");
    return 0.5;
  }

  void charge_unconditional(std::uint64_t k) { counter_.record(QueryClass::unconditional, k); }
  void charge_prefix(std::uint64_t k) { counter_.record(QueryClass::prefix, k); }
  void charge_marginal(std::uint64_t k) { counter_.record(QueryClass::marginal, k); }

 private:
  AdversarialInstance inst_;
  Rng rng_;
  QueryCounter counter_;
};

struct GridDistance {
  double min_tv = 1.0;
  std::vector<double> argmin;  // per-coordinate Pr[x_i = 1] of the closest grid product
  double step = 0.01;
  // Every product lies within n * step / 2 (in TV) of a grid product, so the
  // distance to the nearest product is at least min_tv - n * step / 2.
  double certified_lower_bound = 0.0;
};

/// Minimum TV distance from d to the products whose marginals lie on the
/// grid {0, step, 2 step, ..., 1}. Exhaustive, so limited to n <= 4.
inline GridDistance distance_to_product_grid(const DistributionTable& d, double step = 0.01) {
  const int n = d.dimension();
  if (n < 1 || n > 4) throw std::invalid_argument("distance_to_product_grid: supports 1 <= n <= 4");
  if (!(step > 0.0 && step <= 0.5)) throw std::invalid_argument("distance_to_product_grid: bad step");
  const int points = static_cast<int>(std::llround(1.0 / step)) + 1;
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) grid[static_cast<std::size_t>(k)] = std::min(1.0, k * step);

  GridDistance best;
  best.step = step;
  best.min_tv = 2.0;
  const std::size_t size = d.size();
  // partial[level][x-prefix] = product mass of the first `level` coordinates.
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(n + 1));
  partial[0] = {1.0};
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  auto extend = [&](int level) {
    const double p = grid[static_cast<std::size_t>(idx[static_cast<std::size_t>(level)])];
    const auto& prev = partial[static_cast<std::size_t>(level)];
    auto& next = partial[static_cast<std::size_t>(level + 1)];
    next.resize(prev.size() * 2);
    for (std::size_t w = 0; w < prev.size(); ++w) {
      next[2 * w] = prev[w] * (1.0 - p);
      next[2 * w + 1] = prev[w] * p;
    }
  };
  for (int level = 0; level < n; ++level) extend(level);
  while (true) {
    const auto& leaf = partial[static_cast<std::size_t>(n)];
    double tv = 0.0;
    for (std::size_t x = 0; x < size; ++x) tv += std::fabs(d[x] - leaf[x]);
    tv *= 0.5;
    if (tv < best.min_tv) {
      best.min_tv = tv;
      best.argmin.clear();
      for (int c : idx) best.argmin.push_back(grid[static_cast<std::size_t>(c)]);
    }
    int level = n - 1;
    while (level >= 0 && ++idx[static_cast<std::size_t>(level)] == points) {
      idx[static_cast<std::size_t>(level)] = 0;
      --level;
    }
    if (level < 0) break;
    for (int l = level; l < n; ++l) extend(l);
  }
  best.certified_lower_bound = best.min_tv - n * step / 2.0;
  return best;
}

}  // namespace subcube
