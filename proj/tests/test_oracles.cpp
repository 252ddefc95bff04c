#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <memory>
#include <random>

#include "subcube/adversarial.hpp"
#include "subcube/conditional_tree.hpp"
#include "subcube/encoding.hpp"
#include "subcube/interval.hpp"
#include "subcube/oracle.hpp"
#include "subcube/product_marginal.hpp"
#include "support.hpp"

using namespace subcube;

namespace {

constexpr std::uint64_t kFitSamples = 10000;
constexpr double kFitAlpha = 1e-3;

// Brute-force law of D conditioned on the subcube q.
std::map<std::uint64_t, double> conditioned(const DistributionTable& d, const SubcubeQuery& q) {
  std::map<std::uint64_t, double> law;
  double total = 0.0;
  for (std::uint64_t x = 0; x < d.size(); ++x) {
    if (q.matches(BitString(x, d.dimension())) && d[x] > 0.0) {
      law[x] = d[x];
      total += d[x];
    }
  }
  for (auto& [x, p] : law) p /= total;
  return law;
}

double mass_of(const DistributionTable& d, const SubcubeQuery& q) {
  double s = 0.0;
  for (std::uint64_t x = 0; x < d.size(); ++x)
    if (q.matches(BitString(x, d.dimension()))) s += d[x];
  return s;
}

SubcubeQuery random_query(int n, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> pick(0, 2);
  SubcubeQuery q = SubcubeQuery::free(n);
  for (int i = 1; i <= n; ++i) {
    const int c = pick(gen);
    if (c < 2) q.fix(i, c);
  }
  return q;
}

SubcubeQuery prefix_query(int n, int fixed, std::uint64_t v) {
  SubcubeQuery q = SubcubeQuery::free(n);
  for (int i = 1; i <= fixed; ++i) q.fix(i, static_cast<int>((v >> (fixed - i)) & 1u));
  return q;
}

template <class Draw>
std::map<std::uint64_t, std::uint64_t> tally(Draw draw, std::uint64_t samples = kFitSamples) {
  std::map<std::uint64_t, std::uint64_t> counts;
  for (std::uint64_t s = 0; s < samples; ++s) ++counts[draw()];
  return counts;
}

bool within_sigma(double observed_rate, double p, std::uint64_t samples, double sigmas = 3.0) {
  const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return std::abs(observed_rate - p) <= sigmas * sd + 1e-12;
}

}  // namespace

// ---- unconditional ------------------------------------------------------------

TEST(TableOracle, PointMassAlwaysReturnsItsAtom) {
  TableOracle o(DistributionTable::point_mass(BitString::parse("101")), 1);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(o.draw_unconditional().to_string(), "101");
}

TEST(TableOracle, UniformFrequencies) {
  TableOracle o(DistributionTable::uniform(2), 2);
  const std::uint64_t draws = 100000;
  const auto counts = tally([&] { return o.draw_unconditional().value(); }, draws);
  for (std::uint64_t x = 0; x < 4; ++x) {
    EXPECT_TRUE(within_sigma(static_cast<double>(counts.at(x)) / draws, 0.25, draws)) << x;
  }
}

TEST(TableOracle, CountersAdvanceByOne) {
  TableOracle o(DistributionTable::uniform(3), 3);
  for (std::uint64_t k = 0; k < 5; ++k) {
    EXPECT_EQ(o.counts()[QueryClass::unconditional], k);
    o.draw_unconditional();
  }
  o.prefix_sample(PrefixQuery{1, BitString(), 0b11});
  o.subcube_sample(SubcubeQuery::parse("*1*"));
  o.marginal_prefix_sample(2, BitString::parse("0"));
  EXPECT_EQ(o.counts()[QueryClass::prefix], 1u);
  EXPECT_EQ(o.counts()[QueryClass::subcube], 1u);
  EXPECT_EQ(o.counts()[QueryClass::marginal], 1u);
  EXPECT_EQ(o.counts().total(), 8u);
}

// ---- subcube ------------------------------------------------------------------

TEST(TableOracle, SubcubeFixingFirstBit) {
  TableOracle o(DistributionTable::uniform(3), 4);
  const auto counts = tally([&] { return o.subcube_sample(SubcubeQuery::parse("1**")).value(); });
  std::map<std::uint64_t, double> expected;
  for (std::uint64_t x = 4; x < 8; ++x) expected[x] = 0.25;
  EXPECT_TRUE(fixtures::fits(counts, expected, kFitSamples, kFitAlpha));
}

TEST(TableOracle, ZeroProbabilitySubcubeIsNotMetered) {
  TableOracle o(DistributionTable::point_mass(BitString::parse("00")), 5);
  for (const char* pattern : {"1*", "*1", "11"}) {
    try {
      o.subcube_sample(SubcubeQuery::parse(pattern));
      FAIL() << pattern;
    } catch (const OracleError& e) {
      EXPECT_EQ(e.kind(), OracleErrorKind::zero_probability_condition);
    }
  }
  EXPECT_THROW(o.marginal_prefix_sample(2, BitString::parse("1")), OracleError);
  EXPECT_THROW(o.prefix_sample(PrefixQuery{2, BitString::parse("1"), 0b11}), OracleError);
  EXPECT_EQ(o.counts().total(), 0u);
}

TEST(TableOracle, NuSubcubeZeroStar) {
  TableOracle o(nu_b_table(1, 0.1), 6);
  const auto counts = tally([&] { return o.subcube_sample(SubcubeQuery::parse("0*")).value(); });
  EXPECT_TRUE(within_sigma(static_cast<double>(counts.at(0)) / kFitSamples, 0.7, kFitSamples));
}

TEST(TableOracle, DimensionMismatch) {
  TableOracle o(DistributionTable::uniform(3), 7);
  EXPECT_THROW(o.subcube_sample(SubcubeQuery::parse("**")), OracleError);
  EXPECT_THROW(o.prefix_sample(PrefixQuery{4, BitString::parse("000"), 0b11}), OracleError);
}

// ---- prefix -------------------------------------------------------------------

TEST(TableOracle, EmptyPrefixMatchesUnconditional) {
  std::mt19937_64 gen(8);
  auto d = std::make_shared<const DistributionTable>(fixtures::random_table(4, gen));
  TableOracle a(d, 99);
  TableOracle b(d, 99);
  for (int k = 0; k < 200; ++k) {
    EXPECT_EQ(a.draw_unconditional(), b.prefix_sample(PrefixQuery{1, BitString(), 0b11}));
  }
}

TEST(TableOracle, PrefixPinsLeadingBit) {
  TableOracle o(DistributionTable::uniform(3), 9);
  for (int k = 0; k < 200; ++k) EXPECT_EQ(o.prefix_sample(PrefixQuery{1, BitString(), 0b10}).bit(1), 1);
}

TEST(TableOracle, PrefixFromConditionalTree) {
  ConditionalTree tree(3);
  tree.set(1, BitString(), 0.5);
  tree.set(2, BitString::parse("0"), 0.1);
  tree.set(2, BitString::parse("1"), 0.9);
  for (std::uint64_t v = 0; v < 4; ++v) tree.set(3, BitString(v, 2), 0.3);
  TableOracle o(tree.to_table(), 10);
  std::uint64_t ones = 0;
  for (std::uint64_t k = 0; k < kFitSamples; ++k) ones += o.prefix_sample(PrefixQuery{2, BitString::parse("1"), 0b11}).bit(2);
  EXPECT_TRUE(within_sigma(static_cast<double>(ones) / kFitSamples, *tree.get(2, BitString::parse("1")), kFitSamples));
}

TEST(PrefixQuery, Validation) {
  EXPECT_THROW(PrefixQuery({0, BitString(), 0b11}).validate(3), OracleError);
  EXPECT_THROW(PrefixQuery({2, BitString(), 0b11}).validate(3), OracleError);
  EXPECT_THROW(PrefixQuery({1, BitString(), 0b00}).validate(3), OracleError);
  const auto c = PrefixQuery::cylinder(3, BitString::parse("101"));
  EXPECT_EQ(c.index, 3);
  EXPECT_EQ(c.pinned().to_string(), "101");
}

// ---- marginal prefix ------------------------------------------------------------

TEST(TableOracle, MarginalExamples) {
  TableOracle u(DistributionTable::uniform(3), 11);
  std::uint64_t ones = 0;
  for (std::uint64_t k = 0; k < kFitSamples; ++k) ones += u.marginal_prefix_sample(3, BitString::parse("01"));
  EXPECT_TRUE(within_sigma(static_cast<double>(ones) / kFitSamples, 0.5, kFitSamples));

  TableOracle pm(DistributionTable::point_mass(BitString::parse("110")), 12);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(pm.marginal_prefix_sample(3, BitString::parse("11")), 0);

  TableOracle nu(nu_b_table(1, 0.1), 13);
  ones = 0;
  for (std::uint64_t k = 0; k < kFitSamples; ++k) ones += nu.marginal_prefix_sample(2, BitString::parse("0"));
  EXPECT_TRUE(within_sigma(static_cast<double>(ones) / kFitSamples, 0.3, kFitSamples));
}

TEST(TableOracle, BatchedSumsChargeEverySample) {
  TableOracle o(DistributionTable::product(std::vector<double>{0.2, 0.7}), 14);
  const std::uint64_t k = 200000;
  const auto s = o.prefix_bit_sum(2, BitString::parse("1"), k);
  EXPECT_TRUE(within_sigma(static_cast<double>(s) / k, 0.7, k, 4.0));
  const auto m = o.marginal_prefix_sum(1, BitString(), k);
  EXPECT_TRUE(within_sigma(static_cast<double>(m) / k, 0.2, k, 4.0));
  EXPECT_EQ(o.counts()[QueryClass::prefix], k);
  EXPECT_EQ(o.counts()[QueryClass::marginal], k);
}

// ---- goodness of fit across oracle kinds -----------------------------------------

TEST(OracleExactness, TableOracleSubcubePrefixAndMarginal) {
  std::mt19937_64 gen(2024);
  int pairs = 0;
  for (int round = 0; round < 24; ++round) {
    const int n = 1 + round % 6;
    auto d = std::make_shared<const DistributionTable>(fixtures::sparse_table(n, gen));
    TableOracle o(d, 1000 + round);

    SubcubeQuery q = random_query(n, gen);
    while (!(mass_of(*d, q) > 0.0)) q = random_query(n, gen);
    EXPECT_TRUE(fixtures::fits(tally([&] { return o.subcube_sample(q).value(); }), conditioned(*d, q), kFitSamples, kFitAlpha))
        << "subcube " << q.to_string();

    std::uniform_int_distribution<int> len(0, n);
    const int k = len(gen);
    const BitString w = d->sample(o.rng()).prefix(k);
    const auto pq = PrefixQuery::cylinder(n, w);
    EXPECT_TRUE(fixtures::fits(tally([&] { return o.prefix_sample(pq).value(); }), conditioned(*d, prefix_query(n, k, w.value())),
                     kFitSamples, kFitAlpha))
        << "prefix " << w.to_string();

    if (k < n) {
      const double p1 = mass_of(*d, prefix_query(n, k + 1, (w.value() << 1) | 1u)) / mass_of(*d, prefix_query(n, k, w.value()));
      std::map<std::uint64_t, double> law;
      if (p1 < 1.0) law[0] = 1.0 - p1;
      if (p1 > 0.0) law[1] = p1;
      EXPECT_TRUE(fixtures::fits(tally([&] { return static_cast<std::uint64_t>(o.marginal_prefix_sample(k + 1, w)); }), law,
                                 kFitSamples, kFitAlpha));
    }
    ++pairs;
  }
  EXPECT_GE(pairs, 20);
}

TEST(OracleExactness, IntervalAdapterPrefix) {
  std::mt19937_64 gen(31);
  for (int round = 0; round < 20; ++round) {
    std::uniform_int_distribution<std::uint64_t> size(2, 60);
    const std::uint64_t N = size(gen);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> probs(N);
    double total = 0.0;
    for (auto& p : probs) total += (p = e(gen));
    for (auto& p : probs) p /= total;
    auto dist = std::make_shared<const IntervalDistribution>(probs);
    IntervalOracle io(dist, 500 + round);
    IntervalPrefixAdapter adapter(io);
    const int ell = adapter.dimension();
    ASSERT_EQ(std::uint64_t{1} << ell >= N, true);
    const DistributionTable padded = dist->to_binary_table();
    // A prefix drawn from the padded table, so it has positive mass.
    Rng rng(round);
    std::uniform_int_distribution<int> len(0, ell);
    const int k = len(gen);
    const BitString w = padded.sample(rng).prefix(k);
    const auto before = io.counts()[QueryClass::interval];
    EXPECT_TRUE(fixtures::fits(tally([&] { return adapter.prefix_sample(PrefixQuery::cylinder(ell, w)).value(); }),
                               conditioned(padded, prefix_query(ell, k, w.value())), kFitSamples, kFitAlpha));
    EXPECT_EQ(io.counts()[QueryClass::interval] - before, kFitSamples);
  }
}

TEST(OracleExactness, EncodedOracleSubcube) {
  std::mt19937_64 gen(41);
  for (int round = 0; round < 20; ++round) {
    std::uniform_int_distribution<std::size_t> alpha(2, 5);
    TupleDomain dom({alpha(gen), alpha(gen)});
    std::exponential_distribution<double> e(1.0);
    std::vector<double> probs(dom.cardinality());
    double total = 0.0;
    for (auto& p : probs) total += (p = e(gen));
    for (auto& p : probs) p /= total;
    auto dist = std::make_shared<const TupleDistribution>(dom, probs);
    TupleOracle t(dist, 700 + round);
    EncodedOracle enc(t);
    const DistributionTable bin = dist->to_binary_table();
    SubcubeQuery q = random_query(enc.dimension(), gen);
    while (!(mass_of(bin, q) > 0.0)) q = random_query(enc.dimension(), gen);
    EXPECT_TRUE(fixtures::fits(tally([&] { return enc.subcube_sample(q).value(); }), conditioned(bin, q), kFitSamples, kFitAlpha))
        << q.to_string();
    EXPECT_EQ(t.counts()[QueryClass::subcube], kFitSamples);
  }
}

TEST(OracleExactness, PairedInstanceSubcube) {
  std::mt19937_64 gen(51);
  Rng rng(51);
  for (int round = 0; round < 20; ++round) {
    const int n = 2 + round % 5;
    const auto inst = sample_no_instance(n, 0.1 * std::sqrt(static_cast<double>(n)), rng);
    const auto table = inst.to_table();
    PairedInstanceOracle o(inst, 900 + round);
    const SubcubeQuery q = random_query(n, gen);
    EXPECT_TRUE(fixtures::fits(tally([&] { return o.subcube_sample(q).value(); }), conditioned(table, q), kFitSamples, kFitAlpha))
        << q.to_string();
  }
}

TEST(OracleExactness, ProductMarginalOracle) {
  std::mt19937_64 gen(61);
  for (int round = 0; round < 20; ++round) {
    const int n = 1 + round % 6;
    auto d = std::make_shared<const DistributionTable>(fixtures::random_table(n, gen));
    TableOracle src(d, 1100 + round);
    PrefixView<TableOracle> view(src);
    ProductMarginalOracle<PrefixView<TableOracle>> pm(view);
    std::uniform_int_distribution<int> coord(1, n);
    const int i = coord(gen);
    const BitString w(std::uniform_int_distribution<std::uint64_t>(0, (std::uint64_t{1} << (i - 1)) - 1)(gen), i - 1);
    double p1 = 0.0;
    for (std::uint64_t x = 0; x < d->size(); ++x)
      if ((x >> (n - i)) & 1u) p1 += (*d)[x];
    const std::map<std::uint64_t, double> law{{0, 1.0 - p1}, {1, p1}};
    EXPECT_TRUE(fixtures::fits(tally([&] { return static_cast<std::uint64_t>(pm.marginal_prefix_sample(i, w)); }), law,
                               kFitSamples, kFitAlpha));
    EXPECT_EQ(src.counts()[QueryClass::prefix], kFitSamples);
    EXPECT_EQ(src.counts().total(), kFitSamples);
  }
}

// ---- interval -------------------------------------------------------------------

TEST(IntervalOracle, Examples) {
  IntervalOracle full(IntervalDistribution::uniform(8), 20);
  std::map<std::uint64_t, double> uniform8;
  for (std::uint64_t t = 1; t <= 8; ++t) uniform8[t] = 0.125;
  EXPECT_TRUE(fixtures::fits(tally([&] { return full.interval_sample(1, 8); }), uniform8, kFitSamples, kFitAlpha));
  EXPECT_TRUE(fixtures::fits(tally([&] { return full.interval_sample(3, 4); }), {{3, 0.5}, {4, 0.5}}, kFitSamples, kFitAlpha));

  IntervalOracle point(IntervalDistribution::point_mass(8, 5), 21);
  try {
    point.interval_sample(1, 4);
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleErrorKind::zero_probability_condition);
  }
  EXPECT_EQ(point.interval_sample(5, 5), 5u);
}

TEST(IntervalPrefixAdapter, PaddingPrefixIsZeroProbability) {
  IntervalOracle io(IntervalDistribution::uniform(5), 22);
  IntervalPrefixAdapter a(io);
  ASSERT_EQ(a.dimension(), 3);
  // Strings 11x encode t = 7, 8, which lie in the padding.
  EXPECT_THROW(a.prefix_sample(PrefixQuery{3, BitString::parse("11"), 0b11}), OracleError);
  EXPECT_THROW(a.marginal_prefix_sample(3, BitString::parse("11")), OracleError);
  // 10x holds t = 5 (real) and t = 6 (padding).
  for (int k = 0; k < 50; ++k) EXPECT_EQ(a.prefix_sample(PrefixQuery{3, BitString::parse("10"), 0b11}).to_string(), "100");
  EXPECT_NEAR(a.prefix_bit_law(3, BitString::parse("10")), 0.0, 0.0);
  EXPECT_NEAR(a.unconditional_bit_law(1), 0.2, 1e-15);
}

// ---- encoding ---------------------------------------------------------------------

TEST(Encoding, AllBinaryCoordinatesTranslateToThemselves) {
  const TupleDomain dom({2, 2, 2});
  ASSERT_EQ(dom.total_bits(), 3);
  for (std::uint64_t v = 0; v < 8; ++v) {
    const Tuple x{(v >> 2) & 1u, (v >> 1) & 1u, v & 1u};
    EXPECT_EQ(encode_tuple(dom, x).value(), v);
    EXPECT_EQ(*decode_bits(dom, BitString(v, 3)), x);
  }
  const auto sets = preimage_sets(dom, SubcubeQuery::parse("1*0"));
  EXPECT_TRUE(sets[0].contains(1) && !sets[0].contains(0));
  EXPECT_TRUE(sets[1].is_full());
  EXPECT_TRUE(sets[2].contains(0) && !sets[2].contains(1));
}

TEST(Encoding, ThreeSymbolPrefix) {
  const TupleDomain dom({3}, {{"r", "g", "b"}});
  ASSERT_EQ(dom.total_bits(), 2);
  EXPECT_EQ(encode_tuple(dom, {0}).to_string(), "00");
  EXPECT_EQ(encode_tuple(dom, {1}).to_string(), "01");
  EXPECT_EQ(encode_tuple(dom, {2}).to_string(), "10");
  EXPECT_FALSE(decode_bits(dom, BitString::parse("11")).has_value());
  const auto sets = preimage_sets(dom, SubcubeQuery::parse("0*"));
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_TRUE(sets[0].contains(0));
  EXPECT_TRUE(sets[0].contains(1));
  EXPECT_FALSE(sets[0].contains(2));
  EXPECT_EQ(dom.label(1, 0), "r");
}

TEST(Encoding, UnusedCodeIsZeroProbability) {
  const TupleDomain dom({3});
  const auto sets = preimage_sets(dom, SubcubeQuery::parse("11"));
  EXPECT_TRUE(sets[0].empty());
  EXPECT_THROW(as_prefix_query(dom, sets, 1), OracleError);
  TupleOracle t(TupleDistribution::uniform(dom), 1);
  EncodedOracle enc(t);
  EXPECT_THROW(enc.prefix_sample(PrefixQuery{2, BitString::parse("1"), 0b10}), OracleError);
  EXPECT_EQ(t.counts().total(), 0u);
}

TEST(Encoding, NonPrefixShapeIsRejected) {
  const TupleDomain dom({3, 3});
  // Coordinate 1 left free while coordinate 2 is constrained.
  const auto sets = preimage_sets(dom, SubcubeQuery::parse("**1*"));
  EXPECT_THROW(as_prefix_query(dom, sets, 2), std::logic_error);
}

TEST(Encoding, BinaryPrefixAlwaysTranslatesToTuplePrefix) {
  for (const auto& sizes : std::vector<std::vector<std::size_t>>{{3, 3}, {2, 5, 3}, {4, 1, 7}, {6}, {2, 2, 2, 3}}) {
    const TupleDomain dom(sizes);
    const int n = dom.total_bits();
    for (int k = 0; k <= n; ++k) {
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << k); ++v) {
        const auto sets = preimage_sets(dom, cylinder_query(n, BitString(v, k)));
        bool any_empty = false;
        for (const auto& s : sets) any_empty |= s.empty();
        if (any_empty) {
          EXPECT_THROW(as_prefix_query(dom, sets, last_constrained(sets)), OracleError);
        } else {
          EXPECT_NO_THROW(as_prefix_query(dom, sets, last_constrained(sets)));
        }
      }
    }
  }
}

TEST(Encoding, OneBinaryQueryCostsOneTupleQuery) {
  const TupleDomain dom({3, 4});
  TupleOracle t(TupleDistribution::uniform(dom), 3);
  EncodedOracle enc(t);
  enc.draw_unconditional();
  enc.subcube_sample(SubcubeQuery::parse("0*1*"));
  enc.prefix_sample(PrefixQuery{3, BitString::parse("01"), 0b11});
  enc.marginal_prefix_sample(2, BitString::parse("1"));
  EXPECT_EQ(t.counts()[QueryClass::unconditional], 1u);
  EXPECT_EQ(t.counts()[QueryClass::subcube], 1u);
  EXPECT_EQ(t.counts()[QueryClass::prefix], 1u);
  EXPECT_EQ(t.counts()[QueryClass::marginal], 1u);
}

TEST(Encoding, BitLawsMatchBinaryTable) {
  std::mt19937_64 gen(71);
  const TupleDomain dom({3, 2, 5});
  std::exponential_distribution<double> e(1.0);
  std::vector<double> probs(dom.cardinality());
  double total = 0.0;
  for (auto& p : probs) total += (p = e(gen));
  for (auto& p : probs) p /= total;
  TupleOracle t(TupleDistribution(dom, probs), 4);
  EncodedOracle enc(t);
  const auto bin = t.distribution().to_binary_table();
  for (int i = 1; i <= enc.dimension(); ++i) {
    EXPECT_NEAR(enc.unconditional_bit_law(i), bin.marginal_one(i), 1e-12);
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << (i - 1)); ++v) {
      const BitString w(v, i - 1);
      if (bin.prefix_mass(w) > 0.0) {
        EXPECT_NEAR(enc.prefix_bit_law(i, w), bin.conditional_one(i, w), 1e-12);
      } else {
        EXPECT_THROW((void)enc.prefix_bit_law(i, w), OracleError);
      }
    }
  }
}

// ---- product of marginals -----------------------------------------------------------

TEST(ProductMarginalOracle, IgnoresThePrefix) {
  TableOracle src(nu_b_table(1, 0.1), 30);
  PrefixView<TableOracle> view(src);
  ProductMarginalOracle<PrefixView<TableOracle>> pm(view);
  for (const char* w : {"0", "1"}) {
    std::uint64_t ones = 0;
    for (std::uint64_t k = 0; k < kFitSamples; ++k) ones += pm.marginal_prefix_sample(2, BitString::parse(w));
    EXPECT_TRUE(within_sigma(static_cast<double>(ones) / kFitSamples, 0.5, kFitSamples)) << w;
    EXPECT_EQ(pm.marginal_bit_law(2, BitString::parse(w)), 0.5);
  }
  EXPECT_EQ(pm.counts()[QueryClass::marginal], 2 * kFitSamples);
  EXPECT_EQ(src.counts()[QueryClass::prefix], 2 * kFitSamples);
  EXPECT_EQ(src.counts().total(), 2 * kFitSamples);
}

TEST(ProductMarginalOracle, UnconditionalSource) {
  TableOracle src(DistributionTable::product(std::vector<double>{0.9, 0.1}), 31);
  ProductMarginalOracle<TableOracle> pm(src);
  // TableOracle has prefix access, so the empty-prefix route is used.
  pm.marginal_prefix_sample(1, BitString());
  EXPECT_EQ(src.counts()[QueryClass::prefix], 1u);
}

TEST(TupleProductMarginalOracle, SubcubeQueriesAndLaw) {
  const TupleDomain dom({3, 3});
  const std::vector<double> probs{0.2, 0.0, 0.1, 0.05, 0.15, 0.0, 0.3, 0.1, 0.1};
  TupleOracle t(TupleDistribution(dom, probs), 32);
  TupleProductMarginalOracle pm(t);
  // Marginal of coordinate 2 over its symbols {0 -> 00, 1 -> 01, 2 -> 10}.
  double m2[3] = {0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t s = 0; s < 3; ++s) m2[s] += probs[a * 3 + s];
  // Bit 4 is the low code bit of coordinate 2; bits 1-2 (coordinate 1) do not matter
  // unless they spell the unused code 11.
  for (std::uint64_t v = 0; v < 8; ++v) {
    const BitString w(v, 3);
    if ((v >> 1) == 3) {
      EXPECT_THROW((void)pm.marginal_bit_law(4, w), OracleError);
      continue;
    }
    const double expected = (v & 1u) ? 0.0 : m2[1] / (m2[0] + m2[1]);
    EXPECT_NEAR(pm.marginal_bit_law(4, w), expected, 1e-12) << w.to_string();
  }
  pm.marginal_prefix_sample(4, BitString::parse("000"));
  EXPECT_EQ(t.counts()[QueryClass::subcube], 1u);
  EXPECT_EQ(t.counts().total(), 1u);
}
