// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 iff the set of failing criteria equals the --expect-fail
// set (empty by default). Each FAIL line says what was observed.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "subcube/adversarial.hpp"
#include "subcube/equivalence.hpp"
#include "subcube/exact.hpp"
#include "subcube/harness/inequalities.hpp"
#include "subcube/harness/stats.hpp"
#include "support.hpp"

using namespace subcube;
using harness::ContractCheck;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string contract_text(const char* what, const ContractCheck& c) {
  return fmt("%s %llu/%llu (rate %.3f, 99%% lower bound %.3f)", what, static_cast<unsigned long long>(c.successes),
             static_cast<unsigned long long>(c.trials), c.rate, c.lower_bound);
}

std::vector<std::pair<DistributionTable, DistributionTable>> random_pairs() {
  std::mt19937_64 gen(20240601);
  std::vector<std::pair<DistributionTable, DistributionTable>> out;
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 5;
    out.emplace_back(fixtures::random_table(n, gen), fixtures::random_table(n, gen));
  }
  return out;
}

double brute_kl(const DistributionTable& t, const DistributionTable& m) {
  double s = 0.0;
  for (std::uint64_t x = 0; x < t.size(); ++x) {
    if (t[x] > 0) s += t[x] * std::log2(t[x] / m[x]);
  }
  return s;
}

Verdict equivalence_run(const std::shared_ptr<const DistributionTable>& tau, const std::shared_ptr<const DistributionTable>& mu,
                        double eps, std::uint64_t seed, Execution mode = Execution::exact_law) {
  TableOracle t(tau, derive_seed(seed, 1));
  TableOracle m(mu, derive_seed(seed, 2));
  PrefixView<TableOracle> tv(t);
  MarginalPrefixView<TableOracle> mv(m);
  return equivalence_test(tv, mv, TestConfig{eps, derive_seed(seed, 3), mode});
}

// Query count of a run that completes every round, from the schedule formulas.
std::uint64_t schedule_queries_by_formula(int n, double eps) {
  const double rho = eps * eps / (24.0 * std::log2(2.0 * n / eps));
  const double threshold = rho / n;
  const int rounds = static_cast<int>(std::ceil(std::log2(2.0 / threshold)));
  const auto k = static_cast<std::uint64_t>(std::ceil(64.0 * (std::log2(1.0 / threshold) + 2.0)));
  std::uint64_t total = 0;
  for (int t = 1; t <= rounds; ++t) {
    const auto draws = static_cast<std::uint64_t>(std::ceil(std::ldexp(1.0, 3 - t) / threshold));
    const auto samples = static_cast<std::uint64_t>(std::ceil(24.0 * std::ldexp(1.0, t) - 1e-9));
    // One prefix query draws the slice; each inner run draws 64 trials of
    // `samples` bits from each side.
    total += draws * (1 + k * 2 * 64 * samples);
  }
  return total;
}

// Law of x -> simulate(q, x) for x ~ d, and of d conditioned on q.
double pushforward_gap(const DistributionTable& d, const SubcubeQuery& q) {
  std::vector<double> push(d.size(), 0.0), cond(d.size(), 0.0);
  double mass = 0.0;
  for (std::uint64_t x = 0; x < d.size(); ++x) {
    const BitString bx(x, d.dimension());
    push[simulate_pair_conditional(q, bx).value()] += d[x];
    if (q.matches(bx)) mass += (cond[x] = d[x]);
  }
  double gap = 0.0;
  for (std::uint64_t y = 0; y < d.size(); ++y) gap = std::max(gap, std::fabs(push[y] - cond[y] / mass));
  return gap;
}

std::vector<Criterion> criteria() {
  std::vector<Criterion> list;

  list.push_back({1, "chain rule: slicewise KL equals KL", 5.0, [] {
                    double worst = 0.0, worst_brute = 0.0;
                    for (const auto& [t, m] : random_pairs()) {
                      const double s = slicewise_divergence(DivergenceKind::kl, t, m);
                      worst = std::max(worst, std::fabs(s - kl_divergence(t, m)));
                      worst_brute = std::max(worst_brute, std::fabs(s - brute_kl(t, m)));
                    }
                    return Outcome{worst <= 1e-9 && worst_brute <= 1e-9,
                                   fmt("100 pairs, max |slicewise - kl| = %.2e, vs direct sum %.2e", worst, worst_brute)};
                  }});

  list.push_back({2, "soundness: slicewise chi2 >= dtv^2 / (24 log2(2n/dtv))", 0.0, [] {
                    int violations = 0;
                    double min_ratio = 1e300;
                    for (const auto& [t, m] : random_pairs()) {
                      const double d = tv_distance(t, m);
                      const double bound = d * d / (24.0 * std::log2(2.0 * t.dimension() / d));
                      const double delta = slicewise_divergence(DivergenceKind::chi2, t, m);
                      if (delta < bound) ++violations;
                      min_ratio = std::min(min_ratio, delta / bound);
                    }
                    return Outcome{violations == 0, fmt("%d violations over 100 pairs, min ratio %.3f", violations, min_ratio)};
                  }});

  list.push_back({3, "chi2-KL grid inequality", 1.0, [] {
                    const auto row = harness::check_chi2_vs_kl(0.01);
                    return Outcome{row.violations == 0 && row.points == 101u * 99u,
                                   fmt("%llu grid points, %llu violations, min slack %.3e",
                                       static_cast<unsigned long long>(row.points),
                                       static_cast<unsigned long long>(row.violations), row.min_slack)};
                  }});

  list.push_back({4, "single-bit tester contract", 30.0, [] {
                    std::uint64_t accepts = 0, rejects = 0;
                    for (std::uint64_t r = 0; r < 300; ++r) {
                      BernoulliSampler a(0.5, derive_seed(401, r)), b(0.5, derive_seed(402, r));
                      accepts += single_bit_chi2_test(a, b, 0.1).accept ? 1 : 0;
                      BernoulliSampler c(0.2, derive_seed(403, r)), d(0.8, derive_seed(404, r));
                      rejects += single_bit_chi2_test(c, d, 0.18).accept ? 0 : 1;
                    }
                    const auto acc = ContractCheck::of(accepts, 300), rej = ContractCheck::of(rejects, 300);
                    const double c = (0.2 - 0.8) * (0.2 - 0.8) / (1.0 * 1.0);
                    return Outcome{acc.holds && rej.holds && std::fabs(chi2(0.2, 0.8) - c) < 1e-15,
                                   contract_text("p=q=0.5 eps=0.1 accepts", acc) + "; " +
                                       contract_text("p=0.2 q=0.8 eps=0.18 rejects", rej) + fmt("; chi2 = %.4f", c)};
                  }});

  list.push_back({5, "equivalence tester contract (n=8, eps=0.3)", 300.0, [] {
                    auto u = std::make_shared<const DistributionTable>(DistributionTable::uniform(8));
                    auto pm = std::make_shared<const DistributionTable>(DistributionTable::point_mass(BitString(0, 8)));
                    std::uint64_t accepts = 0, rejects = 0;
                    for (std::uint64_t r = 0; r < 60; ++r) {
                      accepts += equivalence_run(u, u, 0.3, derive_seed(501, r)).accepted() ? 1 : 0;
                      rejects += equivalence_run(u, pm, 0.3, derive_seed(502, r)).accepted() ? 0 : 1;
                    }
                    const auto acc = ContractCheck::of(accepts, 60), rej = ContractCheck::of(rejects, 60);
                    return Outcome{acc.holds && rej.holds, contract_text("uniform/uniform accepts", acc) + "; " +
                                                               contract_text("uniform/point rejects", rej)};
                  }});

  list.push_back({6, "quasi-linear query scaling n=8 -> n=16", 600.0, [] {
                    auto median_queries = [](int n) {
                      auto u = std::make_shared<const DistributionTable>(DistributionTable::uniform(n));
                      std::vector<std::uint64_t> totals;
                      for (std::uint64_t r = 0; r < 30; ++r) totals.push_back(equivalence_run(u, u, 0.3, derive_seed(600 + n, r)).queries.total());
                      return harness::median(totals);
                    };
                    const double m8 = median_queries(8), m16 = median_queries(16);
                    const double ratio = m16 / m8;
                    // Fixed seed: the meters must reproduce the schedule count.
                    auto u = std::make_shared<const DistributionTable>(DistributionTable::uniform(16));
                    TableOracle t(u, 11), m(u, 12);
                    PrefixView<TableOracle> tv(t);
                    MarginalPrefixView<TableOracle> mv(m);
                    const auto v = equivalence_test(tv, mv, TestConfig{0.3, 13, Execution::exact_law});
                    const std::uint64_t metered = t.counts().total() + m.counts().total();
                    const std::uint64_t formula = schedule_queries_by_formula(16, 0.3);
                    // Literal sampling at n = 1 must land on the same count.
                    auto one = std::make_shared<const DistributionTable>(DistributionTable::uniform(1));
                    const auto literal = equivalence_run(one, one, 0.9, 14, Execution::sampled);
                    const bool literal_ok = !literal.accepted() || literal.queries.total() == schedule_queries_by_formula(1, 0.9);
                    return Outcome{ratio <= 3.0 && v.accepted() && metered == formula && literal_ok,
                                   fmt("median n=8 %.0f, n=16 %.0f, ratio %.3f; seed 13 metered %llu vs schedule %llu; "
                                       "sampled n=1 %s %llu",
                                       m8, m16, ratio, static_cast<unsigned long long>(metered),
                                       static_cast<unsigned long long>(formula), literal.accepted() ? "accepted with" : "rejected after",
                                       static_cast<unsigned long long>(literal.queries.total()))};
                  }});

  list.push_back({7, "interval reduction", 0.0, [] {
                    std::uint64_t mismatches = 0;
                    for (int ell = 0; ell <= 10; ++ell) {
                      for (int i = 1; i <= ell + 1; ++i) {
                        for (std::uint64_t v = 0; v < (std::uint64_t{1} << (i - 1)); ++v) {
                          const BitString w(v, i - 1);
                          const Interval r = prefix_to_interval(ell, i, w);
                          for (std::uint64_t t = 1; t <= (std::uint64_t{1} << ell); ++t) {
                            const bool in_interval = r.first <= t && t <= r.last;
                            const bool in_cylinder = ((t - 1) >> (ell - i + 1)) == v;
                            mismatches += in_interval != in_cylinder ? 1 : 0;
                          }
                        }
                      }
                    }
                    const auto u = IntervalDistribution::uniform(256);
                    const auto low = IntervalDistribution::uniform_on(256, 1, 64);
                    const double dtv = tv_distance(u.to_binary_table(), low.to_binary_table());
                    std::uint64_t accepts = 0, rejects = 0;
                    for (std::uint64_t r = 0; r < 60; ++r) {
                      const std::uint64_t s = derive_seed(701, r);
                      IntervalOracle a(u, derive_seed(s, 1)), b(u, derive_seed(s, 2));
                      accepts += interval_equivalence_test(a, b, TestConfig{0.3, derive_seed(s, 3), Execution::exact_law}).accepted() ? 1 : 0;
                      IntervalOracle c(u, derive_seed(s, 4)), d(low, derive_seed(s, 5));
                      rejects += interval_equivalence_test(c, d, TestConfig{0.3, derive_seed(s, 6), Execution::exact_law}).accepted() ? 0 : 1;
                    }
                    const auto acc = ContractCheck::of(accepts, 60), rej = ContractCheck::of(rejects, 60);
                    return Outcome{mismatches == 0 && std::fabs(dtv - 0.75) < 1e-12 && acc.holds && rej.holds,
                                   fmt("%llu preimage mismatches (ell <= 10); dtv %.4f; ",
                                       static_cast<unsigned long long>(mismatches), dtv) +
                                       contract_text("equal accepts", acc) + "; " + contract_text("far rejects", rej)};
                  }});

  list.push_back({8, "product tester contract", 0.0, [] {
                    auto prod = std::make_shared<const DistributionTable>(DistributionTable::product(std::vector<double>(8, 0.8)));
                    const auto inst = AdversarialInstance::make(8, 0.2 * std::sqrt(8.0), {1, 1, 1, 1});
                    auto far = std::make_shared<const DistributionTable>(inst.to_table());
                    const double far_tv = tv_distance(*far, product_of_marginals(*far));
                    std::uint64_t accepts = 0, rejects = 0, non_prefix = 0;
                    auto run = [&](const std::shared_ptr<const DistributionTable>& d, std::uint64_t s) {
                      TableOracle m(d, derive_seed(s, 1));
                      PrefixView<TableOracle> view(m);
                      const auto v = product_test(view, TestConfig{0.3, derive_seed(s, 3), Execution::exact_law});
                      non_prefix += m.counts().total() - m.counts()[QueryClass::prefix];
                      return v.accepted();
                    };
                    for (std::uint64_t r = 0; r < 60; ++r) {
                      accepts += run(prod, derive_seed(801, r)) ? 1 : 0;
                      rejects += run(far, derive_seed(802, r)) ? 0 : 1;
                    }
                    const auto acc = ContractCheck::of(accepts, 60), rej = ContractCheck::of(rejects, 60);
                    return Outcome{acc.holds && rej.holds && far_tv > 0.3 && non_prefix == 0,
                                   contract_text("Ber(0.8)^8 accepts", acc) + "; " +
                                       contract_text("paired delta=0.2 rejects", rej) +
                                       fmt("; its dtv to marginals %.4f; non-prefix queries %llu", far_tv,
                                           static_cast<unsigned long long>(non_prefix))};
                  }});

  list.push_back({9, "pair simulation is exact", 1.0, [] {
                    double worst = 0.0;
                    int cases = 0;
                    for (int b : {-1, 0, 1}) {
                      const auto d = nu_b_table(b, 0.1);
                      for (const char* shape : {"00", "01", "10", "11", "**", "0*", "1*", "*0", "*1"}) {
                        worst = std::max(worst, pushforward_gap(d, SubcubeQuery::parse(shape)));
                        ++cases;
                      }
                    }
                    return Outcome{worst <= 1e-15, fmt("%d cases, max pointwise gap %.1e", cases, worst)};
                  }});

  list.push_back({10, "XOR reduction identity", 0.0, [] {
                    const auto image = xor_transform(nu_b_table(1, 0.1));
                    const auto claimed = DistributionTable::product(std::vector<double>{0.7, 0.5});
                    double gap = 0.0;
                    for (std::uint64_t x = 0; x < 4; ++x) gap = std::max(gap, std::fabs(image[x] - claimed[x]));
                    const double first_one = image[0b10] + image[0b11];
                    const double second_one = image[0b01] + image[0b11];
                    const bool is_product = std::fabs(image[0b11] - first_one * second_one) < 1e-15;
                    bool fixed = true;
                    for (int n : {2, 4, 6}) {
                      const auto u = DistributionTable::uniform(n);
                      const auto x = xor_transform(u);
                      for (std::uint64_t k = 0; k < u.size(); ++k) fixed = fixed && x[k] == u[k];
                    }
                    return Outcome{gap <= 1e-15 && fixed,
                                   fmt("image of nu_+1(0.1) is %sBer(%.2f) x Ber(%.2f) (max gap to Ber(0.7) x Ber(0.5) = %.2f); "
                                       "uniform fixed for n=2,4,6: %s",
                                       is_product ? "" : "not ", first_one, second_one, gap, fixed ? "yes" : "no")};
                  }});

  list.push_back({11, "adversarial distance witness (n=4, delta=0.1)", 60.0, [] {
                    double worst_grid = 1.0, worst_marg = 1.0, worst_cert = 1.0;
                    int instances = 0;
                    for (const std::vector<int>& b : std::vector<std::vector<int>>{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}) {
                      const auto inst = AdversarialInstance::make(4, 0.1 * 2.0, b);
                      const auto table = inst.to_table();
                      const auto g = distance_to_product_grid(table, 0.01);
                      worst_grid = std::min(worst_grid, g.min_tv);
                      worst_cert = std::min(worst_cert, g.certified_lower_bound);
                      worst_marg = std::min(worst_marg, tv_distance(table, product_of_marginals(table)));
                      ++instances;
                    }
                    return Outcome{worst_grid >= 0.01 && worst_marg > 0.0,
                                   fmt("%d instances, min grid dtv %.4f (step 0.01, certified >= %.4f), min dtv to marginals %.4f",
                                       instances, worst_grid, worst_cert, worst_marg)};
                  }});
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::vector<int> expect_fail;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail; exit 0 iff exactly these fail")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(only.begin(), only.end());
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  std::set<int> failed;
  for (const auto& c : criteria()) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = Outcome{false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_seconds);
    }
    if (!o.pass) failed.insert(c.id);
    std::printf("%s  %2d  %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::set<int> expected_here;
  for (int id : expected)
    if (selected.empty() || selected.count(id)) expected_here.insert(id);
  std::printf("%zu failed", failed.size());
  if (!expected_here.empty()) std::printf(" (%zu expected)", expected_here.size());
  std::printf("\n");
  return failed == expected_here ? 0 : 1;
}
