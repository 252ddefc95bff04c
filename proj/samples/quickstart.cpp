// Runs the equivalence and product testers on small explicit distributions
// and prints verdicts with their query bills.

#include <iostream>
#include <memory>

#include "subcube/equivalence.hpp"
#include "subcube/exact.hpp"

using namespace subcube;

namespace {

void report(const char* label, const Verdict& v) {
  std::cout << label << ": " << (v.accepted() ? "accept" : "reject") << " after " << v.queries.total()
            << " queries (prefix " << v.queries[QueryClass::prefix] << ", marginal " << v.queries[QueryClass::marginal]
            << ")\n";
}

}  // namespace

int main() {
  constexpr int n = 6;
  auto uniform = std::make_shared<const DistributionTable>(DistributionTable::uniform(n));
  auto point = std::make_shared<const DistributionTable>(DistributionTable::point_mass(BitString::parse("010110")));
  std::cout << "tv(uniform, point) = " << tv_distance(*uniform, *point) << "\n";

  TestConfig cfg;
  cfg.epsilon = 0.3;
  cfg.seed = 11;

  {
    TableOracle tau(uniform, 1);
    TableOracle mu(uniform, 2);
    PrefixView<TableOracle> t(tau);
    MarginalPrefixView<TableOracle> m(mu);
    report("uniform vs uniform", equivalence_test(t, m, cfg));
  }
  {
    TableOracle tau(uniform, 3);
    TableOracle mu(point, 4);
    PrefixView<TableOracle> t(tau);
    MarginalPrefixView<TableOracle> m(mu);
    report("uniform vs point mass", equivalence_test(t, m, cfg));
  }
  {
    auto biased = std::make_shared<const DistributionTable>(DistributionTable::product(std::vector<double>(n, 0.8)));
    TableOracle source(biased, 5);
    PrefixView<TableOracle> view(source);
    report("Ber(0.8)^6 product test", product_test(view, cfg));
  }
}
