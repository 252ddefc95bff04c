#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "subcube/chi2_test.hpp"
#include "subcube/encoding.hpp"
#include "subcube/interval.hpp"
#include "subcube/levin.hpp"
#include "subcube/oracle.hpp"
#include "subcube/product_marginal.hpp"

namespace subcube {

/// How the black-box runs are carried out.
///  sampled:   every chi-square trial draws its samples from the oracles.
///  exact_law: each block of inner repetitions on a drawn (i, w) is drawn
///             from its exact law, Bin(k, alpha(p, q, N)), with p and q read
///             from the oracles' exact conditionals; the oracles are charged
///             the same sample counts the sampled mode would use.
enum class Execution { sampled, exact_law };

inline std::string_view to_string(Execution e) { return e == Execution::sampled ? "sampled" : "exact-law"; }

struct TestConfig {
  double epsilon = 0.3;
  std::uint64_t seed = 0;
  Execution execution = Execution::exact_law;
};

enum class Decision { accept, reject };

inline std::string_view to_string(Decision d) { return d == Decision::accept ? "accept" : "reject"; }

struct Verdict {
  Decision decision = Decision::accept;
  int n = 0;
  double rho = 0.0;
  double levin_threshold = 0.0;
  QueryCounts queries;      // everything the run cost, by class
  QueryCounts tau_queries;  // meter delta of the tau-role oracle
  QueryCounts mu_queries;   // meter delta of the mu-role oracle
  LevinResult levin;        // per-round trace
  bool zero_probability_abort = false;

  bool accepted() const noexcept { return decision == Decision::accept; }
};

/// rho = eps^2 / (24 log2(2n / eps)).
inline double proximity_rho(int n, double eps) {
  return eps * eps / (24.0 * std::log2(2.0 * static_cast<double>(n) / eps));
}

/// Schedule the equivalence tester runs on n coordinates at proximity eps.
inline LevinSchedule equivalence_schedule(int n, double eps) {
  return LevinSchedule::for_threshold(proximity_rho(n, eps) / static_cast<double>(n));
}

/// Oracle samples of a complete (accepting) run: one tau sample per outer
/// draw plus 2 * 64 * N(eps') per black-box run.
inline std::uint64_t full_schedule_queries(const LevinSchedule& s) {
  std::uint64_t total = 0;
  for (int t = 1; t <= s.rounds; ++t) {
    const std::uint64_t draws = s.outer_draws(t);
    total += draws * (1 + s.inner_repetitions * 2 * kChi2Trials * chi2_sample_size(s.eps_prime(t)));
  }
  return total;
}

/// Queries of a run whose trace is `levin`.
inline std::uint64_t trace_queries(const LevinResult& levin) {
  std::uint64_t total = 0;
  for (const auto& r : levin.rounds) {
    total += r.draws + r.black_box_runs * 2 * kChi2Trials * chi2_sample_size(r.eps_prime);
  }
  return total;
}

/// A drawn point y = (i, w): slice index and the first i-1 bits of a tau sample.
struct Slice {
  int i = 1;
  BitString w;
};

namespace detail {

template <class Mu>
struct MarginalBitSource {
  Mu* mu;
  int i;
  BitString w;

  int draw() { return mu->marginal_prefix_sample(i, w); }
  std::uint64_t draw_sum(std::uint64_t k) {
    if constexpr (BatchedMarginalBits<Mu>) {
      return mu->marginal_prefix_sum(i, w, k);
    } else {
      std::uint64_t s = 0;
      for (std::uint64_t j = 0; j < k; ++j) s += static_cast<std::uint64_t>(draw());
      return s;
    }
  }
};

template <class Tau>
struct PrefixBitSource {
  Tau* tau;
  int i;
  BitString w;

  int draw() { return tau->prefix_sample(PrefixQuery{i, w, 0b11}).bit(i); }
  std::uint64_t draw_sum(std::uint64_t k) {
    if constexpr (BatchedPrefixBits<Tau>) {
      return tau->prefix_bit_sum(i, w, k);
    } else {
      std::uint64_t s = 0;
      for (std::uint64_t j = 0; j < k; ++j) s += static_cast<std::uint64_t>(draw());
      return s;
    }
  }
};

template <class Tau, class Mu>
struct SampledBlackBox {
  Tau* tau;
  Mu* mu;

  bool operator()(const Slice& y, double eps_prime) {
    // Fresh sources per run; the mu side is queried first in every trial.
    MarginalBitSource<Mu> x_src{mu, y.i, y.w};
    PrefixBitSource<Tau> y_src{tau, y.i, y.w};
    return single_bit_chi2_test(x_src, y_src, eps_prime).accept;
  }
};

template <class Tau, class Mu>
struct ExactLawBlackBox {
  Tau* tau;
  Mu* mu;
  Rng* rng;
  Chi2LawCache* cache;

  std::uint64_t accepts_in(const Slice& y, double eps_prime, std::uint64_t k) {
    const double p = mu->marginal_bit_law(y.i, y.w);
    const double q = tau->prefix_bit_law(y.i, y.w);
    const std::uint64_t n = chi2_sample_size(eps_prime);
    const double alpha = (*cache)(p, q, n);
    const std::uint64_t served = k * kChi2Trials * n;
    mu->charge_marginal(served);
    tau->charge_prefix(served);
    return binomial(*rng, k, alpha);
  }
};

}  // namespace detail

/// Equivalence tester over {0,1}^n: tau through prefix queries, mu through
/// marginal prefix queries. A zero-probability answer from mu (possible only
/// when tau != mu, since w is drawn from tau) rejects immediately.
template <PrefixAccess Tau, MarginalPrefixAccess Mu>
Verdict equivalence_test(Tau& tau, Mu& mu, const TestConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) {
    throw std::invalid_argument("equivalence_test: epsilon must lie in (0, 1)");
  }
  const int n = tau.dimension();
  if (mu.dimension() != n) {
    throw OracleError(OracleErrorKind::dimension_mismatch,
                      "tau has " + std::to_string(n) + " coordinates, mu has " + std::to_string(mu.dimension()));
  }
  if (n < 1) throw std::invalid_argument("equivalence_test: need n >= 1");

  Verdict v;
  v.n = n;
  v.rho = proximity_rho(n, cfg.epsilon);
  v.levin_threshold = v.rho / n;
  const LevinSchedule schedule = LevinSchedule::for_threshold(v.levin_threshold);
  const QueryCounts tau_before = tau.counts();
  const QueryCounts mu_before = mu.counts();

  Rng rng(cfg.seed);
  auto draw_y = [&]() {
    const int i = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    const BitString x = tau.prefix_sample(PrefixQuery{1, BitString(), 0b11});
    return Slice{i, x.prefix(i - 1)};
  };

  try {
    if (cfg.execution == Execution::exact_law) {
      if constexpr (ExactPrefixAccess<Tau> && ExactMarginalPrefixAccess<Mu>) {
        Chi2LawCache cache;
        detail::ExactLawBlackBox<Tau, Mu> bb{&tau, &mu, &rng, &cache};
        run_levin(draw_y, bb, schedule, v.levin);
      } else {
        throw std::invalid_argument("exact-law execution needs oracles that expose their exact laws");
      }
    } else {
      detail::SampledBlackBox<Tau, Mu> bb{&tau, &mu};
      run_levin(draw_y, bb, schedule, v.levin);
    }
    v.decision = v.levin.accept ? Decision::accept : Decision::reject;
  } catch (const OracleError& e) {
    if (e.kind() != OracleErrorKind::zero_probability_condition) throw;
    v.decision = Decision::reject;
    v.zero_probability_abort = true;
    v.levin.accept = false;
    if (!v.levin.rounds.empty()) v.levin.rounds.back().rejected = true;
  }
  v.tau_queries = tau.counts() - tau_before;
  v.mu_queries = mu.counts() - mu_before;
  v.queries = v.tau_queries + v.mu_queries;
  return v;
}

/// Product tester over {0,1}^n with prefix access to mu: equivalence of mu
/// (tau role) against the product of its marginals (mu role), each marginal
/// query served by one empty-prefix query to mu. Only prefix queries are made.
template <PrefixAccess M>
Verdict product_test(M& mu, const TestConfig& cfg) {
  PrefixView<M> tau_role(mu);
  ProductMarginalOracle<PrefixView<M>> mu_role(tau_role);
  const QueryCounts before = mu.counts();
  Verdict v = equivalence_test(tau_role, mu_role, cfg);
  v.queries = mu.counts() - before;
  v.tau_queries = v.queries - v.mu_queries;
  for (QueryClass c : kQueryClasses) {
    if (c != QueryClass::prefix && v.queries[c] != 0) {
      throw std::logic_error("binary product test issued a non-prefix query");
    }
  }
  return v;
}

/// Equivalence over a general tuple domain through the binary form.
inline Verdict equivalence_test_general(TupleOracle& tau, TupleOracle& mu, const TestConfig& cfg) {
  if (!(tau.domain() == mu.domain())) {
    throw OracleError(OracleErrorKind::dimension_mismatch, "tau and mu live on different tuple domains");
  }
  EncodedOracle tau_bin(tau);
  EncodedOracle mu_bin(mu);
  PrefixView<EncodedOracle> tau_view(tau_bin);
  MarginalPrefixView<EncodedOracle> mu_view(mu_bin);
  return equivalence_test(tau_view, mu_view, cfg);
}

/// Product test over a general tuple domain: prefix queries for the tau
/// role and one subcube query per marginal query for the mu role.
inline Verdict product_test_general(TupleOracle& mu, const TestConfig& cfg) {
  EncodedOracle mu_bin(mu);
  PrefixView<EncodedOracle> tau_role(mu_bin);
  TupleProductMarginalOracle mu_role(mu);
  const QueryCounts before = mu.counts();
  Verdict v = equivalence_test(tau_role, mu_role, cfg);
  v.queries = mu.counts() - before;
  v.tau_queries = v.queries;
  v.tau_queries[QueryClass::subcube] = 0;
  v.mu_queries = QueryCounts{};
  v.mu_queries[QueryClass::subcube] = v.queries[QueryClass::subcube];
  return v;
}

/// Equivalence over [N] with interval access: both sides are padded to 2^ell
/// and every prefix query becomes one interval query. N = 1 accepts without
/// querying.
inline Verdict interval_equivalence_test(IntervalOracle& tau, IntervalOracle& mu, const TestConfig& cfg) {
  if (tau.size() != mu.size()) {
    throw OracleError(OracleErrorKind::dimension_mismatch, "tau and mu live on domains of different sizes");
  }
  if (tau.size() == 1) {
    Verdict v;
    v.decision = Decision::accept;
    return v;
  }
  IntervalPrefixAdapter tau_bin(tau);
  IntervalPrefixAdapter mu_bin(mu);
  PrefixView<IntervalPrefixAdapter> tau_view(tau_bin);
  MarginalPrefixView<IntervalPrefixAdapter> mu_view(mu_bin);
  return equivalence_test(tau_view, mu_view, cfg);
}

}  // namespace subcube
