#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "subcube/adversarial.hpp"
#include "subcube/equivalence.hpp"
#include "subcube/exact.hpp"
#include "subcube/harness/csv.hpp"
#include "subcube/harness/inequalities.hpp"
#include "subcube/harness/stats.hpp"
#include "subcube/io.hpp"

namespace subcube::harness {

enum class ExperimentKind { equivalence, product, interval, single_bit, inequality_grid, adversarial_distance, scaling_sweep };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::equivalence:
      return "equivalence";
    case ExperimentKind::product:
      return "product";
    case ExperimentKind::interval:
      return "interval";
    case ExperimentKind::single_bit:
      return "single-bit";
    case ExperimentKind::inequality_grid:
      return "inequality-grid";
    case ExperimentKind::adversarial_distance:
      return "adversarial-distance";
    case ExperimentKind::scaling_sweep:
      return "scaling-sweep";
  }
  return "?";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
  for (auto k : {ExperimentKind::equivalence, ExperimentKind::product, ExperimentKind::interval, ExperimentKind::single_bit,
                 ExperimentKind::inequality_grid, ExperimentKind::adversarial_distance, ExperimentKind::scaling_sweep}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + std::string(s) +
                              "' (expected equivalence, product, interval, single-bit, inequality-grid, "
                              "adversarial-distance or scaling-sweep)");
}

inline Execution parse_execution(std::string_view s) {
  if (s == "exact-law") return Execution::exact_law;
  if (s == "sampled") return Execution::sampled;
  throw std::invalid_argument("unknown execution mode '" + std::string(s) + "' (expected exact-law or sampled)");
}

/// Everything needed to replay an experiment.
///
/// Binary sources (tau, mu): "uniform", "point:<bits>", "product:<p>",
/// "paired:<delta>[:<seed>|:<signs>]" or a JSON file (table, tree, or tuple
/// form). Interval sources: "uniform", "uniform:<a>-<b>", "point:<t>" or a
/// JSON file.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::equivalence;
  std::string id;  // defaults to the kind name
  int n = 8;
  double eps = 0.3;
  std::uint64_t domain_size = 256;  // N for interval experiments
  int runs = 60;
  std::uint64_t seed = 7;
  std::string tau = "uniform";
  std::string mu = "uniform";
  double p = 0.5;  // single-bit
  double q = 0.5;
  ExperimentKind sweep_kind = ExperimentKind::equivalence;
  std::vector<int> n_list;
  std::vector<double> eps_list;
  double grid_step = 0.01;
  Execution execution = Execution::exact_law;
  unsigned threads = 0;  // 0 = hardware concurrency

  std::string name() const { return id.empty() ? std::string(to_string(kind)) : id; }

  void validate() const {
    if (runs < 1) throw std::invalid_argument("runs must be at least 1");
    const bool tester = kind == ExperimentKind::equivalence || kind == ExperimentKind::product ||
                        kind == ExperimentKind::interval || kind == ExperimentKind::single_bit;
    if (tester || kind == ExperimentKind::adversarial_distance) {
      if (!(eps > 0.0 && eps < 1.0) && kind != ExperimentKind::single_bit) {
        throw std::invalid_argument("eps must lie in (0, 1)");
      }
    }
    if (kind == ExperimentKind::single_bit) {
      if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
      if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) throw std::invalid_argument("p and q must lie in [0, 1]");
    }
    if ((kind == ExperimentKind::equivalence || kind == ExperimentKind::product) && (n < 1 || n > kMaxBits)) {
      throw std::invalid_argument("n must lie in [1, " + std::to_string(kMaxBits) + "]");
    }
    if (kind == ExperimentKind::interval && domain_size < 1) throw std::invalid_argument("N must be at least 1");
    if (kind == ExperimentKind::scaling_sweep) {
      if (n_list.empty() || eps_list.empty()) throw std::invalid_argument("scaling sweep needs --n-list and --eps-list");
      if (sweep_kind != ExperimentKind::equivalence && sweep_kind != ExperimentKind::product &&
          sweep_kind != ExperimentKind::interval) {
        throw std::invalid_argument("scaling sweep kind must be equivalence, product or interval");
      }
    }
    if (kind == ExperimentKind::adversarial_distance && (n < 1 || n > 4)) {
      throw std::invalid_argument("adversarial-distance runs an exhaustive grid and supports 1 <= n <= 4");
    }
    if (!(grid_step > 0.0 && grid_step <= 0.5)) throw std::invalid_argument("grid step must lie in (0, 1/2]");
  }
};

inline Json to_json(const ExperimentSpec& s) {
  Json j{{"kind", to_string(s.kind)},
         {"id", s.name()},
         {"n", s.n},
         {"eps", s.eps},
         {"N", s.domain_size},
         {"runs", s.runs},
         {"seed", s.seed},
         {"tau", s.tau},
         {"mu", s.mu},
         {"p", s.p},
         {"q", s.q},
         {"grid-step", s.grid_step},
         {"execution", to_string(s.execution)}};
  if (s.kind == ExperimentKind::scaling_sweep) {
    j["sweep-kind"] = to_string(s.sweep_kind);
    j["n-list"] = s.n_list;
    j["eps-list"] = s.eps_list;
  }
  return j;
}

/// Applies the keys of a config object (same names as the CLI flags).
inline void apply_config(ExperimentSpec& s, const Json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") s.kind = parse_experiment_kind(value.get<std::string>());
    else if (key == "id") s.id = value.get<std::string>();
    else if (key == "n") s.n = value.get<int>();
    else if (key == "eps") s.eps = value.get<double>();
    else if (key == "N") s.domain_size = value.get<std::uint64_t>();
    else if (key == "runs") s.runs = value.get<int>();
    else if (key == "seed") s.seed = value.get<std::uint64_t>();
    else if (key == "tau") s.tau = value.get<std::string>();
    else if (key == "mu") s.mu = value.get<std::string>();
    else if (key == "p") s.p = value.get<double>();
    else if (key == "q") s.q = value.get<double>();
    else if (key == "grid-step") s.grid_step = value.get<double>();
    else if (key == "execution") s.execution = parse_execution(value.get<std::string>());
    else if (key == "sweep-kind") s.sweep_kind = parse_experiment_kind(value.get<std::string>());
    else if (key == "n-list") s.n_list = value.get<std::vector<int>>();
    else if (key == "eps-list") s.eps_list = value.get<std::vector<double>>();
    else if (key == "threads") s.threads = value.get<unsigned>();
    else if (key == "out") continue;
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

struct ExperimentResult {
  PlotKind plot_kind = PlotKind::runs;
  std::vector<PlotRow> rows;
  Json summary;
};

// ---- sources ---------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) return parts;
    start = pos + 1;
  }
}

inline double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::invalid_argument(what + ": '" + s + "' is not a number");
  return v;
}

inline std::uint64_t parse_uint(const std::string& s, const std::string& what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument(what + ": '" + s + "' is not a non-negative integer");
  }
  return std::stoull(s);
}

inline bool is_keyword_source(const std::string& s) {
  static const char* prefixes[] = {"uniform", "point:", "product:", "paired:"};
  for (const char* p : prefixes)
    if (s.rfind(p, 0) == 0) return true;
  return false;
}

}  // namespace detail

/// The adversarial instance named by "paired:<delta>[:<seed>|:<signs>]".
inline AdversarialInstance paired_source(const std::string& src, int n) {
  const auto parts = detail::split(src, ':');
  if (parts.size() < 2 || parts.size() > 3) throw std::invalid_argument("expected paired:<delta>[:<seed>|:<signs>]");
  const double delta = detail::parse_double(parts[1], "paired delta");
  const double eps = delta * std::sqrt(static_cast<double>(n));
  std::vector<int> biases;
  if (parts.size() == 3 && !parts[2].empty() && parts[2].find_first_not_of("+-") == std::string::npos) {
    for (char c : parts[2]) biases.push_back(c == '+' ? 1 : -1);
    return AdversarialInstance::make(n, eps, biases);
  }
  Rng rng(parts.size() == 3 ? detail::parse_uint(parts[2], "paired seed") : 1);
  return sample_no_instance(n, eps, rng);
}

inline DistributionTable binary_source(const std::string& src, int n) {
  if (src == "uniform") return DistributionTable::uniform(n);
  if (src.rfind("point:", 0) == 0) {
    const BitString x = BitString::parse(src.substr(6));
    if (x.size() != n) throw std::invalid_argument("point source '" + src + "' does not have n = " + std::to_string(n) + " bits");
    return DistributionTable::point_mass(x);
  }
  if (src.rfind("product:", 0) == 0) {
    const double p = detail::parse_double(src.substr(8), "product bias");
    return DistributionTable::product(std::vector<double>(static_cast<std::size_t>(n), p));
  }
  if (src.rfind("paired:", 0) == 0) return paired_source(src, n).to_table();
  DistributionTable t = table_from_json(load_json_file(src));
  if (t.dimension() != n) {
    throw std::invalid_argument("'" + src + "' is over n = " + std::to_string(t.dimension()) + " but n = " +
                                std::to_string(n) + " was requested");
  }
  return t;
}

inline IntervalDistribution interval_source(const std::string& src, std::uint64_t size) {
  if (src == "uniform") return IntervalDistribution::uniform(size);
  if (src.rfind("uniform:", 0) == 0) {
    const auto range = detail::split(src.substr(8), '-');
    if (range.size() != 2) throw std::invalid_argument("expected uniform:<a>-<b>");
    return IntervalDistribution::uniform_on(size, detail::parse_uint(range[0], "interval start"),
                                            detail::parse_uint(range[1], "interval end"));
  }
  if (src.rfind("point:", 0) == 0) return IntervalDistribution::point_mass(size, detail::parse_uint(src.substr(6), "point"));
  IntervalDistribution d = interval_from_json(load_json_file(src));
  if (d.size() != size) throw std::invalid_argument("'" + src + "' has N = " + std::to_string(d.size()));
  return d;
}

// A file source in tuple form ("sizes" or "labels"), if it is one.
inline std::optional<TupleDistribution> tuple_source(const std::string& src) {
  if (detail::is_keyword_source(src)) return std::nullopt;
  const Json j = load_json_file(src);
  if (!j.contains("sizes") && !j.contains("labels")) return std::nullopt;
  return tuple_from_json(j);
}

// ---- repetitions -------------------------------------------------------------

/// Runs body(index, seed) for every repetition, concurrently, and returns the
/// rows ordered by index. Each repetition seeds its own world from
/// derive_seed(master, index).
template <class Body>
std::vector<RunRow> repeat_runs(const ExperimentSpec& spec, Body body) {
  const auto runs = static_cast<std::size_t>(spec.runs);
  std::vector<RunRow> rows(runs);
  unsigned workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, runs));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= runs) return;
      try {
        const std::uint64_t seed = derive_seed(spec.seed, k);
        const auto start = std::chrono::steady_clock::now();
        RunRow row = body(k, seed);
        row.experiment = spec.name();
        row.index = k;
        row.seed = seed;
        row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows[k] = std::move(row);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(runs);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

inline RunRow row_of(const Verdict& v, int n, double eps) {
  RunRow r;
  r.n = n;
  r.eps = eps;
  r.verdict = v.decision;
  r.queries = v.queries;
  r.zero_probability_abort = v.zero_probability_abort;
  return r;
}

/// Tester repetitions for the equivalence, product, interval and single-bit kinds.
inline std::vector<RunRow> tester_rows(const ExperimentSpec& spec, Json& facts) {
  const TestConfig base{spec.eps, 0, spec.execution};
  switch (spec.kind) {
    case ExperimentKind::equivalence: {
      auto tau_tuple = tuple_source(spec.tau);
      auto mu_tuple = tuple_source(spec.mu);
      if (tau_tuple || mu_tuple) {
        if (!tau_tuple || !mu_tuple) throw std::invalid_argument("tuple-form sources must be given for both tau and mu");
        auto tau = std::make_shared<const TupleDistribution>(std::move(*tau_tuple));
        auto mu = std::make_shared<const TupleDistribution>(std::move(*mu_tuple));
        facts["encoded_bits"] = tau->domain().total_bits();
        if (tau->domain().total_bits() <= kMaxDenseBits) {
          facts["tv_distance"] = tv_distance(tau->to_binary_table(), mu->to_binary_table());
        }
        return repeat_runs(spec, [&](std::uint64_t, std::uint64_t seed) {
          TupleOracle t(tau, derive_seed(seed, 1));
          TupleOracle m(mu, derive_seed(seed, 2));
          TestConfig cfg = base;
          cfg.seed = derive_seed(seed, 3);
          return row_of(equivalence_test_general(t, m, cfg), tau->domain().total_bits(), spec.eps);
        });
      }
      auto tau = std::make_shared<const DistributionTable>(binary_source(spec.tau, spec.n));
      auto mu = std::make_shared<const DistributionTable>(binary_source(spec.mu, spec.n));
      facts["tv_distance"] = tv_distance(*tau, *mu);
      return repeat_runs(spec, [&](std::uint64_t, std::uint64_t seed) {
        TableOracle t(tau, derive_seed(seed, 1));
        TableOracle m(mu, derive_seed(seed, 2));
        PrefixView<TableOracle> tv(t);
        MarginalPrefixView<TableOracle> mv(m);
        TestConfig cfg = base;
        cfg.seed = derive_seed(seed, 3);
        return row_of(equivalence_test(tv, mv, cfg), spec.n, spec.eps);
      });
    }
    case ExperimentKind::product: {
      if (auto tuple = tuple_source(spec.mu)) {
        auto mu = std::make_shared<const TupleDistribution>(std::move(*tuple));
        return repeat_runs(spec, [&](std::uint64_t, std::uint64_t seed) {
          TupleOracle m(mu, derive_seed(seed, 1));
          TestConfig cfg = base;
          cfg.seed = derive_seed(seed, 3);
          return row_of(product_test_general(m, cfg), mu->domain().total_bits(), spec.eps);
        });
      }
      if (spec.n > kMaxDenseBits) {
        if (spec.mu.rfind("paired:", 0) != 0) {
          throw std::invalid_argument("n > " + std::to_string(kMaxDenseBits) + " is only available for paired sources");
        }
        const AdversarialInstance inst = paired_source(spec.mu, spec.n);
        facts["biases"] = inst.biases;
        return repeat_runs(spec, [&](std::uint64_t, std::uint64_t seed) {
          PairedInstanceOracle m(inst, derive_seed(seed, 1));
          PrefixView<PairedInstanceOracle> view(m);
          TestConfig cfg = base;
          cfg.seed = derive_seed(seed, 3);
          return row_of(product_test(view, cfg), spec.n, spec.eps);
        });
      }
      auto mu = std::make_shared<const DistributionTable>(binary_source(spec.mu, spec.n));
      facts["tv_to_product_of_marginals"] = tv_distance(*mu, product_of_marginals(*mu));
      return repeat_runs(spec, [&](std::uint64_t, std::uint64_t seed) {
        TableOracle m(mu, derive_seed(seed, 1));
        PrefixView<TableOracle> view(m);
        TestConfig cfg = base;
        cfg.seed = derive_seed(seed, 3);
        return row_of(product_test(view, cfg), spec.n, spec.eps);
      });
    }
    case ExperimentKind::interval: {
      auto tau = std::make_shared<const IntervalDistribution>(interval_source(spec.tau, spec.domain_size));
      auto mu = std::make_shared<const IntervalDistribution>(interval_source(spec.mu, spec.domain_size));
      double tv = 0.0;
      for (std::uint64_t t = 1; t <= spec.domain_size; ++t) tv += std::fabs(tau->prob(t) - mu->prob(t));
      facts["tv_distance"] = 0.5 * tv;
      const int ell = tau->to_binary_table().dimension();
      return repeat_runs(spec, [&](std::uint64_t, std::uint64_t seed) {
        IntervalOracle t(tau, derive_seed(seed, 1));
        IntervalOracle m(mu, derive_seed(seed, 2));
        TestConfig cfg = base;
        cfg.seed = derive_seed(seed, 3);
        return row_of(interval_equivalence_test(t, m, cfg), ell, spec.eps);
      });
    }
    case ExperimentKind::single_bit: {
      facts["chi2"] = chi2(spec.p, spec.q);
      facts["samples_per_trial"] = chi2_sample_size(spec.eps);
      return repeat_runs(spec, [&](std::uint64_t, std::uint64_t seed) {
        BernoulliSampler sp(spec.p, derive_seed(seed, 1));
        BernoulliSampler sq(spec.q, derive_seed(seed, 2));
        const Chi2Outcome out = single_bit_chi2_test(sp, sq, spec.eps);
        RunRow r;
        r.n = 1;
        r.eps = spec.eps;
        r.verdict = out.accept ? Decision::accept : Decision::reject;
        r.queries[QueryClass::unconditional] = sp.draws() + sq.draws();
        return r;
      });
    }
    default:
      throw std::logic_error("not a tester experiment");
  }
}

inline Json run_summary(const std::vector<RunRow>& rows) {
  std::uint64_t accepts = 0;
  std::uint64_t aborts = 0;
  std::vector<std::uint64_t> totals;
  double wall = 0.0;
  for (const auto& r : rows) {
    accepts += r.verdict == Decision::accept ? 1 : 0;
    aborts += r.zero_probability_abort ? 1 : 0;
    totals.push_back(r.queries.total());
    wall += r.wall_seconds;
  }
  const std::uint64_t runs = rows.size();
  const auto acc = ContractCheck::of(accepts, runs);
  const auto rej = ContractCheck::of(runs - accepts, runs);
  Json j{{"runs", runs},
         {"accepts", accepts},
         {"rejects", runs - accepts},
         {"accept_rate", acc.rate},
         {"accept_rate_lower_bound", acc.lower_bound},
         {"reject_rate", rej.rate},
         {"reject_rate_lower_bound", rej.lower_bound},
         {"confidence_method", kConfidenceMethod},
         {"zero_probability_aborts", aborts},
         {"repetition_wall_seconds", wall}};
  if (!totals.empty()) {
    j["median_queries"] = median(totals);
    j["p25_queries"] = quantile(totals, 0.25);
    j["p75_queries"] = quantile(totals, 0.75);
  }
  return j;
}

/// Runs an experiment and returns its plot rows and summary. The rows depend
/// only on the spec (including its seed).
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  Json facts = Json::object();
  switch (spec.kind) {
    case ExperimentKind::equivalence:
    case ExperimentKind::product:
    case ExperimentKind::interval:
    case ExperimentKind::single_bit: {
      const auto rows = tester_rows(spec, facts);
      result.plot_kind = PlotKind::runs;
      result.rows.assign(rows.begin(), rows.end());
      result.summary = run_summary(rows);
      break;
    }
    case ExperimentKind::scaling_sweep: {
      result.plot_kind = PlotKind::scaling;
      Json points = Json::array();
      for (int n : spec.n_list) {
        for (double eps : spec.eps_list) {
          ExperimentSpec sub = spec;
          sub.kind = spec.sweep_kind;
          sub.n = n;
          sub.eps = eps;
          if (sub.kind == ExperimentKind::interval) sub.domain_size = std::uint64_t{1} << n;
          sub.id = spec.name() + "/n=" + std::to_string(n) + "/eps=" + format_number(eps);
          sub.validate();
          Json sub_facts;
          const auto rows = tester_rows(sub, sub_facts);
          std::vector<std::uint64_t> totals;
          for (const auto& r : rows) totals.push_back(r.queries.total());
          result.rows.push_back(ScalingRow{n, eps, median(totals), quantile(totals, 0.25), quantile(totals, 0.75)});
          Json point = run_summary(rows);
          point["n"] = n;
          point["eps"] = eps;
          point["full_schedule_queries"] = full_schedule_queries(equivalence_schedule(n, eps));
          points.push_back(point);
        }
      }
      result.summary = Json{{"points", points}};
      break;
    }
    case ExperimentKind::inequality_grid: {
      result.plot_kind = PlotKind::inequality;
      result.rows = inequality_suite(spec.grid_step);
      std::uint64_t violations = 0;
      for (const auto& r : result.rows) violations += std::get<InequalityRow>(r).violations;
      result.summary = Json{{"violations", violations}, {"slack_tolerance", kSlackTolerance}};
      break;
    }
    case ExperimentKind::adversarial_distance: {
      result.plot_kind = PlotKind::adversarial;
      const int pairs = spec.n / 2;
      double worst = 1.0;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs); ++mask) {
        std::vector<int> biases;
        std::string signs;
        for (int k = 0; k < pairs; ++k) {
          const bool plus = ((mask >> (pairs - 1 - k)) & 1u) == 0;
          biases.push_back(plus ? 1 : -1);
          signs += plus ? '+' : '-';
        }
        const auto inst = AdversarialInstance::make(spec.n, spec.eps, biases);
        const auto table = inst.to_table();
        const auto grid = distance_to_product_grid(table, spec.grid_step);
        worst = std::min(worst, grid.min_tv);
        result.rows.push_back(AdversarialRow{mask, spec.n, spec.eps, inst.delta, signs.empty() ? "none" : signs,
                                             tv_distance(table, product_of_marginals(table)), grid.min_tv,
                                             grid.certified_lower_bound, spec.grid_step});
      }
      result.summary = Json{{"instances", result.rows.size()}, {"min_grid_tv", worst}};
      break;
    }
  }
  result.summary["experiment"] = spec.name();
  result.summary["spec"] = to_json(spec);
  for (const auto& [k, v] : facts.items()) result.summary[k] = v;
  result.summary["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace subcube::harness
