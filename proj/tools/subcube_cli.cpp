// Command-line experiment runner. Each subcommand writes <kind>.csv and
// summary.json into the output directory.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "subcube/harness/experiment.hpp"

namespace fs = std::filesystem;
using subcube::harness::ExperimentKind;
using subcube::harness::ExperimentSpec;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string execution;
  std::string sweep_kind;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("SUBCUBE_OUT_DIR"); env && *env) return env;
  return "subcube_out";
}

// Loads --config first, then replays every flag the user actually typed so
// that explicit flags win over the file.
void resolve(CLI::App& sub, ExperimentSpec& spec, const ExperimentSpec& typed, const Flags& flags) {
  ExperimentSpec merged = spec;
  if (!flags.config.empty()) subcube::harness::apply_config(merged, subcube::load_json_file(flags.config));
  auto given = [&](const char* name) {
    const CLI::Option* opt = sub.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--id")) merged.id = typed.id;
  if (given("--n")) merged.n = typed.n;
  if (given("--eps")) merged.eps = typed.eps;
  if (given("--N")) merged.domain_size = typed.domain_size;
  if (given("--runs")) merged.runs = typed.runs;
  if (given("--seed")) merged.seed = typed.seed;
  if (given("--tau")) merged.tau = typed.tau;
  if (given("--mu")) merged.mu = typed.mu;
  if (given("--p")) merged.p = typed.p;
  if (given("--q")) merged.q = typed.q;
  if (given("--grid-step")) merged.grid_step = typed.grid_step;
  if (given("--threads")) merged.threads = typed.threads;
  if (given("--n-list")) merged.n_list = typed.n_list;
  if (given("--eps-list")) merged.eps_list = typed.eps_list;
  if (given("--execution")) merged.execution = subcube::harness::parse_execution(flags.execution);
  if (given("--kind")) merged.sweep_kind = subcube::harness::parse_experiment_kind(flags.sweep_kind);
  merged.kind = spec.kind;
  spec = merged;
}

int run(const ExperimentSpec& spec, const std::string& out) {
  const auto result = subcube::harness::run_experiment(spec);
  const fs::path dir = out.empty() ? fs::path(default_out_dir()) : fs::path(out);
  const fs::path csv = subcube::harness::emit_plot_data(result.plot_kind, result.rows, dir);
  subcube::save_json_file(dir / "summary.json", result.summary);
  std::cout << spec.name() << ": wrote " << csv.string() << " and " << (dir / "summary.json").string() << "\n";
  const auto& s = result.summary;
  if (s.contains("accept_rate")) {
    std::cout << "  runs " << s["runs"] << ", accept rate " << s["accept_rate"] << " (99% lower bound "
              << s["accept_rate_lower_bound"] << "), reject rate " << s["reject_rate"] << " (99% lower bound "
              << s["reject_rate_lower_bound"] << "), median queries " << s["median_queries"] << "\n";
  }
  if (s.contains("violations")) std::cout << "  violations " << s["violations"] << "\n";
  if (s.contains("min_grid_tv")) std::cout << "  min grid tv " << s["min_grid_tv"] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional-sampling distribution testers: experiment runner"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    ExperimentKind kind;
  };
  const Command commands[] = {
      {"test-equivalence", "equivalence tester on tau vs mu", ExperimentKind::equivalence},
      {"test-product", "product tester on mu", ExperimentKind::product},
      {"test-interval", "equivalence tester over an interval oracle on [N]", ExperimentKind::interval},
      {"test-single-bit", "single-bit chi-square test on Ber(p) vs Ber(q)", ExperimentKind::single_bit},
      {"check-inequalities", "divergence inequality grids", ExperimentKind::inequality_grid},
      {"adversarial-distance", "grid distance of paired instances to product distributions",
       ExperimentKind::adversarial_distance},
      {"sweep", "median query counts over an (n, eps) grid", ExperimentKind::scaling_sweep},
  };

  ExperimentSpec spec;
  ExperimentSpec typed;
  Flags flags;
  std::vector<std::pair<CLI::App*, ExperimentKind>> subs;

  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    subs.emplace_back(sub, c.kind);
    sub->add_option("--config", flags.config, "JSON file with the same keys as the flags")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory (default: $SUBCUBE_OUT_DIR or ./subcube_out)");
    sub->add_option("--id", typed.id, "experiment id written to the CSV");
    sub->add_option("--runs", typed.runs, "repetitions")->check(CLI::PositiveNumber);
    sub->add_option("--seed", typed.seed, "master seed");
    sub->add_option("--threads", typed.threads, "worker threads (0 = all cores)");
    switch (c.kind) {
      case ExperimentKind::equivalence:
        sub->add_option("--tau", typed.tau, "source for tau");
        sub->add_option("--mu", typed.mu, "source for mu");
        [[fallthrough]];
      case ExperimentKind::product:
        if (c.kind == ExperimentKind::product) sub->add_option("--mu", typed.mu, "source for mu");
        sub->add_option("--n", typed.n, "dimension");
        sub->add_option("--eps", typed.eps, "proximity parameter");
        sub->add_option("--execution", flags.execution, "exact-law or sampled");
        break;
      case ExperimentKind::interval:
        sub->add_option("--N", typed.domain_size, "domain size");
        sub->add_option("--tau", typed.tau, "interval source for tau");
        sub->add_option("--mu", typed.mu, "interval source for mu");
        sub->add_option("--eps", typed.eps, "proximity parameter");
        sub->add_option("--execution", flags.execution, "exact-law or sampled");
        break;
      case ExperimentKind::single_bit:
        sub->add_option("--p", typed.p, "bias of the first coin");
        sub->add_option("--q", typed.q, "bias of the second coin");
        sub->add_option("--eps", typed.eps, "chi-square threshold");
        break;
      case ExperimentKind::inequality_grid:
        sub->add_option("--grid-step", typed.grid_step, "grid spacing for the chi-square checks");
        break;
      case ExperimentKind::adversarial_distance:
        sub->add_option("--n", typed.n, "dimension (at most 4)");
        sub->add_option("--eps", typed.eps, "distance parameter; delta = eps / sqrt(n)");
        sub->add_option("--grid-step", typed.grid_step, "product grid spacing");
        break;
      case ExperimentKind::scaling_sweep:
        sub->add_option("--kind", flags.sweep_kind, "equivalence, product or interval");
        sub->add_option("--n-list", typed.n_list, "dimensions")->delimiter(',');
        sub->add_option("--eps-list", typed.eps_list, "proximity parameters")->delimiter(',');
        sub->add_option("--tau", typed.tau, "source for tau");
        sub->add_option("--mu", typed.mu, "source for mu");
        sub->add_option("--execution", flags.execution, "exact-law or sampled");
        break;
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [sub, kind] : subs) {
      if (!sub->parsed()) continue;
      spec.kind = kind;
      resolve(*sub, spec, typed, flags);
      return run(spec, flags.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
