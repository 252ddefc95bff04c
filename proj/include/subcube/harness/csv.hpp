#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "subcube/equivalence.hpp"
#include "subcube/query.hpp"

namespace subcube::harness {

enum class PlotKind { runs, scaling, inequality, adversarial };

inline std::string_view to_string(PlotKind k) {
  switch (k) {
    case PlotKind::runs:
      return "runs";
    case PlotKind::scaling:
      return "scaling";
    case PlotKind::inequality:
      return "inequality";
    case PlotKind::adversarial:
      return "adversarial";
  }
  return "?";
}

/// One tester repetition.
struct RunRow {
  std::string experiment;
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  int n = 0;
  double eps = 0.0;
  Decision verdict = Decision::accept;
  QueryCounts queries;
  bool zero_probability_abort = false;
  double wall_seconds = 0.0;  // not written to CSV (keeps replays byte-identical)
};

struct ScalingRow {
  int n = 0;
  double eps = 0.0;
  double median_queries = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
};

struct InequalityRow {
  std::string check;
  std::uint64_t points = 0;
  std::uint64_t violations = 0;
  double min_slack = 0.0;
};

struct AdversarialRow {
  std::uint64_t instance = 0;
  int n = 0;
  double eps = 0.0;
  double delta = 0.0;
  std::string biases;  // e.g. "+-"
  double tv_to_marginals = 0.0;
  double grid_min_tv = 0.0;
  double certified_lower_bound = 0.0;
  double grid_step = 0.0;
};

using PlotRow = std::variant<RunRow, ScalingRow, InequalityRow, AdversarialRow>;

inline PlotKind kind_of(const PlotRow& row) { return static_cast<PlotKind>(row.index()); }

/// Shortest decimal form that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_header(PlotKind kind) {
  switch (kind) {
    case PlotKind::runs:
      return "experiment,index,seed,n,eps,verdict,queries_total,queries_unconditional,queries_prefix,"
             "queries_subcube,queries_marginal,queries_interval";
    case PlotKind::scaling:
      return "n,eps,median_queries,p25,p75";
    case PlotKind::inequality:
      return "check,points,violations,min_slack";
    case PlotKind::adversarial:
      return "instance,n,eps,delta,biases,tv_to_marginals,grid_min_tv,certified_lower_bound,grid_step";
  }
  return {};
}

inline std::string csv_line(const PlotRow& row) {
  std::ostringstream out;
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, RunRow>) {
          out << r.experiment << ',' << r.index << ',' << r.seed << ',' << r.n << ',' << format_number(r.eps) << ','
              << to_string(r.verdict) << ',' << r.queries.total();
          for (QueryClass c : kQueryClasses) out << ',' << r.queries[c];
        } else if constexpr (std::is_same_v<R, ScalingRow>) {
          out << r.n << ',' << format_number(r.eps) << ',' << format_number(r.median_queries) << ','
              << format_number(r.p25) << ',' << format_number(r.p75);
        } else if constexpr (std::is_same_v<R, InequalityRow>) {
          out << r.check << ',' << r.points << ',' << r.violations << ',' << format_number(r.min_slack);
        } else {
          out << r.instance << ',' << r.n << ',' << format_number(r.eps) << ',' << format_number(r.delta) << ','
              << r.biases << ',' << format_number(r.tv_to_marginals) << ',' << format_number(r.grid_min_tv) << ','
              << format_number(r.certified_lower_bound) << ',' << format_number(r.grid_step);
        }
      },
      row);
  return out.str();
}

/// CSV text for rows of one kind; throws if any row has another kind.
inline std::string render_csv(PlotKind kind, const std::vector<PlotRow>& rows) {
  std::string text = csv_header(kind) + '\n';
  for (const auto& row : rows) {
    if (kind_of(row) != kind) {
      throw std::invalid_argument("cannot write a " + std::string(to_string(kind_of(row))) + " row into " +
                                  std::string(to_string(kind)) + ".csv");
    }
    text += csv_line(row) + '\n';
  }
  return text;
}

/// Writes <dir>/<kind>.csv and returns its path.
inline std::filesystem::path emit_plot_data(PlotKind kind, const std::vector<PlotRow>& rows,
                                            const std::filesystem::path& dir) {
  const std::string text = render_csv(kind, rows);
  std::filesystem::create_directories(dir);
  const auto path = dir / (std::string(to_string(kind)) + ".csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
  return path;
}

}  // namespace subcube::harness
