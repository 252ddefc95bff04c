#pragma once

// JSON forms (nlohmann/json):
//   table:    {"n": 2, "probs": [p00, p01, p10, p11]}   lexicographic, coordinate 1 = MSB
//   tree:     {"n": 2, "tree": {"1:": p, "2:0": p, "2:1": p}}   key "i:w", w of length i-1
//   interval: {"N": 5, "probs": [p1, ..., p5]}
//   tuple:    {"sizes": [3, 3], "labels": [["a","b","c"], ...], "probs": [...]}   labels optional
//   instance: {"n": 4, "eps": 0.2, "biases": [1, -1]}

#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "subcube/adversarial.hpp"
#include "subcube/conditional_tree.hpp"
#include "subcube/distribution.hpp"
#include "subcube/interval.hpp"
#include "subcube/tuple.hpp"

namespace subcube {

using Json = nlohmann::json;

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

inline Json to_json(const DistributionTable& t) {
  return Json{{"n", t.dimension()}, {"probs", std::vector<double>(t.probs().begin(), t.probs().end())}};
}

inline Json to_json(const ConditionalTree& tree) {
  Json cond = Json::object();
  for (int i = 1; i <= tree.dimension(); ++i) {
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << (i - 1)); ++v) {
      const BitString w(v, i - 1);
      if (auto p = tree.get(i, w)) cond[std::to_string(i) + ":" + w.to_string()] = *p;
    }
  }
  return Json{{"n", tree.dimension()}, {"tree", cond}};
}

inline ConditionalTree tree_from_json(const Json& j) {
  const Json& cond = j.at("tree");
  if (!cond.is_object()) throw std::invalid_argument("\"tree\" must be an object of \"i:w\" keys");
  int n = j.contains("n") ? j.at("n").get<int>() : 0;
  if (!j.contains("n")) {
    for (const auto& [key, value] : cond.items()) n = std::max(n, std::stoi(key.substr(0, key.find(':'))));
  }
  ConditionalTree tree(n);
  for (const auto& [key, value] : cond.items()) {
    const auto colon = key.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("tree key '" + key + "' is not of the form i:w");
    tree.set(std::stoi(key.substr(0, colon)), BitString::parse(key.substr(colon + 1)), value.get<double>());
  }
  return tree;
}

/// Accepts either the table form or the tree form.
inline DistributionTable table_from_json(const Json& j) {
  if (j.contains("tree")) return tree_from_json(j).to_table();
  if (!j.contains("probs")) throw std::invalid_argument("distribution JSON needs \"probs\" or \"tree\"");
  const auto probs = j.at("probs").get<std::vector<double>>();
  int n = 0;
  while ((std::size_t{1} << n) < probs.size()) ++n;
  if (j.contains("n") && j.at("n").get<int>() != n) {
    throw std::invalid_argument("\"n\" = " + std::to_string(j.at("n").get<int>()) + " but \"probs\" has " +
                                std::to_string(probs.size()) + " entries");
  }
  return DistributionTable(n, probs);
}

inline Json to_json(const IntervalDistribution& d) {
  return Json{{"N", d.size()}, {"probs", std::vector<double>(d.probs().begin(), d.probs().end())}};
}

inline IntervalDistribution interval_from_json(const Json& j) {
  const auto probs = j.at("probs").get<std::vector<double>>();
  if (j.contains("N") && j.at("N").get<std::size_t>() != probs.size()) {
    throw std::invalid_argument("\"N\" does not match the length of \"probs\"");
  }
  return IntervalDistribution(probs);
}

inline TupleDistribution tuple_from_json(const Json& j) {
  std::vector<std::vector<std::string>> labels;
  std::vector<std::size_t> sizes;
  if (j.contains("labels")) {
    labels = j.at("labels").get<std::vector<std::vector<std::string>>>();
    for (const auto& l : labels) sizes.push_back(l.size());
  }
  if (j.contains("sizes")) {
    const auto given = j.at("sizes").get<std::vector<std::size_t>>();
    if (!labels.empty() && given != sizes) throw std::invalid_argument("\"sizes\" disagrees with \"labels\"");
    sizes = given;
  }
  return TupleDistribution(TupleDomain(sizes, labels), j.at("probs").get<std::vector<double>>());
}

inline Json to_json(const AdversarialInstance& inst) {
  return Json{{"n", inst.n}, {"eps", inst.eps}, {"biases", inst.biases}};
}

inline AdversarialInstance instance_from_json(const Json& j) {
  return AdversarialInstance::make(j.at("n").get<int>(), j.at("eps").get<double>(), j.at("biases").get<std::vector<int>>());
}

}  // namespace subcube
