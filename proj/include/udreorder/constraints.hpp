// constraints.hpp - ordering constraints derived from a PodTable and the
// deterministic local ordering solver.
//
// A constraint (k, i, j) states: under a parent labeled k, every item
// labeled i precedes every item labeled j. Constraints are derived where
// the distribution is confident: probability above 0.5 + margin and at
// least min_count observations of the pair.
//
// solve_order arranges one bag of labeled items to satisfy a constraint
// set. Instead of an SMT call it runs a label-level topological sort:
// Kahn's algorithm over the constraint edges restricted to the labels
// present, breaking ties toward the smallest original rank. Items with
// equal labels keep their original relative order. The result is unique
// for a fixed input, so reordering is reproducible byte for byte.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "udreorder/pod.hpp"

namespace udreorder {

struct ConstraintKey {
  std::string parent;
  std::string before;
  std::string after;

  auto operator<=>(const ConstraintKey&) const = default;
};

inline constexpr int kConstraintFormatVersion = 1;

struct ConstraintSet {
  std::string language;
  Granularity granularity = Granularity::universal;
  std::uint64_t min_count = 0;
  double margin = 0.0;
  std::set<ConstraintKey> entries;

  bool contains(std::string_view parent, std::string_view before,
                std::string_view after) const {
    return entries.count(ConstraintKey{std::string(parent), std::string(before),
                                       std::string(after)}) > 0;
  }

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

// margin widens the confidence band: p > 0.5 + margin. margin must lie in
// [0, 0.5); at 0.5 no probability qualifies and the set is vacuously empty,
// so that value is rejected as a misconfiguration. min_count filters pairs
// seen fewer than that many times in total; the defaults reproduce the
// plain p > 0.5 rule.
inline ConstraintSet derive_constraints(const PodTable& table, std::uint64_t min_count = 0,
                                        double margin = 0.0) {
  if (!(margin >= 0.0) || margin >= 0.5) {
    throw std::invalid_argument("margin must be in [0, 0.5)");
  }

  ConstraintSet out;
  out.language = table.language();
  out.granularity = table.granularity();
  out.min_count = min_count;
  out.margin = margin;

  for (const auto& [t, n] : table.counts()) {
    if (t.first == t.second) continue;
    std::uint64_t total = table.pair_total(t.parent, t.first, t.second);
    if (total < min_count) continue;
    double p = static_cast<double>(n) / static_cast<double>(total);
    if (p > 0.5 + margin) {
      out.entries.insert({t.parent, t.first, t.second});
    }
  }
  return out;
}

// All entries with the given parent label, sorted. std::set iteration is
// already ordered, so this is a range scan.
inline std::vector<ConstraintKey> relevant_constraints(const ConstraintSet& set,
                                                       std::string_view parent) {
  std::vector<ConstraintKey> out;
  auto it = set.entries.lower_bound(ConstraintKey{std::string(parent), "", ""});
  for (; it != set.entries.end() && it->parent == parent; ++it) out.push_back(*it);
  return out;
}

// The constraints that apply to one local ordering decision: entries under
// parent whose both labels occur among the present labels (which include
// the head-copy label, equal to parent).
inline std::vector<std::pair<std::string, std::string>> relevant_constraints(
    const ConstraintSet& set, std::string_view parent,
    const std::set<std::string>& present_labels) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& c : relevant_constraints(set, parent)) {
    if (present_labels.count(c.before) && present_labels.count(c.after)) {
      out.emplace_back(c.before, c.after);
    }
  }
  return out;
}

inline nlohmann::ordered_json to_json(const ConstraintSet& set) {
  nlohmann::ordered_json j;
  j["format_version"] = kConstraintFormatVersion;
  j["language"] = set.language;
  j["granularity"] = to_string(set.granularity);
  j["min_count"] = set.min_count;
  j["margin"] = set.margin;
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : set.entries) {
    entries.push_back({{"parent", e.parent}, {"before", e.before}, {"after", e.after}});
  }
  j["entries"] = std::move(entries);
  return j;
}

inline void save_constraints(const ConstraintSet& set, std::ostream& out) {
  out << to_json(set).dump(2) << '\n';
}

inline void save_constraints(const ConstraintSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  save_constraints(set, out);
}

inline ConstraintSet constraints_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw PodError(PodErrorKind::corrupt_table, "top-level value is not an object");
  }
  if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw PodError(PodErrorKind::corrupt_table, "missing format_version");
  }
  int version = j["format_version"].get<int>();
  if (version != kConstraintFormatVersion) {
    throw PodError(PodErrorKind::version_mismatch,
                   "format_version " + std::to_string(version) + ", expected " +
                       std::to_string(kConstraintFormatVersion));
  }
  if (!j.contains("language") || !j["language"].is_string() ||
      !j.contains("granularity") || !j["granularity"].is_string() ||
      !j.contains("entries") || !j["entries"].is_array()) {
    throw PodError(PodErrorKind::corrupt_table, "missing required field");
  }
  auto g = granularity_from_string(j["granularity"].get<std::string>());
  if (!g) {
    throw PodError(PodErrorKind::corrupt_table,
                   "unknown granularity '" + j["granularity"].get<std::string>() + "'");
  }

  ConstraintSet set;
  set.language = j["language"].get<std::string>();
  set.granularity = *g;
  if (j.contains("min_count") && j["min_count"].is_number_unsigned()) {
    set.min_count = j["min_count"].get<std::uint64_t>();
  }
  if (j.contains("margin") && j["margin"].is_number()) {
    set.margin = j["margin"].get<double>();
  }
  for (const auto& e : j["entries"]) {
    if (!e.is_object() || !e.contains("parent") || !e["parent"].is_string() ||
        !e.contains("before") || !e["before"].is_string() || !e.contains("after") ||
        !e["after"].is_string()) {
      throw PodError(PodErrorKind::corrupt_table, "bad constraint entry");
    }
    ConstraintKey key{e["parent"].get<std::string>(), e["before"].get<std::string>(),
                      e["after"].get<std::string>()};
    if (key.before == key.after) {
      throw PodError(PodErrorKind::corrupt_table,
                     "self-precedence entry '" + key.before + "' under '" + key.parent + "'");
    }
    if (set.entries.count({key.parent, key.after, key.before})) {
      throw PodError(PodErrorKind::corrupt_table,
                     "contradictory entries for '" + key.before + "'/'" + key.after +
                         "' under '" + key.parent + "'");
    }
    set.entries.insert(std::move(key));
  }
  return set;
}

inline ConstraintSet load_constraints(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw PodError(PodErrorKind::corrupt_table, e.what());
  }
  return constraints_from_json(j);
}

inline ConstraintSet load_constraints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return load_constraints(in);
}

// One item of a local ordering problem. rank is the item's position in the
// original surface order (0-based within the bag).
struct OrderItem {
  std::size_t rank = 0;
  std::string label;

  friend bool operator==(const OrderItem&, const OrderItem&) = default;
};

struct LocalOrderProblem {
  std::vector<OrderItem> items;
  // Constraints already filtered to this parent: (before, after) label pairs.
  std::vector<std::pair<std::string, std::string>> precedences;
};

// Emission order as indices into problem.items, or nullopt when the
// precedences are cyclic over the present labels (infeasible). Constraints
// naming a label with no item present are a caller bug and throw.
//
// Order produced: a label is ready once every constrained predecessor label
// has been fully emitted; among ready items, the one with the smallest
// original rank goes next. With no applicable constraints this reproduces
// the input order exactly.
inline std::optional<std::vector<std::size_t>> solve_order(
    const LocalOrderProblem& problem) {
  const std::size_t n = problem.items.size();

  std::map<std::string, std::vector<std::size_t>> by_label;  // ascending rank order
  {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return problem.items[a].rank < problem.items[b].rank;
    });
    for (std::size_t i : idx) by_label[problem.items[i].label].push_back(i);
  }

  // Label-level edges; self-edges make the problem infeasible outright.
  std::map<std::string, std::set<std::string>> succ;
  std::map<std::string, std::size_t> pending;  // unemitted predecessor labels
  for (const auto& l : by_label) pending[l.first] = 0;
  bool self_edge = false;
  for (const auto& [before, after] : problem.precedences) {
    auto b = by_label.find(before);
    auto a = by_label.find(after);
    if (b == by_label.end() || a == by_label.end()) {
      throw std::invalid_argument("constraint references label not present: '" +
                                  before + "' < '" + after + "'");
    }
    if (before == after) {
      self_edge = true;
      continue;
    }
    if (succ[before].insert(after).second) ++pending[after];
  }
  if (self_edge) return std::nullopt;

  std::vector<std::size_t> out;
  out.reserve(n);
  std::map<std::string, std::size_t> emitted;  // per label
  for (const auto& l : by_label) emitted[l.first] = 0;

  while (out.size() < n) {
    // Ready labels with items left, pick the one whose next item has the
    // smallest original rank.
    const std::string* pick = nullptr;
    std::size_t pick_rank = 0;
    for (const auto& [label, idxs] : by_label) {
      if (pending[label] != 0) continue;
      std::size_t e = emitted[label];
      if (e >= idxs.size()) continue;
      std::size_t r = problem.items[idxs[e]].rank;
      if (!pick || r < pick_rank) {
        pick = &label;
        pick_rank = r;
      }
    }
    if (!pick) return std::nullopt;  // remaining labels form a cycle

    auto& idxs = by_label[*pick];
    std::size_t e = emitted[*pick]++;
    out.push_back(idxs[e]);
    if (e + 1 == idxs.size()) {
      for (const auto& nxt : succ[*pick]) --pending[nxt];
    }
  }
  return out;
}

}  // namespace udreorder
