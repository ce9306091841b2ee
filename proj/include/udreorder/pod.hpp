// pod.hpp - pairwise ordering distributions over dependency labels.
//
// For a parent with deprel label k, every ordered pair of its children
// (i before j in the surface string) increments count(k, label_i, label_j).
// The parent itself participates as one of the items, at its own surface
// position and carrying its own label, so head-direction preferences land
// in the same table. probability(k,i,j) = count(k,i,j) / (count(k,i,j) +
// count(k,j,i)).

#pragma once

#include <compare>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "udreorder/conllu.hpp"

namespace udreorder {

enum class Granularity { universal, subtyped };

inline const char* to_string(Granularity g) {
  return g == Granularity::universal ? "universal" : "subtyped";
}

inline std::optional<Granularity> granularity_from_string(std::string_view s) {
  if (s == "universal") return Granularity::universal;
  if (s == "subtyped") return Granularity::subtyped;
  return std::nullopt;
}

// Universal granularity strips the subtype: "obl:tmod" -> "obl".
inline std::string normalize_label(std::string_view deprel, Granularity g) {
  if (g == Granularity::universal) {
    std::size_t colon = deprel.find(':');
    if (colon != std::string_view::npos) return std::string(deprel.substr(0, colon));
  }
  return std::string(deprel);
}

enum class PodErrorKind {
  granularity_mismatch,
  language_mismatch,
  version_mismatch,
  corrupt_table,
};

inline const char* to_string(PodErrorKind k) {
  switch (k) {
    case PodErrorKind::granularity_mismatch: return "GranularityMismatch";
    case PodErrorKind::language_mismatch: return "LanguageMismatch";
    case PodErrorKind::version_mismatch: return "VersionMismatch";
    case PodErrorKind::corrupt_table: return "CorruptTable";
  }
  return "?";
}

class PodError : public std::runtime_error {
 public:
  PodError(PodErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  PodErrorKind kind() const noexcept { return kind_; }

 private:
  PodErrorKind kind_;
};

// (parent label, first label, second label), ordered lexicographically so
// table iteration and serialization are deterministic.
struct LabelTriple {
  std::string parent;
  std::string first;
  std::string second;

  auto operator<=>(const LabelTriple&) const = default;
};

// treebank is a '+'-joined, sorted list of source treebank names, so merged
// tables read naturally ("English-EWT+English-GUM").
struct Provenance {
  std::string treebank;
  std::uint64_t sentences = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

namespace detail {

inline std::vector<std::string> split_names(std::string_view joined) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= joined.size()) {
    std::size_t plus = joined.find('+', start);
    if (plus == std::string_view::npos) plus = joined.size();
    if (plus > start) out.emplace_back(joined.substr(start, plus - start));
    start = plus + 1;
  }
  return out;
}

inline std::string join_names(const std::set<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += '+';
    out += n;
  }
  return out;
}

}  // namespace detail

inline constexpr int kPodFormatVersion = 1;

class PodTable {
 public:
  PodTable() = default;
  PodTable(std::string language, Granularity granularity)
      : language_(std::move(language)), granularity_(granularity) {}

  const std::string& language() const noexcept { return language_; }
  Granularity granularity() const noexcept { return granularity_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  Provenance& provenance() noexcept { return provenance_; }
  const std::map<LabelTriple, std::uint64_t>& counts() const noexcept { return counts_; }

  void add(const LabelTriple& triple, std::uint64_t n = 1) {
    if (n == 0) return;
    counts_[triple] += n;
  }

  std::uint64_t count(std::string_view parent, std::string_view first,
                      std::string_view second) const {
    auto it = counts_.find(
        LabelTriple{std::string(parent), std::string(first), std::string(second)});
    return it == counts_.end() ? 0 : it->second;
  }

  // count(k,i,j) + count(k,j,i): how often the pair cooccurred at all.
  std::uint64_t pair_total(std::string_view parent, std::string_view i,
                           std::string_view j) const {
    return count(parent, i, j) + count(parent, j, i);
  }

  // P(i before j | parent k). Identical labels are exchangeable, so 0.5 by
  // definition. Unseen pairs have no distribution: nullopt.
  std::optional<double> probability(std::string_view parent, std::string_view i,
                                    std::string_view j) const {
    if (i == j) return 0.5;
    std::uint64_t a = count(parent, i, j);
    std::uint64_t b = count(parent, j, i);
    if (a + b == 0) return std::nullopt;
    return static_cast<double>(a) / static_cast<double>(a + b);
  }

  std::set<std::string> parent_labels() const {
    std::set<std::string> out;
    for (const auto& [t, n] : counts_) out.insert(t.parent);
    return out;
  }

  friend bool operator==(const PodTable&, const PodTable&) = default;

 private:
  std::string language_;
  Granularity granularity_ = Granularity::universal;
  Provenance provenance_;
  std::map<LabelTriple, std::uint64_t> counts_;
};

namespace detail {

// (surface position, normalized label) for one local ordering decision.
struct Participant {
  int pos;
  std::string label;
};

inline void count_sentence(const DepTree& tree, Granularity g, PodTable& table) {
  const int n = tree.size();
  for (int head = 1; head <= n; ++head) {
    const auto& kids = tree.children[static_cast<std::size_t>(head)];
    if (kids.empty()) continue;

    std::string parent_label = normalize_label(tree.token(head).deprel, g);

    std::vector<Participant> items;
    items.reserve(kids.size() + 1);
    for (int c : kids) items.push_back({c, normalize_label(tree.token(c).deprel, g)});
    items.push_back({head, parent_label});
    std::sort(items.begin(), items.end(),
              [](const Participant& a, const Participant& b) { return a.pos < b.pos; });

    for (std::size_t a = 0; a < items.size(); ++a) {
      for (std::size_t b = a + 1; b < items.size(); ++b) {
        table.add({parent_label, items[a].label, items[b].label});
      }
    }
  }
}

}  // namespace detail

// Incremental estimation over a stream of sentences.
class PodAccumulator {
 public:
  PodAccumulator(std::string language, Granularity granularity)
      : table_(std::move(language), granularity) {}

  // Sentences that fail tree validation are counted and skipped.
  void add_sentence(const Sentence& s) {
    try {
      DepTree tree = build_tree(s);
      detail::count_sentence(tree, table_.granularity(), table_);
      ++table_.provenance().sentences;
    } catch (const ConlluError&) {
      ++skipped_;
      throw;
    }
  }

  bool try_add_sentence(const Sentence& s) {
    try {
      add_sentence(s);
      return true;
    } catch (const ConlluError&) {
      return false;
    }
  }

  void add_treebank_name(const std::string& name) {
    if (name.empty()) return;
    std::set<std::string> names;
    for (auto& n : detail::split_names(table_.provenance().treebank)) {
      names.insert(std::move(n));
    }
    names.insert(name);
    table_.provenance().treebank = detail::join_names(names);
  }

  std::size_t skipped() const noexcept { return skipped_; }
  const PodTable& table() const noexcept { return table_; }
  PodTable take() { return std::move(table_); }

 private:
  PodTable table_;
  std::size_t skipped_ = 0;
};

inline PodTable estimate_pods(const std::vector<Sentence>& sentences,
                              const std::string& language, Granularity granularity,
                              const std::string& treebank_name = "") {
  PodAccumulator acc(language, granularity);
  if (!treebank_name.empty()) acc.add_treebank_name(treebank_name);
  for (const auto& s : sentences) acc.add_sentence(s);
  return acc.take();
}

// Sums two tables estimated with the same language and granularity.
// Commutative and associative; provenance merges as sorted set union of
// treebank names and summed sentence counts.
inline PodTable merge(const PodTable& a, const PodTable& b) {
  if (a.granularity() != b.granularity()) {
    throw PodError(PodErrorKind::granularity_mismatch,
                   std::string(to_string(a.granularity())) + " vs " +
                       to_string(b.granularity()));
  }
  if (a.language() != b.language()) {
    throw PodError(PodErrorKind::language_mismatch,
                   "'" + a.language() + "' vs '" + b.language() + "'");
  }
  PodTable out(a.language(), a.granularity());
  for (const auto& [t, n] : a.counts()) out.add(t, n);
  for (const auto& [t, n] : b.counts()) out.add(t, n);

  std::set<std::string> names;
  for (auto& n : detail::split_names(a.provenance().treebank)) names.insert(std::move(n));
  for (auto& n : detail::split_names(b.provenance().treebank)) names.insert(std::move(n));
  out.provenance().treebank = detail::join_names(names);
  out.provenance().sentences = a.provenance().sentences + b.provenance().sentences;
  return out;
}

inline nlohmann::ordered_json to_json(const PodTable& table) {
  nlohmann::ordered_json j;
  j["format_version"] = kPodFormatVersion;
  j["language"] = table.language();
  j["granularity"] = to_string(table.granularity());
  j["provenance"] = {{"treebank", table.provenance().treebank},
                     {"sentences", table.provenance().sentences}};
  auto triples = nlohmann::ordered_json::array();
  for (const auto& [t, n] : table.counts()) {
    triples.push_back({{"parent", t.parent},
                       {"first", t.first},
                       {"second", t.second},
                       {"count", n}});
  }
  j["triples"] = std::move(triples);
  return j;
}

inline void save_pods(const PodTable& table, std::ostream& out) {
  out << to_json(table).dump(2) << '\n';
}

inline void save_pods(const PodTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  save_pods(table, out);
}

inline PodTable pods_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw PodError(PodErrorKind::corrupt_table, "top-level value is not an object");
  }
  if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw PodError(PodErrorKind::corrupt_table, "missing format_version");
  }
  int version = j["format_version"].get<int>();
  if (version != kPodFormatVersion) {
    throw PodError(PodErrorKind::version_mismatch,
                   "format_version " + std::to_string(version) + ", expected " +
                       std::to_string(kPodFormatVersion));
  }
  if (!j.contains("language") || !j["language"].is_string() ||
      !j.contains("granularity") || !j["granularity"].is_string() ||
      !j.contains("triples") || !j["triples"].is_array()) {
    throw PodError(PodErrorKind::corrupt_table, "missing required field");
  }
  auto g = granularity_from_string(j["granularity"].get<std::string>());
  if (!g) {
    throw PodError(PodErrorKind::corrupt_table,
                   "unknown granularity '" + j["granularity"].get<std::string>() + "'");
  }

  PodTable table(j["language"].get<std::string>(), *g);
  if (j.contains("provenance") && j["provenance"].is_object()) {
    const auto& p = j["provenance"];
    if (p.contains("treebank") && p["treebank"].is_string()) {
      std::set<std::string> names;
      for (auto& n : detail::split_names(p["treebank"].get<std::string>())) {
        names.insert(std::move(n));
      }
      table.provenance().treebank = detail::join_names(names);
    }
    if (p.contains("sentences") && p["sentences"].is_number_unsigned()) {
      table.provenance().sentences = p["sentences"].get<std::uint64_t>();
    }
  }

  for (const auto& e : j["triples"]) {
    if (!e.is_object() || !e.contains("parent") || !e["parent"].is_string() ||
        !e.contains("first") || !e["first"].is_string() || !e.contains("second") ||
        !e["second"].is_string() || !e.contains("count") ||
        !e["count"].is_number_unsigned()) {
      throw PodError(PodErrorKind::corrupt_table, "bad triple entry");
    }
    std::uint64_t n = e["count"].get<std::uint64_t>();
    if (n == 0) {
      throw PodError(PodErrorKind::corrupt_table, "zero-count triple");
    }
    table.add({e["parent"].get<std::string>(), e["first"].get<std::string>(),
               e["second"].get<std::string>()},
              n);
  }
  return table;
}

inline PodTable load_pods(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw PodError(PodErrorKind::corrupt_table, e.what());
  }
  return pods_from_json(j);
}

inline PodTable load_pods(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return load_pods(in);
}

struct PairDivergence {
  std::string parent;
  std::string first;   // canonical order: first < second
  std::string second;
  double prob_a = 0.0;
  double prob_b = 0.0;
  std::uint64_t weight = 0;  // pair_total in a + pair_total in b
};

// Weighted mean |P_a - P_b| over unordered label pairs observed in both
// tables (same-label pairs are constant and excluded). nullopt when the
// tables share no pair.
inline std::optional<double> pod_distance_breakdown(const PodTable& a, const PodTable& b,
                                                    std::vector<PairDivergence>* out) {
  if (a.granularity() != b.granularity()) {
    throw PodError(PodErrorKind::granularity_mismatch,
                   std::string(to_string(a.granularity())) + " vs " +
                       to_string(b.granularity()));
  }
  std::set<std::tuple<std::string, std::string, std::string>> pairs;
  for (const auto& [t, n] : a.counts()) {
    if (t.first == t.second) continue;
    auto [lo, hi] = std::minmax(t.first, t.second);
    pairs.insert({t.parent, lo, hi});
  }

  long double num = 0.0;
  std::uint64_t denom = 0;
  for (const auto& [parent, lo, hi] : pairs) {
    auto pa = a.probability(parent, lo, hi);
    auto pb = b.probability(parent, lo, hi);
    if (!pa || !pb) continue;
    std::uint64_t w = a.pair_total(parent, lo, hi) + b.pair_total(parent, lo, hi);
    num += static_cast<long double>(w) *
           std::abs(static_cast<double>(*pa) - static_cast<double>(*pb));
    denom += w;
    if (out) out->push_back({parent, lo, hi, *pa, *pb, w});
  }
  if (denom == 0) return std::nullopt;
  return static_cast<double>(num / static_cast<long double>(denom));
}

inline std::optional<double> pod_distance(const PodTable& a, const PodTable& b) {
  return pod_distance_breakdown(a, b, nullptr);
}

}  // namespace udreorder
