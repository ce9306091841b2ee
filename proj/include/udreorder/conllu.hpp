// conllu.hpp - CoNLL-U reading/writing and dependency tree construction.
//
// Implements the UD v2 surface format: 10 tab-separated columns, '#'
// comment lines, multiword-token ranges ("3-4"), empty nodes ("5.1"),
// blank-line sentence separators. Fields are kept verbatim; '_' is an
// ordinary string here, not null.

#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace udreorder {

enum class ConlluErrorKind {
  malformed_row,
  non_contiguous_ids,
  head_out_of_range,
  multiple_roots,
  no_root,
  head_cycle,
  unknown_node,
};

inline const char* to_string(ConlluErrorKind k) {
  switch (k) {
    case ConlluErrorKind::malformed_row: return "MalformedRow";
    case ConlluErrorKind::non_contiguous_ids: return "NonContiguousIds";
    case ConlluErrorKind::head_out_of_range: return "HeadOutOfRange";
    case ConlluErrorKind::multiple_roots: return "MultipleRoots";
    case ConlluErrorKind::no_root: return "NoRoot";
    case ConlluErrorKind::head_cycle: return "HeadCycle";
    case ConlluErrorKind::unknown_node: return "UnknownNode";
  }
  return "?";
}

class ConlluError : public std::runtime_error {
 public:
  ConlluError(ConlluErrorKind kind, const std::string& message, std::size_t line = 0)
      : std::runtime_error(format(kind, message, line)), kind_(kind), line_(line) {}

  ConlluErrorKind kind() const noexcept { return kind_; }
  // 1-based input line the error is tied to; 0 when not tied to input text.
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(ConlluErrorKind kind, const std::string& message,
                            std::size_t line) {
    std::string s = to_string(kind);
    s += ": ";
    s += message;
    if (line != 0) {
      s += " (line ";
      s += std::to_string(line);
      s += ")";
    }
    return s;
  }

  ConlluErrorKind kind_;
  std::size_t line_;
};

// One token row. `id` is the 1-based surface position, `head` is 0 for the
// sentence root. All other columns are opaque strings carried verbatim.
struct Token {
  int id = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::string feats;
  int head = 0;
  std::string deprel;
  std::string deps;
  std::string misc;

  friend bool operator==(const Token&, const Token&) = default;
};

// Multiword-token range line ("start-end"). Only FORM and MISC may carry
// content on such lines; the rest is '_' and is regenerated on output.
struct MwtRange {
  int start = 0;
  int end = 0;
  std::string form;
  std::string misc;

  friend bool operator==(const MwtRange&, const MwtRange&) = default;
};

// Empty node ("i.j" id), kept as the verbatim line. `anchor` is the integer
// part i; the line is re-emitted directly after token i (0 = before token 1).
struct EmptyNode {
  int anchor = 0;
  std::string line;

  friend bool operator==(const EmptyNode&, const EmptyNode&) = default;
};

struct Sentence {
  std::vector<std::string> comments;  // verbatim, including the leading '#'
  std::vector<Token> tokens;
  std::vector<MwtRange> mwt_ranges;   // ordered by start id
  std::vector<EmptyNode> empty_nodes; // ordered by anchor

  int size() const { return static_cast<int>(tokens.size()); }

  const Token& token(int id) const { return tokens[static_cast<std::size_t>(id) - 1]; }
  Token& token(int id) { return tokens[static_cast<std::size_t>(id) - 1]; }

  // Value of a "# key = value" comment, or nullopt if no such comment.
  std::optional<std::string> comment_value(std::string_view key) const {
    for (const auto& c : comments) {
      if (auto v = parse_comment(c, key)) return v;
    }
    return std::nullopt;
  }

  // Replaces the first "# key = ..." comment or, if none exists, leaves the
  // comment list untouched and returns false.
  bool replace_comment(std::string_view key, std::string_view value) {
    for (auto& c : comments) {
      if (parse_comment(c, key)) {
        c = "# ";
        c += key;
        c += " = ";
        c += value;
        return true;
      }
    }
    return false;
  }

  std::string sent_id() const { return comment_value("sent_id").value_or(""); }

  // Surface forms joined by single spaces.
  std::string text() const {
    std::string out;
    for (const auto& t : tokens) {
      if (!out.empty()) out += ' ';
      out += t.form;
    }
    return out;
  }

  friend bool operator==(const Sentence&, const Sentence&) = default;

 private:
  static std::optional<std::string> parse_comment(std::string_view comment,
                                                  std::string_view key) {
    std::string_view s = comment;
    if (s.empty() || s[0] != '#') return std::nullopt;
    s.remove_prefix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    if (s.substr(0, key.size()) != key) return std::nullopt;
    s.remove_prefix(key.size());
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    if (s.empty() || s.front() != '=') return std::nullopt;
    s.remove_prefix(1);
    if (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return std::string(s);
  }
};

namespace detail {

// Strict non-negative integer parse; rejects empty, signs, leading junk.
inline bool parse_uint(std::string_view s, int& out) {
  if (s.empty() || s.size() > 9) return false;
  long v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = static_cast<int>(v);
  return true;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace detail

struct ParsePolicy {
  // Lenient mode skips sentences that fail validation and counts them
  // instead of throwing. Strict mode (default) throws ConlluError.
  bool lenient = false;
};

// Streaming reader: one Sentence per blank-line-delimited block. Sentences
// are independent values; callers may process them in parallel.
class ConlluReader {
 public:
  explicit ConlluReader(std::istream& in, ParsePolicy policy = {})
      : in_(&in), policy_(policy) {}

  // Next sentence, or nullopt at end of input. Throws ConlluError on
  // malformed input in strict mode; skips and records the error otherwise.
  std::optional<Sentence> next() {
    while (true) {
      bool saw_content = false;
      try {
        auto s = read_block(saw_content);
        if (s) ++sentences_read_;
        return s;
      } catch (const ConlluError& e) {
        if (!policy_.lenient) throw;
        ++error_count_;
        if (error_messages_.size() < kMaxMessages) error_messages_.emplace_back(e.what());
        // Row-level errors leave the stream mid-block; block-level errors
        // surface after the separator was already consumed.
        if (!block_terminated_) skip_to_blank_line();
      }
    }
  }

  std::size_t sentences_read() const noexcept { return sentences_read_; }
  std::size_t error_count() const noexcept { return error_count_; }
  // First kMaxMessages error messages, for run reports.
  const std::vector<std::string>& error_messages() const noexcept { return error_messages_; }

  static constexpr std::size_t kMaxMessages = 20;

 private:
  bool get_line(std::string& line) {
    if (!std::getline(*in_, line)) return false;
    ++line_no_;
    return true;
  }

  void skip_to_blank_line() {
    std::string line;
    while (get_line(line)) {
      if (line.empty()) return;
    }
  }

  // Reads one sentence block; throws on validation failure.
  std::optional<Sentence> read_block(bool& saw_content) {
    Sentence s;
    std::vector<std::size_t> token_lines;  // input line per token, for head checks
    std::size_t mwt_line = 0;
    std::size_t first_line = 0;
    std::string line;
    saw_content = false;
    block_terminated_ = false;

    while (true) {
      if (!get_line(line)) {
        block_terminated_ = true;  // EOF ends the block
        break;
      }
      if (line.empty()) {
        if (!saw_content) continue;  // separator runs before the block
        block_terminated_ = true;
        break;
      }
      saw_content = true;
      if (first_line == 0) first_line = line_no_;

      if (line[0] == '#') {
        s.comments.push_back(line);
        continue;
      }
      parse_row(line, s, token_lines, mwt_line);
    }

    if (!saw_content) return std::nullopt;  // clean EOF
    finish_block(s, token_lines, mwt_line, first_line);
    return s;
  }

  void parse_row(const std::string& line, Sentence& s,
                 std::vector<std::size_t>& token_lines, std::size_t& mwt_line) {
    auto cols = detail::split_tabs(line);
    if (cols.size() != 10) {
      throw ConlluError(ConlluErrorKind::malformed_row,
                        "expected 10 tab-separated columns, got " +
                            std::to_string(cols.size()),
                        line_no_);
    }
    for (const auto& c : cols) {
      if (c.empty()) {
        throw ConlluError(ConlluErrorKind::malformed_row, "empty column", line_no_);
      }
    }

    std::string_view id_col = cols[0];
    std::size_t dash = id_col.find('-');
    std::size_t dot = id_col.find('.');

    if (dash != std::string_view::npos) {
      // Multiword-token range "a-b".
      int a = 0, b = 0;
      if (!detail::parse_uint(id_col.substr(0, dash), a) ||
          !detail::parse_uint(id_col.substr(dash + 1), b)) {
        throw ConlluError(ConlluErrorKind::malformed_row,
                          "bad multiword token id '" + std::string(id_col) + "'",
                          line_no_);
      }
      if (b <= a) {
        throw ConlluError(ConlluErrorKind::malformed_row,
                          "multiword token range must cover at least two ids",
                          line_no_);
      }
      if (a != s.size() + 1) {
        throw ConlluError(ConlluErrorKind::malformed_row,
                          "multiword token range must precede its first word",
                          line_no_);
      }
      for (std::size_t i = 2; i < 9; ++i) {
        if (cols[i] != "_") {
          throw ConlluError(ConlluErrorKind::malformed_row,
                            "multiword token line may only fill FORM and MISC",
                            line_no_);
        }
      }
      s.mwt_ranges.push_back({a, b, std::string(cols[1]), std::string(cols[9])});
      if (mwt_line == 0) mwt_line = line_no_;
      return;
    }

    if (dot != std::string_view::npos) {
      // Empty node "i.j", kept verbatim.
      int a = 0, sub = 0;
      if (!detail::parse_uint(id_col.substr(0, dot), a) ||
          !detail::parse_uint(id_col.substr(dot + 1), sub) || sub < 1) {
        throw ConlluError(ConlluErrorKind::malformed_row,
                          "bad empty node id '" + std::string(id_col) + "'", line_no_);
      }
      if (a != s.size()) {
        throw ConlluError(ConlluErrorKind::malformed_row,
                          "empty node must directly follow its anchor token",
                          line_no_);
      }
      s.empty_nodes.push_back({a, line});
      return;
    }

    Token t;
    if (!detail::parse_uint(id_col, t.id) || t.id < 1) {
      throw ConlluError(ConlluErrorKind::malformed_row,
                        "non-numeric token id '" + std::string(id_col) + "'", line_no_);
    }
    if (t.id != s.size() + 1) {
      throw ConlluError(ConlluErrorKind::non_contiguous_ids,
                        "token id " + std::to_string(t.id) + " after " +
                            std::to_string(s.size()) + " tokens",
                        line_no_);
    }
    if (!detail::parse_uint(cols[6], t.head)) {
      throw ConlluError(ConlluErrorKind::malformed_row,
                        "non-numeric head '" + std::string(cols[6]) + "'", line_no_);
    }
    t.form = cols[1];
    t.lemma = cols[2];
    t.upos = cols[3];
    t.xpos = cols[4];
    t.feats = cols[5];
    t.deprel = cols[7];
    t.deps = cols[8];
    t.misc = cols[9];
    s.tokens.push_back(std::move(t));
    token_lines.push_back(line_no_);
  }

  void finish_block(const Sentence& s, const std::vector<std::size_t>& token_lines,
                    std::size_t mwt_line, std::size_t first_line) {
    if (s.tokens.empty()) {
      throw ConlluError(ConlluErrorKind::malformed_row,
                        "sentence block contains no token rows", first_line);
    }
    const int n = s.size();
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (s.tokens[i].head > n) {
        throw ConlluError(ConlluErrorKind::head_out_of_range,
                          "head " + std::to_string(s.tokens[i].head) +
                              " out of range for " + std::to_string(n) + " tokens",
                          token_lines[i]);
      }
    }
    for (const auto& r : s.mwt_ranges) {
      if (r.end > n) {
        throw ConlluError(ConlluErrorKind::malformed_row,
                          "multiword token range " + std::to_string(r.start) + "-" +
                              std::to_string(r.end) + " exceeds sentence length",
                          mwt_line);
      }
    }
  }

  std::istream* in_;
  ParsePolicy policy_;
  bool block_terminated_ = false;
  std::size_t line_no_ = 0;
  std::size_t sentences_read_ = 0;
  std::size_t error_count_ = 0;
  std::vector<std::string> error_messages_;
};

inline std::vector<Sentence> parse_conllu(std::istream& in, ParsePolicy policy = {}) {
  ConlluReader reader(in, policy);
  std::vector<Sentence> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

inline std::vector<Sentence> parse_conllu(const std::string& text, ParsePolicy policy = {}) {
  std::istringstream in(text);
  return parse_conllu(in, policy);
}

inline void serialize_conllu(const Sentence& s, std::string& out) {
  for (const auto& c : s.comments) {
    out += c;
    out += '\n';
  }
  std::size_t empty_i = 0;
  auto emit_empty_after = [&](int anchor) {
    while (empty_i < s.empty_nodes.size() && s.empty_nodes[empty_i].anchor == anchor) {
      out += s.empty_nodes[empty_i].line;
      out += '\n';
      ++empty_i;
    }
  };
  emit_empty_after(0);
  std::size_t mwt_i = 0;
  for (const auto& t : s.tokens) {
    if (mwt_i < s.mwt_ranges.size() && s.mwt_ranges[mwt_i].start == t.id) {
      const auto& r = s.mwt_ranges[mwt_i];
      out += std::to_string(r.start);
      out += '-';
      out += std::to_string(r.end);
      out += '\t';
      out += r.form;
      out += "\t_\t_\t_\t_\t_\t_\t_\t";
      out += r.misc;
      out += '\n';
      ++mwt_i;
    }
    out += std::to_string(t.id);
    out += '\t';
    out += t.form;
    out += '\t';
    out += t.lemma;
    out += '\t';
    out += t.upos;
    out += '\t';
    out += t.xpos;
    out += '\t';
    out += t.feats;
    out += '\t';
    out += std::to_string(t.head);
    out += '\t';
    out += t.deprel;
    out += '\t';
    out += t.deps;
    out += '\t';
    out += t.misc;
    out += '\n';
    emit_empty_after(t.id);
  }
  out += '\n';
}

// One block, comments first, terminated by exactly one blank line.
// parse(serialize(x)) == x; serialize(parse(b)) is byte-identical for
// normalized well-formed blocks.
inline std::string serialize_conllu(const Sentence& s) {
  std::string out;
  serialize_conllu(s, out);
  return out;
}

// Rooted dependency tree over a sentence. Node 0 is the virtual root;
// children lists are ordered by surface position. `frozen` marks subtrees
// whose internal order is locked (set by lock_spans, untouched elsewhere).
struct DepTree {
  Sentence sentence;
  std::vector<std::vector<int>> children;  // indexed 0..n
  int root_id = 0;
  std::vector<std::uint8_t> frozen;        // indexed 0..n

  int size() const { return sentence.size(); }
  const Token& token(int id) const { return sentence.token(id); }

  // Descendant closure including `id`, ascending.
  std::vector<int> closure(int id) const {
    std::vector<int> out;
    std::vector<int> stack{id};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      out.push_back(v);
      for (int c : children[static_cast<std::size_t>(v)]) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

// Builds the tree, validating that the head relation is a single-rooted
// tree: MultipleRoots / NoRoot / HeadCycle otherwise. Also revalidates id
// contiguity and head ranges so hand-built sentences fail cleanly.
inline DepTree build_tree(const Sentence& s) {
  const int n = s.size();
  DepTree tree;
  tree.sentence = s;
  tree.children.assign(static_cast<std::size_t>(n) + 1, {});
  tree.frozen.assign(static_cast<std::size_t>(n) + 1, 0);

  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[static_cast<std::size_t>(i)];
    if (t.id != i + 1) {
      throw ConlluError(ConlluErrorKind::non_contiguous_ids,
                        "token ids are not 1.." + std::to_string(n));
    }
    if (t.head < 0 || t.head > n) {
      throw ConlluError(ConlluErrorKind::head_out_of_range,
                        "head " + std::to_string(t.head) + " out of range");
    }
    tree.children[static_cast<std::size_t>(t.head)].push_back(t.id);
  }

  if (tree.children[0].empty()) {
    throw ConlluError(ConlluErrorKind::no_root, "no token has head 0");
  }
  if (tree.children[0].size() > 1) {
    throw ConlluError(ConlluErrorKind::multiple_roots,
                      std::to_string(tree.children[0].size()) + " tokens have head 0");
  }
  tree.root_id = tree.children[0][0];

  // Every node has exactly one head edge, so any node unreachable from the
  // virtual root sits on a cycle.
  std::vector<int> stack{0};
  int reached = 0;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(n) + 1, 0);
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(v)]) continue;
    seen[static_cast<std::size_t>(v)] = 1;
    ++reached;
    for (int c : tree.children[static_cast<std::size_t>(v)]) stack.push_back(c);
  }
  if (reached != n + 1) {
    throw ConlluError(ConlluErrorKind::head_cycle,
                      "head relation contains a cycle");
  }
  return tree;
}

struct SpanInfo {
  int min_id = 0;
  int max_id = 0;
  bool contiguous = false;
};

// Span of the node's descendant closure (including itself); contiguous iff
// the closure fills the whole [min,max] interval. Non-contiguous closures
// are exactly the linearly overlapping subtrees UD permits.
inline SpanInfo subtree_span(const DepTree& tree, int node_id) {
  if (node_id < 1 || node_id > tree.size()) {
    throw ConlluError(ConlluErrorKind::unknown_node,
                      "node " + std::to_string(node_id) + " not in tree");
  }
  auto ids = tree.closure(node_id);
  SpanInfo info;
  info.min_id = ids.front();
  info.max_id = ids.back();
  info.contiguous =
      static_cast<std::size_t>(info.max_id - info.min_id + 1) == ids.size();
  return info;
}

}  // namespace udreorder
