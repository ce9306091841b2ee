// reorder.hpp - recursive subtree reordering under ordering constraints.
//
// Each subtree is linearized independently: the items to order are the
// node's children plus the node itself (carrying its own label), the
// applicable constraints are the ones filed under the node's label, and
// solve_order picks the emission order. Infeasible subtrees keep their
// original order. Subtrees always come out contiguous, so the output is
// projective even when the input was not.
//
// Locked spans move as atomic blocks. A span is rooted at the node that
// dominates the most span tokens; other span tokens with heads outside the
// span are re-attached to that node, and the node is frozen. A frozen
// node's whole closure is emitted in original surface order. Multiword
// token ranges are locked automatically. A frozen closure reproduces its
// original internal arrangement verbatim, so crossing arcs captured inside
// one survive; the projectivity guarantee applies to everything outside
// frozen blocks.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "udreorder/conllu.hpp"
#include "udreorder/constraints.hpp"

namespace udreorder {

enum class SpanReason { user, mwt, entity };

inline const char* to_string(SpanReason r) {
  switch (r) {
    case SpanReason::user: return "user";
    case SpanReason::mwt: return "mwt";
    case SpanReason::entity: return "entity";
  }
  return "?";
}

inline std::optional<SpanReason> span_reason_from_string(std::string_view s) {
  if (s == "user") return SpanReason::user;
  if (s == "mwt") return SpanReason::mwt;
  if (s == "entity") return SpanReason::entity;
  return std::nullopt;
}

// Inclusive token id range [start, end] whose surface order must not change.
struct LockedSpan {
  int start = 0;
  int end = 0;
  SpanReason reason = SpanReason::user;

  friend bool operator==(const LockedSpan&, const LockedSpan&) = default;
};

enum class ReorderErrorKind { overlapping_spans, span_out_of_range };

inline const char* to_string(ReorderErrorKind k) {
  return k == ReorderErrorKind::overlapping_spans ? "OverlappingSpans"
                                                  : "SpanOutOfRange";
}

class ReorderError : public std::runtime_error {
 public:
  ReorderError(ReorderErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ReorderErrorKind kind() const noexcept { return kind_; }

 private:
  ReorderErrorKind kind_;
};

namespace detail {

inline std::string span_text(const LockedSpan& s) {
  return "[" + std::to_string(s.start) + "," + std::to_string(s.end) + "]";
}

// Re-roots one span and freezes it. The span root is the span token whose
// closure covers the most span tokens (ties go to the leftmost); every
// other span token headed outside the span is re-attached to it. After
// that every span token sits inside the root's closure, so emitting the
// closure in original order keeps the span intact.
inline void lock_one_span(DepTree& tree, const LockedSpan& sp) {
  std::vector<int> dominated(static_cast<std::size_t>(tree.size()) + 1, 0);
  for (int t = sp.start; t <= sp.end; ++t) {
    int v = t;
    while (v != 0) {
      if (v >= sp.start && v <= sp.end) ++dominated[static_cast<std::size_t>(v)];
      v = tree.token(v).head;
    }
  }
  int head = sp.start;
  for (int v = sp.start + 1; v <= sp.end; ++v) {
    if (dominated[static_cast<std::size_t>(v)] >
        dominated[static_cast<std::size_t>(head)]) {
      head = v;
    }
  }

  for (int v = sp.start; v <= sp.end; ++v) {
    if (v == head) continue;
    int h = tree.token(v).head;
    if (h >= sp.start && h <= sp.end) continue;
    auto& old_kids = tree.children[static_cast<std::size_t>(h)];
    old_kids.erase(std::find(old_kids.begin(), old_kids.end(), v));
    tree.sentence.token(v).head = head;
    auto& new_kids = tree.children[static_cast<std::size_t>(head)];
    new_kids.insert(std::lower_bound(new_kids.begin(), new_kids.end(), v), v);
  }
  tree.frozen[static_cast<std::size_t>(head)] = 1;
}

}  // namespace detail

// Validates and applies locked spans. Spans must be pairwise disjoint:
// any intersection, nesting included, is a data error. Exact duplicates
// (a user span restating a multiword token, say) collapse to one lock.
// Returns the number of spans locked. Head fields in tree.sentence are
// updated along with the child lists, so re-attachment is visible in the
// output annotations.
inline std::size_t lock_spans(DepTree& tree, std::vector<LockedSpan> spans) {
  const int n = tree.size();
  for (const auto& s : spans) {
    if (s.start < 1 || s.end > n || s.start > s.end) {
      throw ReorderError(ReorderErrorKind::span_out_of_range,
                         "span " + detail::span_text(s) + " invalid for " +
                             std::to_string(n) + " tokens");
    }
  }

  std::sort(spans.begin(), spans.end(), [](const LockedSpan& a, const LockedSpan& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.end < b.end;
  });
  spans.erase(std::unique(spans.begin(), spans.end(),
                          [](const LockedSpan& a, const LockedSpan& b) {
                            return a.start == b.start && a.end == b.end;
                          }),
              spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].start <= spans[i - 1].end) {
      throw ReorderError(ReorderErrorKind::overlapping_spans,
                         "spans " + detail::span_text(spans[i - 1]) + " and " +
                             detail::span_text(spans[i]) + " overlap");
    }
  }

  for (const auto& s : spans) detail::lock_one_span(tree, s);
  return spans.size();
}

struct ReorderStats {
  std::uint64_t subtrees_total = 0;
  std::uint64_t subtrees_reordered = 0;
  std::uint64_t subtrees_infeasible_reverted = 0;
  std::uint64_t subtrees_unconstrained = 0;
  std::uint64_t spans_locked = 0;
  bool nonprojective_input = false;

  friend bool operator==(const ReorderStats&, const ReorderStats&) = default;
};

struct ReorderResult {
  Sentence sentence;
  // alignment[o-1] is the output id of original token o.
  std::vector<int> alignment;
  ReorderStats stats;
  std::vector<std::string> warnings;
};

namespace detail {

struct ReorderWalk {
  const DepTree& tree;
  const ConstraintSet& constraints;
  ReorderStats& stats;
  std::vector<std::string>& warnings;
  std::string sent_tag;
  std::vector<int> order;  // original ids, output surface order

  void emit(int node) {
    if (tree.frozen[static_cast<std::size_t>(node)]) {
      auto block = tree.closure(node);
      order.insert(order.end(), block.begin(), block.end());
      return;
    }
    const auto& kids = tree.children[static_cast<std::size_t>(node)];
    if (kids.empty()) {
      order.push_back(node);
      return;
    }

    // Participants sorted by surface position; the node itself is one of
    // them, carrying its own label.
    std::vector<int> ids(kids.begin(), kids.end());
    ids.insert(std::lower_bound(ids.begin(), ids.end(), node), node);

    LocalOrderProblem problem;
    problem.items.reserve(ids.size());
    std::set<std::string> present;
    for (std::size_t r = 0; r < ids.size(); ++r) {
      std::string label = normalize_label(tree.token(ids[r]).deprel,
                                          constraints.granularity);
      present.insert(label);
      problem.items.push_back({r, std::move(label)});
    }

    std::string parent_label =
        normalize_label(tree.token(node).deprel, constraints.granularity);
    problem.precedences = relevant_constraints(constraints, parent_label, present);

    ++stats.subtrees_total;
    std::vector<std::size_t> emit_order(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) emit_order[i] = i;
    if (problem.precedences.empty()) {
      ++stats.subtrees_unconstrained;
    } else if (auto solved = solve_order(problem)) {
      ++stats.subtrees_reordered;
      emit_order = std::move(*solved);
    } else {
      ++stats.subtrees_infeasible_reverted;
      warnings.push_back("infeasible constraints under '" + parent_label +
                         "', original order kept" + sent_tag);
    }

    for (std::size_t i : emit_order) {
      int id = ids[i];
      if (id == node) {
        order.push_back(node);
      } else {
        emit(id);
      }
    }
  }
};

}  // namespace detail

// Reorders one tree. The tree is taken by value: span surgery edits heads
// before the walk, and those edits belong to the output. Throws
// ReorderError for bad spans; everything else is reported via stats and
// warnings in the result.
inline ReorderResult reorder_tree(DepTree tree, const ConstraintSet& constraints,
                                  const std::vector<LockedSpan>& user_spans = {}) {
  const int n = tree.size();
  const Sentence input = tree.sentence;

  ReorderResult res;
  std::string sent_tag;
  if (auto id = input.comment_value("sent_id")) sent_tag = " [" + *id + "]";

  for (int v = 1; v <= n; ++v) {
    if (!subtree_span(tree, v).contiguous) {
      res.stats.nonprojective_input = true;
      res.warnings.push_back("nonprojective input, unfrozen subtrees are projectivized" +
                             sent_tag);
      break;
    }
  }

  std::vector<LockedSpan> spans = user_spans;
  for (const auto& r : input.mwt_ranges) {
    // A user span covering the range already keeps its tokens glued, so
    // the automatic lock would only be a duplicate; any other intersection
    // is a genuine conflict and falls through to lock_spans.
    bool covered = false;
    for (const auto& u : user_spans) {
      if (u.start <= r.start && r.end <= u.end) {
        covered = true;
        break;
      }
    }
    if (!covered) spans.push_back({r.start, r.end, SpanReason::mwt});
  }
  res.stats.spans_locked = lock_spans(tree, std::move(spans));

  detail::ReorderWalk walk{tree, constraints, res.stats, res.warnings, sent_tag, {}};
  walk.order.reserve(static_cast<std::size_t>(n));
  walk.emit(tree.root_id);

  res.alignment.assign(static_cast<std::size_t>(n), 0);
  for (int pos = 0; pos < n; ++pos) {
    res.alignment[static_cast<std::size_t>(walk.order[static_cast<std::size_t>(pos)]) - 1] =
        pos + 1;
  }

  Sentence out;
  out.comments = input.comments;
  out.tokens.reserve(static_cast<std::size_t>(n));
  for (int pos = 1; pos <= n; ++pos) {
    Token t = tree.sentence.token(walk.order[static_cast<std::size_t>(pos) - 1]);
    t.id = pos;
    if (t.head != 0) t.head = res.alignment[static_cast<std::size_t>(t.head) - 1];
    out.tokens.push_back(std::move(t));
  }

  for (const auto& r : input.mwt_ranges) {
    MwtRange m = r;
    m.start = res.alignment[static_cast<std::size_t>(r.start) - 1];
    m.end = res.alignment[static_cast<std::size_t>(r.end) - 1];
    out.mwt_ranges.push_back(std::move(m));
  }
  std::sort(out.mwt_ranges.begin(), out.mwt_ranges.end(),
            [](const MwtRange& a, const MwtRange& b) { return a.start < b.start; });

  if (!input.empty_nodes.empty()) {
    res.warnings.push_back("dropped " + std::to_string(input.empty_nodes.size()) +
                           " empty node(s)" + sent_tag);
  }

  out.replace_comment("text", out.text());
  res.sentence = std::move(out);
  return res;
}

// Convenience entry point from a raw sentence; throws ConlluError when the
// head relation is not a valid tree.
inline ReorderResult reorder_tree(const Sentence& input, const ConstraintSet& constraints,
                                  const std::vector<LockedSpan>& user_spans = {}) {
  return reorder_tree(build_tree(input), constraints, user_spans);
}

struct TokenSpan {
  int start = 0;
  int end = 0;

  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

// Maps an original-id span through an alignment. The result is the covering
// span of the image when the image is contiguous, nullopt when reordering
// scattered it (never the case for spans that were locked).
inline std::optional<TokenSpan> apply_alignment(const std::vector<int>& alignment,
                                                const TokenSpan& span) {
  if (span.start < 1 || span.end > static_cast<int>(alignment.size()) ||
      span.start > span.end) {
    throw ReorderError(ReorderErrorKind::span_out_of_range,
                       "span [" + std::to_string(span.start) + "," +
                           std::to_string(span.end) + "] invalid for alignment of " +
                           std::to_string(alignment.size()));
  }
  int lo = alignment[static_cast<std::size_t>(span.start) - 1];
  int hi = lo;
  for (int o = span.start + 1; o <= span.end; ++o) {
    int v = alignment[static_cast<std::size_t>(o) - 1];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo != span.end - span.start) return std::nullopt;
  return TokenSpan{lo, hi};
}

inline std::vector<std::optional<TokenSpan>> apply_alignment(
    const std::vector<int>& alignment, const std::vector<TokenSpan>& spans) {
  std::vector<std::optional<TokenSpan>> out;
  out.reserve(spans.size());
  for (const auto& s : spans) out.push_back(apply_alignment(alignment, s));
  return out;
}

struct TreebankReorderResult {
  std::vector<ReorderResult> results;  // input order
  ReorderStats totals;                 // summed; nonprojective_input = any
  std::uint64_t nonprojective_inputs = 0;
  std::size_t skipped = 0;
  std::vector<std::string> errors;
  double duration_s = 0.0;
};

// Batch wrapper. Under the lenient policy, sentences whose trees or spans
// fail validation are skipped and reported; the strict policy rethrows.
inline TreebankReorderResult reorder_treebank(
    const std::vector<Sentence>& sentences, const ConstraintSet& constraints,
    const std::map<std::string, std::vector<LockedSpan>>& spans_by_sent_id = {},
    bool lenient = true) {
  auto start = std::chrono::steady_clock::now();
  TreebankReorderResult out;
  for (const auto& s : sentences) {
    std::vector<LockedSpan> spans;
    if (auto it = spans_by_sent_id.find(s.sent_id()); it != spans_by_sent_id.end()) {
      spans = it->second;
    }
    try {
      ReorderResult r = reorder_tree(s, constraints, spans);
      out.totals.subtrees_total += r.stats.subtrees_total;
      out.totals.subtrees_reordered += r.stats.subtrees_reordered;
      out.totals.subtrees_infeasible_reverted += r.stats.subtrees_infeasible_reverted;
      out.totals.subtrees_unconstrained += r.stats.subtrees_unconstrained;
      out.totals.spans_locked += r.stats.spans_locked;
      if (r.stats.nonprojective_input) {
        out.totals.nonprojective_input = true;
        ++out.nonprojective_inputs;
      }
      out.results.push_back(std::move(r));
    } catch (const std::runtime_error& e) {
      if (!lenient) throw;
      ++out.skipped;
      std::string id = s.sent_id();
      out.errors.push_back(id.empty() ? e.what() : id + ": " + e.what());
    }
  }
  out.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                       .count();
  return out;
}

}  // namespace udreorder
