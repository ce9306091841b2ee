// pipeline.hpp - command implementations shared by the CLI and tests.
//
// Each cmd_* function does one subcommand's work: open inputs, stream
// sentences, write outputs, and return a process exit code. 0 is success,
// 1 a usage error, 2 a data error (unreadable, malformed, or inconsistent
// inputs). Every command builds a run report with content digests of all
// files touched and its full effective configuration; pass a report path
// to persist it.
//
// Diagnostics go to the error stream; set UDREORDER_LOG=debug|info|warn|
// error to get progress logging on stderr (off when unset).

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "udreorder/conllu.hpp"
#include "udreorder/constraints.hpp"
#include "udreorder/pod.hpp"
#include "udreorder/reorder.hpp"

namespace udreorder {

// 64-bit FNV-1a. Content fingerprint for reproducibility checks, not a
// cryptographic hash.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return to_hex(h);
}

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

inline LogLevel log_threshold() {
  static LogLevel level = [] {
    const char* env = std::getenv("UDREORDER_LOG");
    if (!env || !*env) return LogLevel::off;
    std::string_view v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info" || v == "1") return LogLevel::info;
    if (v == "warn") return LogLevel::warn;
    if (v == "error") return LogLevel::error;
    if (v == "off" || v == "0") return LogLevel::off;
    return LogLevel::info;
  }();
  return level;
}

inline void log_at(LogLevel level, const std::string& msg) {
  static const char* names[] = {"debug", "info", "warn", "error"};
  if (level >= log_threshold() && level != LogLevel::off) {
    std::cerr << "[udreorder/" << names[static_cast<int>(level)] << "] " << msg << '\n';
  }
}

inline void log_debug(const std::string& msg) { log_at(LogLevel::debug, msg); }
inline void log_info(const std::string& msg) { log_at(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log_at(LogLevel::warn, msg); }

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

struct FileDigest {
  std::string path;
  std::string digest;
};

// One command invocation, summarized for reproducibility: what ran, on
// which bytes, with which effective configuration, producing which bytes.
struct RunReport {
  std::string command;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  nlohmann::ordered_json totals = nlohmann::ordered_json::object();
  std::vector<std::string> errors;
  double duration_s = 0.0;

  static constexpr std::size_t kMaxErrors = 20;

  void add_input(const std::string& path) { inputs.push_back({path, digest_file(path)}); }
  void add_output(const std::string& path) { outputs.push_back({path, digest_file(path)}); }
  void add_error(const std::string& msg) {
    if (errors.size() < kMaxErrors) errors.push_back(msg);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    auto files = [](const std::vector<FileDigest>& v) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& f : v) arr.push_back({{"path", f.path}, {"digest", f.digest}});
      return arr;
    };
    j["inputs"] = files(inputs);
    j["parameters"] = parameters;
    j["totals"] = totals;
    j["errors"] = errors;
    j["outputs"] = files(outputs);
    j["duration_s"] = duration_s;
    return j;
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << to_json().dump(2) << '\n';
  }
};

namespace detail {

class Timer {
 public:
  double elapsed_s() const {
    auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double>(d).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Output sink: a file, or the fallback stream for "" / "-".
class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) : path_(path) {
    if (use_file()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write '" + path + "'");
      stream_ = &file_;
    } else {
      stream_ = &fallback;
    }
  }

  std::ostream& stream() { return *stream_; }
  bool use_file() const { return !path_.empty() && path_ != "-"; }
  const std::string& path() const { return path_; }

  void finish(RunReport& report) {
    if (use_file()) {
      file_.close();
      report.add_output(path_);
    }
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_;
};

inline std::string sentence_key(const Sentence& s, std::size_t index) {
  std::string id = s.sent_id();
  if (!id.empty()) return id;
  return "#" + std::to_string(index);
}

inline int finish_report(RunReport& report, const Timer& timer,
                         const std::string& report_path, std::ostream& err, int code) {
  report.duration_s = timer.elapsed_s();
  if (!report_path.empty()) {
    try {
      report.write(report_path);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitData;
    }
  }
  return code;
}

inline std::map<std::string, std::vector<LockedSpan>> load_spans(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("bad spans file '" + path + "': " + e.what());
  }
  if (!j.is_object()) {
    throw std::runtime_error("bad spans file '" + path +
                             "': top-level must map sent_id to span lists");
  }
  std::map<std::string, std::vector<LockedSpan>> out;
  for (const auto& [key, arr] : j.items()) {
    if (!arr.is_array()) {
      throw std::runtime_error("bad spans file '" + path + "': entry for '" + key +
                               "' is not an array");
    }
    for (const auto& e : arr) {
      if (!e.is_object() || !e.contains("start") || !e.contains("end") ||
          !e["start"].is_number_integer() || !e["end"].is_number_integer()) {
        throw std::runtime_error("bad spans file '" + path + "': entry for '" + key +
                                 "' needs integer start and end");
      }
      SpanReason reason = SpanReason::user;
      if (e.contains("reason")) {
        if (!e["reason"].is_string()) {
          throw std::runtime_error("bad spans file '" + path + "': reason for '" + key +
                                   "' is not a string");
        }
        auto r = span_reason_from_string(e["reason"].get<std::string>());
        if (!r) {
          throw std::runtime_error("bad spans file '" + path + "': unknown reason '" +
                                   e["reason"].get<std::string>() + "' for '" + key + "'");
        }
        reason = *r;
      }
      out[key].push_back({e["start"].get<int>(), e["end"].get<int>(), reason});
    }
  }
  return out;
}

struct ReorderTotals {
  std::uint64_t sentences_in = 0;
  std::uint64_t sentences_out = 0;
  std::uint64_t skipped = 0;
  std::uint64_t warnings = 0;
  std::uint64_t nonprojective_inputs = 0;
  ReorderStats stats;

  void absorb(const ReorderResult& r) {
    ++sentences_out;
    warnings += r.warnings.size();
    if (r.stats.nonprojective_input) ++nonprojective_inputs;
    stats.subtrees_total += r.stats.subtrees_total;
    stats.subtrees_reordered += r.stats.subtrees_reordered;
    stats.subtrees_infeasible_reverted += r.stats.subtrees_infeasible_reverted;
    stats.subtrees_unconstrained += r.stats.subtrees_unconstrained;
    stats.spans_locked += r.stats.spans_locked;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json t;
    t["sentences_in"] = sentences_in;
    t["sentences_out"] = sentences_out;
    t["skipped"] = skipped;
    t["subtrees_total"] = stats.subtrees_total;
    t["subtrees_reordered"] = stats.subtrees_reordered;
    t["subtrees_infeasible_reverted"] = stats.subtrees_infeasible_reverted;
    t["subtrees_unconstrained"] = stats.subtrees_unconstrained;
    t["spans_locked"] = stats.spans_locked;
    t["nonprojective_inputs"] = nonprojective_inputs;
    t["warnings"] = warnings;
    return t;
  }
};

}  // namespace detail

struct EstimateOptions {
  std::vector<std::string> inputs;
  std::string language;
  Granularity granularity = Granularity::universal;
  std::vector<std::string> treebanks;  // parallel to inputs; basename fallback
  std::string output;                  // "" or "-" means stdout
  bool lenient = false;
  std::string report_path;
};

inline int cmd_estimate(const EstimateOptions& opt, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  detail::Timer timer;
  RunReport report;
  report.command = "estimate";
  report.parameters = {{"language", opt.language},
                       {"granularity", to_string(opt.granularity)},
                       {"lenient", opt.lenient},
                       {"output", opt.output}};
  try {
    if (opt.inputs.empty()) {
      err << "error: no input files\n";
      return kExitUsage;
    }
    if (opt.language.empty()) {
      err << "error: language must not be empty\n";
      return kExitUsage;
    }

    PodAccumulator acc(opt.language, opt.granularity);
    std::size_t skipped = 0;
    auto treebank_names = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < opt.inputs.size(); ++i) {
      const std::string& path = opt.inputs[i];
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot read '" + path + "'");
      report.add_input(path);
      std::string name = i < opt.treebanks.size() && !opt.treebanks[i].empty()
                             ? opt.treebanks[i]
                             : std::filesystem::path(path).filename().string();
      acc.add_treebank_name(name);
      treebank_names.push_back(name);
      log_info("estimating from " + path);

      ConlluReader reader(in, {opt.lenient});
      while (auto s = reader.next()) {
        if (!opt.lenient) {
          acc.add_sentence(*s);
        } else if (!acc.try_add_sentence(*s)) {
          ++skipped;
          report.add_error("skipped invalid tree " +
                           detail::sentence_key(*s, reader.sentences_read()));
        }
      }
      skipped += reader.error_count();
      for (const auto& m : reader.error_messages()) report.add_error(m);
      log_debug(path + ": " + std::to_string(reader.sentences_read()) +
                " sentences read");
    }
    report.parameters["treebank"] = std::move(treebank_names);

    PodTable table = acc.take();
    std::uint64_t observations = 0;
    for (const auto& [t, n] : table.counts()) observations += n;
    report.totals = {{"sentences", table.provenance().sentences},
                     {"skipped", skipped},
                     {"triples", table.counts().size()},
                     {"observations", observations}};
    if (table.provenance().sentences == 0) {
      err << "warning: no sentences in input, table is empty\n";
      report.add_error("warning: no sentences in input, table is empty");
    }

    detail::OutputSink sink(opt.output, out);
    save_pods(table, sink.stream());
    sink.finish(report);
    log_info("estimate done: " + std::to_string(table.provenance().sentences) +
             " sentences, " + std::to_string(table.counts().size()) + " triples");
    return detail::finish_report(report, timer, opt.report_path, err, kExitOk);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    report.add_error(e.what());
    return detail::finish_report(report, timer, opt.report_path, err, kExitData);
  }
}

struct DeriveOptions {
  std::string pods;
  std::uint64_t min_count = 0;
  double margin = 0.0;
  std::string output;
  std::string report_path;
};

inline int cmd_derive(const DeriveOptions& opt, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  detail::Timer timer;
  RunReport report;
  report.command = "derive";
  report.parameters = {{"min_count", opt.min_count},
                       {"margin", opt.margin},
                       {"output", opt.output}};
  try {
    if (!(opt.margin >= 0.0) || opt.margin >= 0.5) {
      err << "error: margin must be in [0, 0.5)\n";
      return kExitUsage;
    }
    report.add_input(opt.pods);
    PodTable table = load_pods(opt.pods);
    ConstraintSet set = derive_constraints(table, opt.min_count, opt.margin);

    std::set<std::string> parents;
    for (const auto& e : set.entries) parents.insert(e.parent);
    report.totals = {{"entries", set.entries.size()}, {"parents", parents.size()}};

    detail::OutputSink sink(opt.output, out);
    save_constraints(set, sink.stream());
    sink.finish(report);
    log_info("derive done: " + std::to_string(set.entries.size()) + " constraints");
    return detail::finish_report(report, timer, opt.report_path, err, kExitOk);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    report.add_error(e.what());
    return detail::finish_report(report, timer, opt.report_path, err, kExitData);
  }
}

struct ReorderOptions {
  std::string input;
  std::string constraints;    // constraint set or distribution table (JSON)
  std::uint64_t min_count = 0;  // applied when deriving from a table
  double margin = 0.0;
  bool min_count_set = false;
  bool margin_set = false;
  std::string spans;          // optional sidecar
  std::string text_out;       // optional plain-text output
  std::string align_out;      // optional alignment sidecar
  std::string output;
  bool lenient = false;
  bool skip_empty_nodes = false;
  std::string report_path;
};

namespace detail {

// The constraints argument accepts either a constraint file or a
// distribution table; tables are recognized by their "triples" field and
// the constraints are derived in-process.
inline ConstraintSet load_constraints_or_pods(const std::string& path,
                                              std::uint64_t min_count, double margin,
                                              bool* derived = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw PodError(PodErrorKind::corrupt_table, e.what());
  }
  if (j.is_object() && j.contains("triples")) {
    if (derived) *derived = true;
    return derive_constraints(pods_from_json(j), min_count, margin);
  }
  if (derived) *derived = false;
  return constraints_from_json(j);
}

}  // namespace detail

inline int cmd_reorder(const ReorderOptions& opt, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  detail::Timer timer;
  RunReport report;
  report.command = "reorder";
  report.parameters = {{"lenient", opt.lenient},
                       {"skip_empty_nodes", opt.skip_empty_nodes},
                       {"output", opt.output}};
  try {
    if (!(opt.margin >= 0.0) || opt.margin >= 0.5) {
      err << "error: margin must be in [0, 0.5)\n";
      return kExitUsage;
    }
    report.add_input(opt.constraints);
    bool derived = false;
    ConstraintSet set = detail::load_constraints_or_pods(opt.constraints, opt.min_count,
                                                         opt.margin, &derived);
    if (!derived && (opt.margin_set || opt.min_count_set)) {
      err << "error: --margin and --min-count apply only when the constraints "
             "argument is a distribution table\n";
      return kExitUsage;
    }
    report.parameters["language"] = set.language;
    report.parameters["granularity"] = to_string(set.granularity);
    report.parameters["derived_in_process"] = derived;
    if (derived) {
      report.parameters["min_count"] = opt.min_count;
      report.parameters["margin"] = opt.margin;
    }

    std::map<std::string, std::vector<LockedSpan>> spans;
    if (!opt.spans.empty()) {
      report.add_input(opt.spans);
      spans = detail::load_spans(opt.spans);
      report.parameters["spans"] = opt.spans;
    }

    std::ifstream in(opt.input);
    if (!in) throw std::runtime_error("cannot read '" + opt.input + "'");
    report.add_input(opt.input);

    detail::OutputSink sink(opt.output, out);
    std::ofstream text_file;
    if (!opt.text_out.empty()) {
      text_file.open(opt.text_out);
      if (!text_file) throw std::runtime_error("cannot write '" + opt.text_out + "'");
    }
    nlohmann::ordered_json alignments = nlohmann::ordered_json::object();
    detail::ReorderTotals totals;
    std::set<std::string> spans_used;
    std::string block;

    ConlluReader reader(in, {opt.lenient});
    while (auto s = reader.next()) {
      ++totals.sentences_in;
      std::string key = detail::sentence_key(*s, reader.sentences_read());
      if (opt.skip_empty_nodes && !s->empty_nodes.empty()) {
        ++totals.skipped;
        report.add_error(key + ": has empty nodes, skipped");
        continue;
      }
      std::vector<LockedSpan> sentence_spans;
      if (auto it = spans.find(key); it != spans.end()) {
        sentence_spans = it->second;
        spans_used.insert(key);
      }
      try {
        ReorderResult r = reorder_tree(*s, set, sentence_spans);
        for (const auto& w : r.warnings) {
          log_warn(w);
          report.add_error("warning: " + w);
        }
        log_debug(key + ": " + std::to_string(r.stats.subtrees_reordered) + "/" +
                  std::to_string(r.stats.subtrees_total) + " subtrees reordered");
        totals.absorb(r);
        if (!opt.align_out.empty()) alignments[key] = r.alignment;
        block.clear();
        serialize_conllu(r.sentence, block);
        sink.stream() << block;
        if (text_file.is_open()) text_file << r.sentence.text() << '\n';
      } catch (const std::runtime_error& e) {
        if (!opt.lenient) throw;
        ++totals.skipped;
        report.add_error(key + ": " + e.what());
      }
    }
    totals.sentences_in += reader.error_count();
    totals.skipped += reader.error_count();
    for (const auto& m : reader.error_messages()) report.add_error(m);
    for (const auto& [key, v] : spans) {
      if (!spans_used.count(key)) {
        log_warn("spans entry '" + key + "' matched no sentence");
        report.add_error("warning: spans entry '" + key + "' matched no sentence");
      }
    }

    sink.finish(report);
    if (text_file.is_open()) {
      text_file.close();
      report.add_output(opt.text_out);
    }
    if (!opt.align_out.empty()) {
      std::ofstream af(opt.align_out);
      if (!af) throw std::runtime_error("cannot write '" + opt.align_out + "'");
      af << alignments.dump(2) << '\n';
      af.close();
      report.add_output(opt.align_out);
    }
    report.totals = totals.to_json();
    log_info("reorder done: " + std::to_string(totals.sentences_out) + " sentences");
    return detail::finish_report(report, timer, opt.report_path, err, kExitOk);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    report.add_error(e.what());
    return detail::finish_report(report, timer, opt.report_path, err, kExitData);
  }
}

struct EnsembleOptions {
  std::string vanilla;
  std::string reordered;
  std::string output;
  bool lenient = false;
  std::string report_path;
};

// Concatenates the vanilla treebank (first, "-orig" suffixes) and the
// reordered treebank ("-reord" suffixes). Sentences without a sent_id get
// "#<index>" before the suffix. The suffixes keep the two blocks disjoint;
// duplicates within one input would still collide, so they are a hard data
// error even under the lenient policy.
inline int cmd_ensemble(const EnsembleOptions& opt, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  detail::Timer timer;
  RunReport report;
  report.command = "ensemble";
  report.parameters = {{"lenient", opt.lenient}, {"output", opt.output}};
  try {
    report.add_input(opt.vanilla);
    report.add_input(opt.reordered);

    detail::OutputSink sink(opt.output, out);
    std::uint64_t written = 0;
    std::uint64_t skipped = 0;
    std::string block;
    std::set<std::string> seen;

    auto copy_block = [&](const std::string& path, const char* suffix) {
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot read '" + path + "'");
      ConlluReader reader(in, {opt.lenient});
      while (auto s = reader.next()) {
        std::string key = detail::sentence_key(*s, reader.sentences_read());
        if (!seen.insert(key + suffix).second) {
          throw std::runtime_error("DuplicateSentId: '" + key + "' appears more than once in '" +
                                   path + "'");
        }
        if (!s->replace_comment("sent_id", key + suffix)) {
          s->comments.insert(s->comments.begin(), "# sent_id = " + key + suffix);
        }
        block.clear();
        serialize_conllu(*s, block);
        sink.stream() << block;
        ++written;
      }
      skipped += reader.error_count();
      for (const auto& m : reader.error_messages()) report.add_error(m);
    };

    copy_block(opt.vanilla, "-orig");
    copy_block(opt.reordered, "-reord");

    sink.finish(report);
    report.totals = {{"sentences_out", written}, {"skipped", skipped}};
    log_info("ensemble done: " + std::to_string(written) + " sentences");
    return detail::finish_report(report, timer, opt.report_path, err, kExitOk);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    report.add_error(e.what());
    return detail::finish_report(report, timer, opt.report_path, err, kExitData);
  }
}

struct CompareOptions {
  std::string pods_a;
  std::string pods_b;
  std::string output;
  std::string report_path;
};

inline int cmd_compare(const CompareOptions& opt, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  detail::Timer timer;
  RunReport report;
  report.command = "compare";
  report.parameters = {{"output", opt.output}};
  try {
    report.add_input(opt.pods_a);
    report.add_input(opt.pods_b);
    PodTable a = load_pods(opt.pods_a);
    PodTable b = load_pods(opt.pods_b);

    std::vector<PairDivergence> pairs;
    auto distance = pod_distance_breakdown(a, b, &pairs);

    struct ParentAgg {
      long double num = 0.0;
      std::uint64_t denom = 0;
      std::uint64_t pairs = 0;
    };
    std::map<std::string, ParentAgg> by_parent;
    for (const auto& p : pairs) {
      auto& agg = by_parent[p.parent];
      agg.num += static_cast<long double>(p.weight) * std::abs(p.prob_a - p.prob_b);
      agg.denom += p.weight;
      ++agg.pairs;
    }

    nlohmann::ordered_json j;
    j["language_a"] = a.language();
    j["language_b"] = b.language();
    j["granularity"] = to_string(a.granularity());
    if (distance) {
      j["distance"] = *distance;
    } else {
      j["distance"] = nullptr;  // no shared pair, distance undefined
    }
    j["shared_pairs"] = pairs.size();
    auto per_parent = nlohmann::ordered_json::object();
    for (const auto& [parent, agg] : by_parent) {
      per_parent[parent] = {
          {"distance",
           static_cast<double>(agg.num / static_cast<long double>(agg.denom))},
          {"pairs", agg.pairs}};
    }
    j["per_parent"] = std::move(per_parent);

    detail::OutputSink sink(opt.output, out);
    sink.stream() << j.dump(2) << '\n';
    sink.finish(report);

    report.totals = {{"shared_pairs", pairs.size()}};
    if (distance) report.totals["distance"] = *distance;
    return detail::finish_report(report, timer, opt.report_path, err, kExitOk);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    report.add_error(e.what());
    return detail::finish_report(report, timer, opt.report_path, err, kExitData);
  }
}

struct ReportOptions {
  std::string input;
};

// Renders a run report for humans.
inline int cmd_report(const ReportOptions& opt, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  try {
    std::ifstream in(opt.input);
    if (!in) throw std::runtime_error("cannot read '" + opt.input + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("bad report '" + opt.input + "': " + e.what());
    }
    if (!j.is_object() || !j.contains("command") || !j["command"].is_string()) {
      throw std::runtime_error("bad report '" + opt.input + "': missing command");
    }

    out << "command: " << j["command"].get<std::string>() << '\n';
    if (j.contains("duration_s") && j["duration_s"].is_number()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3f", j["duration_s"].get<double>());
      out << "duration_s: " << buf << '\n';
    }
    auto files = [&](const char* title) {
      if (!j.contains(title) || !j[title].is_array() || j[title].empty()) return;
      out << title << ":\n";
      for (const auto& f : j[title]) {
        if (!f.is_object()) continue;
        out << "  " << f.value("path", "?") << " (" << f.value("digest", "?") << ")\n";
      }
    };
    files("inputs");
    files("outputs");
    if (j.contains("parameters") && j["parameters"].is_object() &&
        !j["parameters"].empty()) {
      out << "parameters:\n";
      for (const auto& [k, v] : j["parameters"].items()) {
        out << "  " << k << ": " << v.dump() << '\n';
      }
    }
    if (j.contains("totals") && j["totals"].is_object() && !j["totals"].empty()) {
      out << "totals:\n";
      for (const auto& [k, v] : j["totals"].items()) {
        out << "  " << k << ": " << v.dump() << '\n';
      }
    }
    if (j.contains("errors") && j["errors"].is_array() && !j["errors"].empty()) {
      out << "errors (" << j["errors"].size() << "):\n";
      for (const auto& e : j["errors"]) {
        out << "  " << (e.is_string() ? e.get<std::string>() : e.dump()) << '\n';
      }
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace udreorder
