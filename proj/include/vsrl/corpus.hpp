// Role-annotated corpora: a tree file plus a prop file of predicate
// instances.
//
// Prop file grammar, one instance per line:
//
//   <sentence-id> <predicate-terminal-index> (<role>:<start>-<end>)*
//
// Spans are half-open over terminal indices. Blank lines and lines starting
// with '#' are skipped.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vsrl/error.hpp"
#include "vsrl/treebank.hpp"

namespace vsrl {

inline constexpr std::string_view kNullRole = "NULL";
inline constexpr std::string_view kPredicateRole = "V";
/// Collapsed non-NULL label used by the identification step.
inline constexpr std::string_view kArgRole = "ARG";

inline constexpr std::array<std::string_view, 5> kCoreRoles{"Arg0", "Arg1", "Arg2", "Arg3", "Arg4"};

inline constexpr std::array<std::string_view, 20> kAdjunctRoles{
    "ArgM-ADV", "ArgM-CAU", "ArgM-DIS",     "ArgM-DIR", "ArgM-NEG", "ArgM-MNR", "ArgM-PRD",
    "ArgM-PRP", "ArgM-MOD", "ArgM-TMP",     "ArgM-REC", "ArgM-GOL", "ArgM-LVB", "ArgM-EXT",
    "ArgM-COM", "ArgM-I",   "ArgM-Partice", "ArgM-PNC", "ArgM-ADJ", "ArgM-RES"};

/// The closed role inventory: core, adjunct, V and NULL.
inline std::vector<std::string_view> role_inventory() {
  std::vector<std::string_view> out(kCoreRoles.begin(), kCoreRoles.end());
  out.insert(out.end(), kAdjunctRoles.begin(), kAdjunctRoles.end());
  out.push_back(kPredicateRole);
  out.push_back(kNullRole);
  return out;
}

inline bool is_known_role(std::string_view name) {
  return std::find(kCoreRoles.begin(), kCoreRoles.end(), name) != kCoreRoles.end() ||
         std::find(kAdjunctRoles.begin(), kAdjunctRoles.end(), name) != kAdjunctRoles.end() ||
         name == kPredicateRole || name == kNullRole;
}

/// Sort key giving NULL, ARG, Arg0..Arg4, then ArgM-* alphabetically.
/// Any other name sorts last, alphabetically.
inline bool label_order_less(std::string_view a, std::string_view b) {
  auto rank = [](std::string_view s) {
    if (s == kNullRole) return 0;
    if (s == kArgRole) return 1;
    for (std::size_t i = 0; i < kCoreRoles.size(); ++i)
      if (s == kCoreRoles[i]) return 2 + static_cast<int>(i);
    if (s.starts_with("ArgM-")) return 10;
    return 11;
  };
  int ra = rank(a), rb = rank(b);
  if (ra != rb) return ra < rb;
  return a < b;
}

struct Argument {
  Span span;
  std::string role;

  friend bool operator==(const Argument&, const Argument&) = default;
};

struct PropInstance {
  std::string sentence_id;
  std::size_t predicate_index = 0;
  std::vector<Argument> arguments;

  friend bool operator==(const PropInstance&, const PropInstance&) = default;
};

/// Validated pairing of sentences and predicate instances. Sentences are
/// shared so that subsets (folds, samples) stay cheap.
struct Corpus {
  std::map<std::string, std::shared_ptr<const Sentence>, std::less<>> sentences;
  std::vector<PropInstance> instances;

  const Sentence& sentence(std::string_view id) const {
    auto it = sentences.find(id);
    if (it == sentences.end()) throw Error(Errc::UnknownSentenceId, "unknown sentence id '" + std::string(id) + "'");
    return *it->second;
  }

  /// Corpus holding only the given instances (and the sentences they use).
  Corpus subset(const std::vector<PropInstance>& selected) const {
    Corpus out;
    for (const PropInstance& inst : selected) {
      auto it = sentences.find(inst.sentence_id);
      if (it == sentences.end())
        throw Error(Errc::UnknownSentenceId, "unknown sentence id '" + inst.sentence_id + "'");
      out.sentences.emplace(it->first, it->second);
      out.instances.push_back(inst);
    }
    return out;
  }
};

/// Checks an instance against its sentence: roles, ranges and overlaps.
inline void validate_instance(const PropInstance& inst, const Sentence& sentence) {
  const std::size_t n = sentence.tokens.size();
  const std::string where = "instance " + inst.sentence_id + ":" + std::to_string(inst.predicate_index);
  if (inst.predicate_index >= n)
    throw Error(Errc::SpanOutOfRange, where + " predicate index beyond sentence length " + std::to_string(n));
  Span predicate{inst.predicate_index, inst.predicate_index + 1};
  for (std::size_t i = 0; i < inst.arguments.size(); ++i) {
    const Argument& a = inst.arguments[i];
    if (!is_known_role(a.role)) throw Error(Errc::UnknownRole, a.role);
    if (a.role == kNullRole || a.role == kPredicateRole)
      throw Error(Errc::UnknownRole, a.role + " is not an argument role");
    if (a.span.start >= a.span.end || a.span.end > n)
      throw Error(Errc::SpanOutOfRange, where + " span " + std::to_string(a.span.start) + "-" +
                                            std::to_string(a.span.end) + " outside [0," + std::to_string(n) + ")");
    if (a.span.overlaps(predicate)) throw Error(Errc::OverlappingSpans, where + " argument covers the predicate");
    for (std::size_t j = 0; j < i; ++j)
      if (a.span.overlaps(inst.arguments[j].span)) throw Error(Errc::OverlappingSpans, where);
  }
}

namespace detail {

inline bool parse_size(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

/// Parses one prop line. Role names are checked against the inventory;
/// range checks need the sentence and happen in validate_instance. A "V"
/// entry is accepted and dropped.
inline PropInstance parse_prop_line(std::string_view line, std::size_t line_no = 0) {
  auto malformed = [&](const std::string& why) {
    return Error(Errc::MalformedPropLine, "line " + std::to_string(line_no) + ": " + why);
  };
  std::vector<std::string_view> fields = detail::split_ws(line);
  if (fields.size() < 2) throw malformed("expected '<sentence-id> <predicate-index> ...'");
  PropInstance inst;
  inst.sentence_id = std::string(fields[0]);
  if (!detail::parse_size(fields[1], inst.predicate_index)) throw malformed("bad predicate index");
  for (std::size_t f = 2; f < fields.size(); ++f) {
    std::string_view field = fields[f];
    std::size_t colon = field.rfind(':');
    if (colon == std::string_view::npos) throw malformed("argument '" + std::string(field) + "' lacks ':'");
    std::string_view role = field.substr(0, colon);
    std::string_view range = field.substr(colon + 1);
    std::size_t dash = range.find('-');
    Argument arg;
    if (dash == std::string_view::npos || !detail::parse_size(range.substr(0, dash), arg.span.start) ||
        !detail::parse_size(range.substr(dash + 1), arg.span.end))
      throw malformed("bad span in '" + std::string(field) + "'");
    if (!is_known_role(role)) throw Error(Errc::UnknownRole, std::string(role));
    // The predicate's own V annotation is implied by the index.
    if (role == kPredicateRole) continue;
    arg.role = std::string(role);
    inst.arguments.push_back(std::move(arg));
  }
  return inst;
}

inline std::string format_prop_line(const PropInstance& inst) {
  std::string out = inst.sentence_id + " " + std::to_string(inst.predicate_index);
  for (const Argument& a : inst.arguments)
    out += " " + a.role + ":" + std::to_string(a.span.start) + "-" + std::to_string(a.span.end);
  return out;
}

struct LoadOptions {
  /// Drop invalid prop lines instead of failing on the first one.
  bool skip_invalid = false;
  /// Receives one "line N: reason" entry per dropped line when non-null.
  std::vector<std::string>* diagnostics = nullptr;
};

/// Reads prop lines and validates each against `sentences`.
inline std::vector<PropInstance> read_props(std::istream& in, const Corpus& sentences, const LoadOptions& options = {}) {
  std::vector<PropInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      PropInstance inst = parse_prop_line(line, line_no);
      validate_instance(inst, sentences.sentence(inst.sentence_id));
      out.push_back(std::move(inst));
    } catch (const Error& e) {
      std::string msg = "line " + std::to_string(line_no) + ": " + e.what();
      if (!options.skip_invalid) throw Error(e.code(), msg);
      if (options.diagnostics) options.diagnostics->push_back(std::move(msg));
    }
  }
  return out;
}

inline Corpus make_corpus(std::vector<Sentence> sentences, std::vector<PropInstance> instances) {
  Corpus corpus;
  for (Sentence& s : sentences) {
    std::string id = s.id;
    corpus.sentences[id] = std::make_shared<const Sentence>(std::move(s));
  }
  for (const PropInstance& inst : instances) validate_instance(inst, corpus.sentence(inst.sentence_id));
  corpus.instances = std::move(instances);
  return corpus;
}

inline Corpus load_corpus(std::istream& trees, std::istream& props, const LoadOptions& options = {}) {
  Corpus corpus = make_corpus(read_trees(trees), {});
  corpus.instances = read_props(props, corpus, options);
  return corpus;
}

inline Corpus load_corpus(const std::string& tree_path, const std::string& prop_path, const LoadOptions& options = {}) {
  std::ifstream trees(tree_path);
  if (!trees) throw Error(Errc::IoError, "cannot open tree file '" + tree_path + "'");
  std::ifstream props(prop_path);
  if (!props) throw Error(Errc::IoError, "cannot open prop file '" + prop_path + "'");
  return load_corpus(trees, props, options);
}

struct FilterReport {
  std::size_t kept_sentences = 0;
  std::size_t dropped_sentences = 0;
  std::size_t dropped_instances = 0;
};

/// Keeps only sentences annotated with exactly one predicate instance.
/// Sentences without any instance are dropped too.
inline Corpus filter_simple(const Corpus& corpus, FilterReport* report = nullptr) {
  std::map<std::string, std::size_t, std::less<>> counts;
  for (const PropInstance& inst : corpus.instances) ++counts[inst.sentence_id];
  Corpus out;
  FilterReport r;
  for (const PropInstance& inst : corpus.instances) {
    if (counts[inst.sentence_id] == 1) {
      out.instances.push_back(inst);
      out.sentences.emplace(inst.sentence_id, corpus.sentences.at(inst.sentence_id));
    } else {
      ++r.dropped_instances;
    }
  }
  r.kept_sentences = out.sentences.size();
  r.dropped_sentences = corpus.sentences.size() - out.sentences.size();
  if (report) *report = r;
  return out;
}

/// Role whose span equals `span` exactly, else NULL.
inline std::string gold_label_of(const PropInstance& inst, Span span) {
  for (const Argument& a : inst.arguments)
    if (a.span == span) return a.role;
  return std::string(kNullRole);
}

}  // namespace vsrl
