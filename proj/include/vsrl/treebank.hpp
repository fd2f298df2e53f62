// Bracketed constituency trees: parsing, navigation, serialization.
//
// A node label such as "NP-SUB" or "V-H" is split on '-' into a syntactic
// category and an ordered list of function tags. Terminal tokens hang
// directly off their preterminal, so "(N-H Nam)" is a single node carrying
// both the label N-H and the token "Nam". Multi-word tokens are written
// with '_' in files and hold spaces in memory.

#pragma once

#include <cstddef>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vsrl/error.hpp"

namespace vsrl {

/// Half-open interval [start, end) over terminal indices.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t width() const { return end - start; }
  bool contains(std::size_t index) const { return start <= index && index < end; }
  bool overlaps(const Span& o) const { return start < o.end && o.start < end; }

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct NodeLabel {
  std::string category;
  std::vector<std::string> function_tags;
  std::string raw;

  /// First function tag, or empty when the label has none.
  std::string_view first_tag() const {
    return function_tags.empty() ? std::string_view{} : std::string_view{function_tags.front()};
  }

  friend bool operator==(const NodeLabel&, const NodeLabel&) = default;
};

inline NodeLabel parse_label(std::string_view raw) {
  if (raw.empty()) throw Error(Errc::EmptyLabel, "empty node label");
  NodeLabel label;
  label.raw = std::string(raw);
  std::size_t pos = raw.find('-');
  label.category = std::string(raw.substr(0, pos));
  if (label.category.empty()) throw Error(Errc::EmptyLabel, "label '" + label.raw + "' has an empty category");
  while (pos != std::string_view::npos) {
    std::size_t next = raw.find('-', pos + 1);
    label.function_tags.emplace_back(raw.substr(pos + 1, next == std::string_view::npos ? next : next - pos - 1));
    pos = next;
  }
  return label;
}

/// Path from the root as a sequence of child indices; the root is {}.
using NodePath = std::vector<std::size_t>;

class Tree {
 public:
  Tree(NodeLabel label, std::string token)
      : label_(std::move(label)), token_(std::move(token)), span_{0, 1} {}

  Tree(NodeLabel label, std::vector<Tree> children) : label_(std::move(label)), children_(std::move(children)) {
    if (children_.empty())
      throw Error(Errc::EmptyInput, "internal node '" + label_.raw + "' has no children");
    std::size_t offset = 0;
    for (Tree& child : children_) {
      child.shift(offset - child.span_.start);
      offset = child.span_.end;
    }
    span_ = {0, offset};
  }

  const NodeLabel& label() const { return label_; }
  const std::string& category() const { return label_.category; }
  const std::vector<Tree>& children() const { return children_; }
  const std::optional<std::string>& token() const { return token_; }
  Span span() const { return span_; }
  bool is_terminal() const { return token_.has_value(); }

  /// Node at `path`; throws NodeNotInTree when the path leaves the tree.
  const Tree& at(const NodePath& path) const {
    const Tree* node = this;
    for (std::size_t index : path) {
      if (index >= node->children_.size()) throw Error(Errc::NodeNotInTree, "path leaves the tree");
      node = &node->children_[index];
    }
    return *node;
  }

  bool contains(const NodePath& path) const {
    const Tree* node = this;
    for (std::size_t index : path) {
      if (index >= node->children_.size()) return false;
      node = &node->children_[index];
    }
    return true;
  }

  /// Pre-order traversal; the visitor receives each node and its path.
  void visit(const std::function<void(const Tree&, const NodePath&)>& visitor) const {
    NodePath path;
    visit_impl(visitor, path);
  }

  std::vector<std::string> tokens() const {
    std::vector<std::string> out;
    out.reserve(span_.width());
    collect_tokens(out);
    return out;
  }

  friend bool operator==(const Tree& a, const Tree& b) {
    return a.label_ == b.label_ && a.token_ == b.token_ && a.span_ == b.span_ && a.children_ == b.children_;
  }

 private:
  void shift(std::size_t delta) {
    span_.start += delta;
    span_.end += delta;
    for (Tree& child : children_) child.shift(delta);
  }

  void visit_impl(const std::function<void(const Tree&, const NodePath&)>& visitor, NodePath& path) const {
    visitor(*this, path);
    for (std::size_t i = 0; i < children_.size(); ++i) {
      path.push_back(i);
      children_[i].visit_impl(visitor, path);
      path.pop_back();
    }
  }

  void collect_tokens(std::vector<std::string>& out) const {
    if (token_) {
      out.push_back(*token_);
      return;
    }
    for (const Tree& child : children_) child.collect_tokens(out);
  }

  NodeLabel label_;
  std::vector<Tree> children_;
  std::optional<std::string> token_;
  Span span_;
};

struct Sentence {
  std::string id;
  Tree tree;
  std::vector<std::string> tokens;

  Sentence(std::string id_, Tree tree_) : id(std::move(id_)), tree(std::move(tree_)), tokens(tree.tokens()) {}
};

/// Categories counted as phrasal by is_phrase. Treebank tagsets vary, so
/// this is configuration rather than a constant.
struct PhrasalCategories {
  std::set<std::string, std::less<>> categories{"NP", "VP", "AP", "PP", "QP", "S", "SBAR", "MDP", "WHNP", "WHPP"};

  bool contains(std::string_view category) const { return categories.find(category) != categories.end(); }
};

inline bool is_phrase(const Tree& node, const PhrasalCategories& phrasal = {}) {
  return !node.is_terminal() && phrasal.contains(node.category());
}

/// A contiguous token span dominated by one tree node.
struct Constituent {
  Span span;
  std::string text;
  NodePath node;

  friend bool operator==(const Constituent&, const Constituent&) = default;
};

inline std::string join_tokens(const std::vector<std::string>& tokens, Span span) {
  std::string text;
  for (std::size_t i = span.start; i < span.end; ++i) {
    if (i > span.start) text += ' ';
    text += tokens[i];
  }
  return text;
}

inline Constituent collect_words(const Tree& root, const NodePath& path) {
  const Tree& node = root.at(path);
  std::vector<std::string> tokens = node.tokens();
  Span local{0, tokens.size()};
  return Constituent{node.span(), join_tokens(tokens, local), path};
}

/// Sisters of the node at `path`, in original order.
inline std::vector<NodePath> sibling_paths(const Tree& root, const NodePath& path) {
  if (path.empty()) throw Error(Errc::NodeIsRoot, "the root has no siblings");
  if (!root.contains(path)) throw Error(Errc::NodeNotInTree, "sibling query on a foreign path");
  NodePath parent(path.begin(), path.end() - 1);
  const Tree& p = root.at(parent);
  std::vector<NodePath> out;
  for (std::size_t i = 0; i < p.children().size(); ++i) {
    if (i == path.back()) continue;
    NodePath s = parent;
    s.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<std::reference_wrapper<const Tree>> siblings(const Tree& root, const NodePath& path) {
  std::vector<std::reference_wrapper<const Tree>> out;
  for (const NodePath& s : sibling_paths(root, path)) out.emplace_back(root.at(s));
  return out;
}

namespace detail {

inline std::string underscores_to_spaces(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c == '_') c = ' ';
  return out;
}

inline std::string spaces_to_underscores(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c == ' ') c = '_';
  return out;
}

class BracketReader {
 public:
  explicit BracketReader(std::string_view text) : text_(text) {}

  Tree read_document() {
    skip_space();
    if (pos_ == text_.size()) throw Error(Errc::EmptyInput, "no tree in input");
    Tree tree = read_node();
    skip_space();
    if (pos_ != text_.size())
      throw Error(Errc::UnbalancedParens, "trailing input at position " + std::to_string(pos_));
    return tree;
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string_view read_atom() {
    std::size_t begin = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' && text_[pos_] != ')') ++pos_;
    return text_.substr(begin, pos_ - begin);
  }

  [[noreturn]] void unbalanced(std::size_t at) const {
    throw Error(Errc::UnbalancedParens, "unbalanced parentheses at position " + std::to_string(at));
  }

  Tree read_node() {
    std::size_t open = pos_;
    if (pos_ >= text_.size() || text_[pos_] != '(') unbalanced(pos_);
    ++pos_;
    // The label starts right after the bracket: "( a)" has no label.
    std::string_view raw = read_atom();
    if (raw.empty()) {
      if (pos_ >= text_.size()) unbalanced(open);
      throw Error(Errc::EmptyLabel, "missing label at position " + std::to_string(open));
    }
    NodeLabel label = parse_label(raw);

    std::vector<Tree> children;
    std::optional<std::string> token;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) unbalanced(open);
      char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        if (token) both(open);
        children.push_back(read_node());
      } else {
        if (token || !children.empty()) both(open);
        token = underscores_to_spaces(read_atom());
      }
    }
    if (token) return Tree(std::move(label), std::move(*token));
    if (children.empty()) throw Error(Errc::EmptyInput, "node at position " + std::to_string(open) + " is empty");
    return Tree(std::move(label), std::move(children));
  }

  [[noreturn]] void both(std::size_t open) const {
    throw Error(Errc::NodeWithBothChildrenAndToken,
                "node at position " + std::to_string(open) + " mixes a token with other content");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline void serialize_into(const Tree& tree, std::string& out) {
  out += '(';
  out += tree.label().raw;
  out += ' ';
  if (tree.is_terminal()) {
    out += spaces_to_underscores(*tree.token());
  } else {
    for (std::size_t i = 0; i < tree.children().size(); ++i) {
      if (i > 0) out += ' ';
      serialize_into(tree.children()[i], out);
    }
  }
  out += ')';
}

}  // namespace detail

inline Tree parse_bracketed(std::string_view text) { return detail::BracketReader(text).read_document(); }

/// Canonical single-line bracketing; parse_bracketed inverts it.
inline std::string serialize(const Tree& tree) {
  std::string out;
  detail::serialize_into(tree, out);
  return out;
}

/// Reads a tree file: one bracketed tree per line, '#' comments and blank
/// lines skipped. A line may carry an explicit id before the tree
/// ("s17 (S ...)"); otherwise trees are named s1, s2, ... in file order.
inline std::vector<Sentence> read_trees(std::istream& in) {
  std::vector<Sentence> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t ordinal = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    ++ordinal;
    std::string id = "s" + std::to_string(ordinal);
    std::string_view body(line);
    body.remove_prefix(first);
    if (body.front() != '(') {
      std::size_t gap = body.find_first_of(" \t");
      if (gap == std::string_view::npos)
        throw Error(Errc::EmptyInput, "line " + std::to_string(line_no) + ": id without a tree");
      id = std::string(body.substr(0, gap));
      body.remove_prefix(gap);
    }
    try {
      out.emplace_back(std::move(id), parse_bracketed(body));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<Sentence> read_tree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open tree file '" + path + "'");
  return read_trees(in);
}

}  // namespace vsrl
