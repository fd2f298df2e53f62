// Feature templates for a (candidate, predicate, tree) triple and the
// named feature-set presets phi0..phi16.
//
// Every template yields at most one categorical value, rendered as
// "Template=value". Rendered strings are the stable identity of a feature
// and are what model files store.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vsrl/clustering.hpp"
#include "vsrl/error.hpp"
#include "vsrl/sparse.hpp"
#include "vsrl/treebank.hpp"
#include "vsrl/utf8.hpp"

namespace vsrl {

/// Declaration order is the canonical output order of extract_features.
enum class Template {
  PhraseType,
  Path,
  PartialPath,
  Distance,
  Position,
  Voice,
  HeadWord,
  HeadWordCluster,
  Subcategorization,
  FunctionTag,
  PredicateType,
  Predicate,
  PredicateCluster,
};

inline constexpr std::array<Template, 13> kAllTemplates{
    Template::PhraseType,      Template::Path,        Template::PartialPath,   Template::Distance,
    Template::Position,        Template::Voice,       Template::HeadWord,      Template::HeadWordCluster,
    Template::Subcategorization, Template::FunctionTag, Template::PredicateType, Template::Predicate,
    Template::PredicateCluster};

inline std::string_view template_name(Template t) {
  switch (t) {
    case Template::PhraseType: return "PhraseType";
    case Template::Path: return "Path";
    case Template::PartialPath: return "PartialPath";
    case Template::Distance: return "Distance";
    case Template::Position: return "Position";
    case Template::Voice: return "Voice";
    case Template::HeadWord: return "HeadWord";
    case Template::HeadWordCluster: return "HeadWordCluster";
    case Template::Subcategorization: return "Subcat";
    case Template::FunctionTag: return "FunctionTag";
    case Template::PredicateType: return "PredicateType";
    case Template::Predicate: return "Predicate";
    case Template::PredicateCluster: return "PredicateCluster";
  }
  return "";
}

inline Template parse_template(std::string_view name) {
  for (Template t : kAllTemplates)
    if (template_name(t) == name) return t;
  throw Error(Errc::UnknownTemplate, std::string(name));
}

struct FeatureInstance {
  Template tmpl;
  std::string value;

  std::string rendered() const { return std::string(template_name(tmpl)) + "=" + value; }

  friend bool operator==(const FeatureInstance&, const FeatureInstance&) = default;
};

inline constexpr std::string_view kUpArrow = "↑";
inline constexpr std::string_view kDownArrow = "↓";
inline constexpr std::string_view kNoTag = "∅";

/// Lexical configuration of the templates.
struct FeatureOptions {
  /// Tokens that mark a clause as passive when they precede the predicate.
  std::set<std::string, std::less<>> passive_markers{"bị", "được"};
  /// Categories that delimit the clause searched for passive markers.
  std::set<std::string, std::less<>> clause_categories{"S"};
  /// Function tag that marks heads rather than grammatical functions.
  std::string head_marker = "H";
};

namespace detail {

inline std::size_t common_prefix(const NodePath& a, const NodePath& b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return n;
}

/// Categories from `node` up to depth `lca`, joined by up-arrows.
inline std::string ascending_path(const Tree& tree, const NodePath& node, std::size_t lca) {
  std::string out;
  for (std::size_t depth = node.size();; --depth) {
    out += tree.at(NodePath(node.begin(), node.begin() + static_cast<std::ptrdiff_t>(depth))).category();
    if (depth == lca) break;
    out += kUpArrow;
  }
  return out;
}

inline void require_distinct(const NodePath& a, const NodePath& b) {
  if (a == b) throw Error(Errc::SameNode, "candidate node is the predicate node");
}

}  // namespace detail

inline FeatureInstance phrase_type(const Tree& tree, const NodePath& candidate) {
  return {Template::PhraseType, tree.at(candidate).category()};
}

/// Categories from the candidate up to the lowest common ancestor ('↑'),
/// then down to the predicate ('↓').
inline FeatureInstance parse_tree_path(const Tree& tree, const NodePath& candidate, const NodePath& predicate) {
  detail::require_distinct(candidate, predicate);
  const std::size_t lca = detail::common_prefix(candidate, predicate);
  std::string out = detail::ascending_path(tree, candidate, lca);
  for (std::size_t depth = lca + 1; depth <= predicate.size(); ++depth) {
    out += kDownArrow;
    out += tree.at(NodePath(predicate.begin(), predicate.begin() + static_cast<std::ptrdiff_t>(depth))).category();
  }
  return {Template::Path, out};
}

/// Ascending half of the path, ending at the lowest common ancestor.
inline FeatureInstance partial_path(const Tree& tree, const NodePath& candidate, const NodePath& predicate) {
  detail::require_distinct(candidate, predicate);
  const std::size_t lca = detail::common_prefix(candidate, predicate);
  std::string out = detail::ascending_path(tree, candidate, lca);
  return {Template::PartialPath, out};
}

/// Edge count of the full path.
inline FeatureInstance distance(const NodePath& candidate, const NodePath& predicate) {
  detail::require_distinct(candidate, predicate);
  const std::size_t lca = detail::common_prefix(candidate, predicate);
  return {Template::Distance, std::to_string(candidate.size() - lca + predicate.size() - lca)};
}

/// "0" when the candidate ends at or before the predicate, else "1".
inline FeatureInstance position(Span candidate, std::size_t predicate_index) {
  return {Template::Position, candidate.end <= predicate_index ? "0" : "1"};
}

/// "1" active, "0" passive. A clause is passive when a passive marker
/// precedes the predicate inside the nearest enclosing clause node.
inline FeatureInstance voice(const Tree& tree, const NodePath& predicate, const FeatureOptions& options = {}) {
  if (tree.span().width() == 0) return {Template::Voice, "1"};
  NodePath clause = predicate;
  while (!clause.empty()) {
    clause.pop_back();
    if (options.clause_categories.count(tree.at(clause).category()) > 0) break;
  }
  const Tree& clause_node = tree.at(clause);
  const std::size_t predicate_index = tree.at(predicate).span().start;
  std::vector<std::string> tokens = clause_node.tokens();
  for (std::size_t i = 0; i < tokens.size() && clause_node.span().start + i < predicate_index; ++i)
    if (options.passive_markers.count(utf8::to_lower(tokens[i])) > 0) return {Template::Voice, "0"};
  return {Template::Voice, "1"};
}

/// First word of the candidate.
inline FeatureInstance head_word(const Tree& tree, const NodePath& candidate) {
  const Tree* node = &tree.at(candidate);
  while (!node->is_terminal()) node = &node->children().front();
  return {Template::HeadWord, *node->token()};
}

/// The predicate's parent production, e.g. "VP(V,NP)".
inline FeatureInstance subcategorization(const Tree& tree, const NodePath& predicate) {
  if (predicate.empty()) throw Error(Errc::PredicateIsRoot, "the predicate node has no parent");
  const Tree& parent = tree.at(NodePath(predicate.begin(), predicate.end() - 1));
  std::string out = parent.category() + "(";
  for (std::size_t i = 0; i < parent.children().size(); ++i) {
    if (i > 0) out += ',';
    out += parent.children()[i].category();
  }
  out += ')';
  return {Template::Subcategorization, out};
}

/// First function tag other than the head marker, or "∅".
inline FeatureInstance function_tag(const Tree& tree, const NodePath& candidate, const FeatureOptions& options = {}) {
  for (const std::string& tag : tree.at(candidate).label().function_tags)
    if (tag != options.head_marker && !tag.empty()) return {Template::FunctionTag, tag};
  return {Template::FunctionTag, std::string(kNoTag)};
}

inline FeatureInstance predicate_type(const Tree& tree, const NodePath& predicate) {
  return {Template::PredicateType, tree.at(predicate).category()};
}

inline std::string predicate_word(const Tree& tree, const NodePath& predicate) {
  const Tree* node = &tree.at(predicate);
  while (!node->is_terminal()) node = &node->children().front();
  return utf8::to_lower(*node->token());
}

inline FeatureInstance predicate(const Tree& tree, const NodePath& predicate_node) {
  return {Template::Predicate, predicate_word(tree, predicate_node)};
}

/// Cluster id of `word`; falls back to the lowercased form, then to the
/// unknown-word id.
inline std::string word_cluster(std::string_view word, const ClusterModel& model) {
  int id = assign_cluster(model, word);
  if (id == model.unknown_id()) id = assign_cluster(model, utf8::to_lower(word));
  return std::to_string(id);
}

struct FeatureSetConfig {
  std::string name;
  std::set<Template> templates;

  bool needs_clusters() const {
    return templates.count(Template::PredicateCluster) > 0 || templates.count(Template::HeadWordCluster) > 0;
  }

  friend bool operator==(const FeatureSetConfig&, const FeatureSetConfig&) = default;
};

namespace detail {

inline std::set<Template> with(std::set<Template> s, std::initializer_list<Template> add) {
  s.insert(add.begin(), add.end());
  return s;
}

inline std::set<Template> without(std::set<Template> s, std::initializer_list<Template> remove) {
  for (Template t : remove) s.erase(t);
  return s;
}

inline std::map<std::string, std::set<Template>, std::less<>> build_presets() {
  using T = Template;
  std::map<std::string, std::set<Template>, std::less<>> p;
  p["phi0"] = {T::PhraseType, T::Path, T::Position, T::Voice, T::HeadWord, T::Subcategorization, T::Predicate};
  p["phi1"] = with(p["phi0"], {T::FunctionTag});
  p["phi2"] = with(p["phi0"], {T::PredicateType});
  p["phi3"] = with(p["phi0"], {T::Distance});
  p["phi4"] = with(p["phi0"], {T::FunctionTag, T::Distance});
  p["phi5"] = with(without(p["phi4"], {T::Predicate}), {T::PredicateCluster});
  p["phi6"] = with(without(p["phi4"], {T::HeadWord}), {T::HeadWordCluster});
  p["phi7"] = with(without(p["phi4"], {T::Path}), {T::PartialPath});
  p["phi8"] = p["phi5"];
  p["phi9"] = without(p["phi8"], {T::FunctionTag});
  p["phi10"] = without(p["phi8"], {T::PredicateCluster});
  p["phi11"] = without(p["phi8"], {T::HeadWord});
  p["phi12"] = without(p["phi8"], {T::Path});
  p["phi13"] = without(p["phi8"], {T::Position});
  p["phi14"] = without(p["phi8"], {T::Voice});
  p["phi15"] = without(p["phi8"], {T::Subcategorization});
  std::set<Template> both;
  std::set_intersection(p["phi10"].begin(), p["phi10"].end(), p["phi15"].begin(), p["phi15"].end(),
                        std::inserter(both, both.end()));
  p["phi16"] = both;
  return p;
}

}  // namespace detail

inline const std::map<std::string, std::set<Template>, std::less<>>& feature_presets() {
  static const auto presets = detail::build_presets();
  return presets;
}

inline FeatureSetConfig feature_preset(std::string_view name) {
  const auto& presets = feature_presets();
  auto it = presets.find(name);
  if (it == presets.end()) throw Error(Errc::UnknownFeatureSet, std::string(name));
  return {it->first, it->second};
}

/// A preset name, or a comma-separated list of template names.
inline FeatureSetConfig parse_feature_set(std::string_view spec) {
  if (feature_presets().count(spec) > 0) return feature_preset(spec);
  if (spec.starts_with("phi")) throw Error(Errc::UnknownFeatureSet, std::string(spec));
  FeatureSetConfig config{std::string(spec), {}};
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t comma = spec.find(',', pos);
    std::string_view name = spec.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (!name.empty()) config.templates.insert(parse_template(name));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return config;
}

inline std::string describe_templates(const FeatureSetConfig& config) {
  std::string out;
  for (Template t : config.templates) {
    if (!out.empty()) out += ',';
    out += template_name(t);
  }
  return out;
}

/// Per-predicate values shared by all candidates of one instance.
struct PredicateContext {
  const Tree& tree;
  NodePath predicate;
  std::size_t predicate_index;
  std::optional<std::string> subcat;
  std::string voice;
  std::string word;
  std::string type;

  PredicateContext(const Tree& tree_, NodePath predicate_, const FeatureOptions& options = {})
      : tree(tree_),
        predicate(std::move(predicate_)),
        predicate_index(tree.at(predicate).span().start),
        voice(vsrl::voice(tree, predicate, options).value),
        word(predicate_word(tree, predicate)),
        type(tree.at(predicate).category()) {
    if (!predicate.empty()) subcat = subcategorization(tree, predicate).value;
  }
};

/// One instance per template in `config`, in canonical template order.
inline std::vector<FeatureInstance> extract_features(const Constituent& candidate, const PredicateContext& ctx,
                                                     const FeatureSetConfig& config,
                                                     const ClusterModel* clusters = nullptr,
                                                     const FeatureOptions& options = {}) {
  if (config.needs_clusters() && clusters == nullptr)
    throw Error(Errc::MissingClusterModel, "feature set '" + config.name + "' needs a cluster model");
  std::vector<FeatureInstance> out;
  out.reserve(config.templates.size());
  const Tree& tree = ctx.tree;
  for (Template t : config.templates) {
    switch (t) {
      case Template::PhraseType: out.push_back(phrase_type(tree, candidate.node)); break;
      case Template::Path: out.push_back(parse_tree_path(tree, candidate.node, ctx.predicate)); break;
      case Template::PartialPath: out.push_back(partial_path(tree, candidate.node, ctx.predicate)); break;
      case Template::Distance: out.push_back(distance(candidate.node, ctx.predicate)); break;
      case Template::Position: out.push_back(position(candidate.span, ctx.predicate_index)); break;
      case Template::Voice: out.push_back({t, ctx.voice}); break;
      case Template::HeadWord: out.push_back(head_word(tree, candidate.node)); break;
      case Template::HeadWordCluster:
        out.push_back({t, word_cluster(head_word(tree, candidate.node).value, *clusters)});
        break;
      case Template::Subcategorization:
        if (!ctx.subcat) throw Error(Errc::PredicateIsRoot, "the predicate node has no parent");
        out.push_back({t, *ctx.subcat});
        break;
      case Template::FunctionTag: out.push_back(function_tag(tree, candidate.node, options)); break;
      case Template::PredicateType: out.push_back({t, ctx.type}); break;
      case Template::Predicate: out.push_back({t, ctx.word}); break;
      case Template::PredicateCluster: out.push_back({t, word_cluster(ctx.word, *clusters)}); break;
    }
  }
  return out;
}

inline std::vector<FeatureInstance> extract_features(const Constituent& candidate, const NodePath& predicate_node,
                                                     const Tree& tree, const FeatureSetConfig& config,
                                                     const ClusterModel* clusters = nullptr,
                                                     const FeatureOptions& options = {}) {
  PredicateContext ctx(tree, predicate_node, options);
  return extract_features(candidate, ctx, config, clusters, options);
}

/// Rendered feature string to dense index. Frozen dictionaries never grow.
class FeatureDictionary {
 public:
  std::optional<std::uint32_t> find(std::string_view feature) const {
    auto it = index_.find(std::string(feature));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Index of `feature`, adding it when the dictionary is not frozen.
  std::optional<std::uint32_t> lookup_or_add(const std::string& feature) {
    if (auto found = find(feature)) return found;
    if (frozen_) return std::nullopt;
    auto id = static_cast<std::uint32_t>(names_.size());
    index_.emplace(feature, id);
    names_.push_back(feature);
    return id;
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  static FeatureDictionary from_names(std::vector<std::string> names, bool frozen = true) {
    FeatureDictionary d;
    for (const std::string& n : names) d.lookup_or_add(n);
    d.frozen_ = frozen;
    return d;
  }

  friend bool operator==(const FeatureDictionary& a, const FeatureDictionary& b) {
    return a.names_ == b.names_ && a.frozen_ == b.frozen_;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
  bool frozen_ = false;
};

/// Grows `dict` with unseen features unless it is frozen.
inline FeatureVector vectorize(const std::vector<FeatureInstance>& instances, FeatureDictionary& dict) {
  std::vector<std::uint32_t> raw;
  raw.reserve(instances.size());
  for (const FeatureInstance& f : instances)
    if (auto id = dict.lookup_or_add(f.rendered())) raw.push_back(*id);
  return FeatureVector::from_unsorted(std::move(raw));
}

/// Lookup-only variant: unseen features are dropped.
inline FeatureVector vectorize(const std::vector<FeatureInstance>& instances, const FeatureDictionary& dict) {
  std::vector<std::uint32_t> raw;
  raw.reserve(instances.size());
  for (const FeatureInstance& f : instances)
    if (auto id = dict.find(f.rendered())) raw.push_back(*id);
  return FeatureVector::from_unsorted(std::move(raw));
}

}  // namespace vsrl
