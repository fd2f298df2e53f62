// Candidate argument extraction for a predicate.
//
// Two extractors are provided. The sibling walk climbs from the predicate's
// preterminal to the root and collects the sisters met at every level,
// splitting a sister into its children when they form a coordination-like
// sequence (same category, pairwise different function tags). The 1-1 node
// mapping baseline turns every non-root node not dominating the predicate
// into a candidate.

#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vsrl/corpus.hpp"
#include "vsrl/error.hpp"
#include "vsrl/metrics.hpp"
#include "vsrl/treebank.hpp"

namespace vsrl {

struct CandidateSet {
  NodePath predicate_node;
  std::vector<Constituent> candidates;
};

/// Path to the preterminal over terminal `predicate_index`.
inline NodePath find_predicate_node(const Tree& tree, std::size_t predicate_index) {
  if (predicate_index >= tree.span().end)
    throw Error(Errc::IndexOutOfRange, "predicate index " + std::to_string(predicate_index) + " beyond " +
                                           std::to_string(tree.span().end) + " terminals");
  NodePath path;
  const Tree* node = &tree;
  while (!node->is_terminal()) {
    std::size_t i = 0;
    while (!node->children()[i].span().contains(predicate_index)) ++i;
    path.push_back(i);
    node = &node->children()[i];
  }
  return path;
}

/// How the sibling walk treats a splittable-looking sister whose children
/// fail the same-category / distinct-tag test.
enum class SiblingWalkMode {
  /// Collect nothing for that sister (the literal reading of the procedure).
  Strict,
  /// Collect the sister whole.
  Repaired,
};

inline CandidateSet extract_constituents(const Tree& tree, const NodePath& predicate_node,
                                         SiblingWalkMode mode = SiblingWalkMode::Strict,
                                         const PhrasalCategories& phrasal = {}) {
  if (!tree.contains(predicate_node)) throw Error(Errc::NodeNotInTree, "predicate node is not in the tree");
  CandidateSet out{predicate_node, {}};
  std::set<Span> seen;
  auto collect = [&](const NodePath& path) {
    Constituent c = collect_words(tree, path);
    if (seen.insert(c.span).second) out.candidates.push_back(std::move(c));
  };

  NodePath current = predicate_node;
  while (!current.empty()) {
    for (const NodePath& sister_path : sibling_paths(tree, current)) {
      const Tree& sister = tree.at(sister_path);
      const auto& kids = sister.children();
      if (kids.size() > 1 && is_phrase(kids[0], phrasal)) {
        bool same_type = true;
        bool diff_tag = true;
        const std::string& phrase_type = kids[0].category();
        std::string_view func_tag = kids[0].label().first_tag();
        for (std::size_t i = 1; i < kids.size(); ++i) {
          if (kids[i].category() != phrase_type) {
            same_type = false;
            break;
          }
          if (kids[i].label().first_tag() == func_tag) {
            diff_tag = false;
            break;
          }
        }
        if (same_type && diff_tag) {
          for (std::size_t i = 0; i < kids.size(); ++i) {
            NodePath child = sister_path;
            child.push_back(i);
            collect(child);
          }
        } else if (mode == SiblingWalkMode::Repaired) {
          collect(sister_path);
        }
      } else {
        collect(sister_path);
      }
    }
    current.pop_back();
  }
  return out;
}

/// Every non-root node whose span excludes the predicate terminal, one
/// candidate per distinct span (the shallowest node wins).
inline CandidateSet node_mapping_candidates(const Tree& tree, const NodePath& predicate_node) {
  if (!tree.contains(predicate_node)) throw Error(Errc::NodeNotInTree, "predicate node is not in the tree");
  const std::size_t predicate_index = tree.at(predicate_node).span().start;
  CandidateSet out{predicate_node, {}};
  std::set<Span> seen;
  tree.visit([&](const Tree& node, const NodePath& path) {
    if (path.empty() || node.span().contains(predicate_index)) return;
    if (!seen.insert(node.span()).second) return;
    out.candidates.push_back(collect_words(tree, path));
  });
  return out;
}

enum class ExtractorKind { SiblingWalk, NodeMapping };

struct ExtractorConfig {
  ExtractorKind kind = ExtractorKind::SiblingWalk;
  SiblingWalkMode mode = SiblingWalkMode::Strict;
  PhrasalCategories phrasal;

  CandidateSet run(const Tree& tree, const NodePath& predicate_node) const {
    if (kind == ExtractorKind::NodeMapping) return node_mapping_candidates(tree, predicate_node);
    return extract_constituents(tree, predicate_node, mode, phrasal);
  }
};

inline std::string_view extractor_name(ExtractorKind kind) {
  return kind == ExtractorKind::NodeMapping ? "node-mapping" : "alg1";
}

inline std::string_view walk_mode_name(SiblingWalkMode mode) {
  return mode == SiblingWalkMode::Strict ? "strict-alg1" : "repaired";
}

/// Unlabelled exact-span matching of candidates against gold arguments.
inline PRF score_extraction(const std::vector<CandidateSet>& candidate_sets, const std::vector<PropInstance>& gold) {
  if (candidate_sets.size() != gold.size())
    throw Error(Errc::LengthMismatch, std::to_string(candidate_sets.size()) + " candidate sets vs " +
                                          std::to_string(gold.size()) + " instances");
  std::size_t predicted = 0, gold_count = 0, matched = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::set<Span> gold_spans;
    for (const Argument& a : gold[i].arguments) gold_spans.insert(a.span);
    std::set<Span> candidate_spans;
    for (const Constituent& c : candidate_sets[i].candidates) candidate_spans.insert(c.span);
    predicted += candidate_spans.size();
    gold_count += gold_spans.size();
    for (const Span& s : candidate_spans) matched += gold_spans.count(s);
  }
  return make_prf(matched, predicted, gold_count);
}

/// Runs `extractor` over every instance of `corpus`.
inline std::vector<CandidateSet> extract_all(const Corpus& corpus, const ExtractorConfig& extractor) {
  std::vector<CandidateSet> out;
  out.reserve(corpus.instances.size());
  for (const PropInstance& inst : corpus.instances) {
    const Tree& tree = corpus.sentence(inst.sentence_id).tree;
    out.push_back(extractor.run(tree, find_predicate_node(tree, inst.predicate_index)));
  }
  return out;
}

}  // namespace vsrl
