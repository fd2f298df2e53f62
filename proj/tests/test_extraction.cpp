#include <gtest/gtest.h>

#include <random>
#include <set>

#include "support.hpp"
#include "vsrl/extraction.hpp"

using namespace vsrl;
using testing_support::kSimpleClause;
using testing_support::kRelativeClause;
using testing_support::texts;

namespace {

using Texts = std::vector<std::string>;

std::multiset<std::string> as_set(const CandidateSet& set) {
  auto t = texts(set);
  return {t.begin(), t.end()};
}

}  // namespace

TEST(Extraction, FindPredicateNode) {
  Tree t = parse_bracketed(kRelativeClause);
  NodePath p = find_predicate_node(t, 3);
  EXPECT_EQ(p, (NodePath{1, 1, 0, 1, 0}));
  EXPECT_EQ(t.at(p).label().raw, "V-H");
  EXPECT_EQ(*t.at(p).token(), "là");

  Tree single = parse_bracketed("(X a)");
  EXPECT_EQ(find_predicate_node(single, 0), NodePath{});

  try {
    find_predicate_node(parse_bracketed(kSimpleClause), 99);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IndexOutOfRange);
  }
}

TEST(Extraction, RelativeClauseBothModes) {
  Tree t = parse_bracketed(kRelativeClause);
  NodePath p = find_predicate_node(t, 3);
  for (auto mode : {SiblingWalkMode::Strict, SiblingWalkMode::Repaired}) {
    CandidateSet set = extract_constituents(t, p, mode);
    EXPECT_EQ(as_set(set), (std::multiset<std::string>{"Bà", "nói", "nó", "con trai tôi mà"}));
    EXPECT_EQ(set.candidates.size(), 4u);
  }
}

TEST(Extraction, SimpleClause) {
  Tree t = parse_bracketed(kSimpleClause);
  CandidateSet set = extract_constituents(t, find_predicate_node(t, 1));
  // Walk order: the predicate's sisters first, then higher levels.
  EXPECT_EQ(texts(set), (Texts{"bóng", "Nam"}));
  EXPECT_EQ(set.candidates[0].node, (NodePath{1, 1}));
  EXPECT_EQ(set.candidates[1].node, (NodePath{0}));
}

TEST(Extraction, NoSiblingsAnywhere) {
  Tree t = parse_bracketed("(S (VP (V-H chạy)))");
  EXPECT_TRUE(extract_constituents(t, find_predicate_node(t, 0)).candidates.empty());
  Tree single = parse_bracketed("(X a)");
  EXPECT_TRUE(extract_constituents(single, {}).candidates.empty());
}

TEST(Extraction, SplitsCoordinatedSister) {
  // NP whose children are NPs with distinct tags: collect the children.
  Tree t = parse_bracketed("(S (NP-SUB (N-H Lan)) (VP (V-H tặng) (NP (NP-IOB (N-H Huy)) (NP-DOB (N-H hoa)))))");
  CandidateSet set = extract_constituents(t, find_predicate_node(t, 1));
  EXPECT_EQ(texts(set), (Texts{"Huy", "hoa", "Lan"}));
}

TEST(Extraction, StrictAndRepairedDiffer) {
  // NP over two same-tag NPs: the split test fails. Strict collects
  // nothing for that sister; repaired keeps it whole.
  Tree t = parse_bracketed("(S (NP-SUB (N-H Lan)) (VP (V-H mua) (NP (NP-DOB (N-H sách)) (NP-DOB (N-H vở)))))");
  NodePath p = find_predicate_node(t, 1);
  EXPECT_EQ(texts(extract_constituents(t, p, SiblingWalkMode::Strict)), (Texts{"Lan"}));
  EXPECT_EQ(texts(extract_constituents(t, p, SiblingWalkMode::Repaired)), (Texts{"sách vở", "Lan"}));

  // Different category of the first child: same outcome.
  Tree u = parse_bracketed("(S (NP-SUB (N-H Lan)) (VP (V-H thấy) (S (NP (N-H nó)) (VP (V-H đi)))))");
  NodePath q = find_predicate_node(u, 1);
  EXPECT_EQ(texts(extract_constituents(u, q, SiblingWalkMode::Strict)), (Texts{"Lan"}));
  EXPECT_EQ(texts(extract_constituents(u, q, SiblingWalkMode::Repaired)), (Texts{"nó đi", "Lan"}));
}

TEST(Extraction, SingleChildSisterStaysWhole) {
  // One child only: never split, whatever its category.
  Tree t = parse_bracketed("(S (NP (NP-SUB (N-H Lan))) (VP (V-H ngủ)))");
  EXPECT_EQ(texts(extract_constituents(t, find_predicate_node(t, 1))), (Texts{"Lan"}));
}

TEST(Extraction, NodeMappingSimpleClause) {
  Tree t = parse_bracketed(kSimpleClause);
  CandidateSet set = node_mapping_candidates(t, find_predicate_node(t, 1));
  EXPECT_EQ(texts(set), (Texts{"Nam", "bóng"}));
  // Shallowest node kept per span.
  EXPECT_EQ(set.candidates[0].node, (NodePath{0}));
}

TEST(Extraction, NodeMappingEdgeCases) {
  Tree single = parse_bracketed("(X a)");
  EXPECT_TRUE(node_mapping_candidates(single, {}).candidates.empty());
  Tree chain = parse_bracketed("(S (NP (NP (NP (N-H a)))) (V-H b))");
  CandidateSet set = node_mapping_candidates(chain, find_predicate_node(chain, 1));
  ASSERT_EQ(set.candidates.size(), 1u);
  EXPECT_EQ(set.candidates[0].node, (NodePath{0}));
}

TEST(Extraction, CandidateInvariantsOnRandomTrees) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    Tree t = testing_support::random_tree(rng);
    for (std::size_t idx = 0; idx < t.span().end; ++idx) {
      NodePath p = find_predicate_node(t, idx);
      for (auto mode : {SiblingWalkMode::Strict, SiblingWalkMode::Repaired}) {
        CandidateSet walk = extract_constituents(t, p, mode);
        std::set<Span> spans;
        for (const Constituent& c : walk.candidates) {
          EXPECT_FALSE(c.span.contains(idx));
          EXPECT_TRUE(spans.insert(c.span).second);
          EXPECT_EQ(t.at(c.node).span(), c.span);
        }
        // Sibling-walk candidates never overlap one another.
        for (auto a = spans.begin(); a != spans.end(); ++a)
          for (auto b = std::next(a); b != spans.end(); ++b) EXPECT_FALSE(a->overlaps(*b));
      }
      // Every node mapping candidate is a node, and every node off the
      // predicate path has its span represented.
      CandidateSet nm = node_mapping_candidates(t, p);
      std::set<Span> nm_spans;
      for (const Constituent& c : nm.candidates) nm_spans.insert(c.span);
      t.visit([&](const Tree& node, const NodePath& path) {
        if (path.empty() || node.span().contains(idx)) return;
        EXPECT_TRUE(nm_spans.count(node.span()));
      });
    }
  }
}

TEST(Extraction, ScoreExtraction) {
  Tree t = parse_bracketed(kSimpleClause);
  CandidateSet set = extract_constituents(t, find_predicate_node(t, 1));
  PropInstance exact{"s1", 1, {{{0, 1}, "Arg0"}, {{2, 3}, "Arg1"}}};
  PRF p = score_extraction({set}, {exact});
  EXPECT_EQ(p.precision, 1.0);
  EXPECT_EQ(p.recall, 1.0);
  EXPECT_EQ(p.f1, 1.0);

  PRF none = score_extraction({CandidateSet{}}, {exact});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);

  // 3 candidates, 2 match, 4 gold.
  Tree u = parse_bracketed("(S (A a) (B b) (C c) (V-H v) (D d) (E e))");
  CandidateSet three{find_predicate_node(u, 3), {collect_words(u, {0}), collect_words(u, {1}), collect_words(u, {4})}};
  PropInstance four{"s1", 3, {{{0, 1}, "Arg0"}, {{1, 2}, "Arg1"}, {{2, 3}, "Arg2"}, {{5, 6}, "Arg3"}}};
  PRF q = score_extraction({three}, {four});
  EXPECT_DOUBLE_EQ(q.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(q.recall, 0.5);
  EXPECT_DOUBLE_EQ(q.f1, 4.0 / 7.0);

  EXPECT_THROW(score_extraction({set, set}, {exact}), Error);
}

TEST(Extraction, SiblingWalkBeatsNodeMappingOnSyntheticCorpus) {
  const std::string dir = testing_support::kDataDir + "/synthetic/";
  Corpus c = filter_simple(load_corpus(dir + "corpus.trees", dir + "corpus.props"));
  ExtractorConfig walk, mapping;
  mapping.kind = ExtractorKind::NodeMapping;
  PRF a = score_extraction(extract_all(c, walk), c.instances);
  PRF b = score_extraction(extract_all(c, mapping), c.instances);
  // The corpus is built so every gold argument is reachable by the walk.
  EXPECT_EQ(a.recall, 1.0);
  EXPECT_GT(a.f1, b.f1);
}
