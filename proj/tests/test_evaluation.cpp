#include <gtest/gtest.h>

#include <random>
#include <set>

#include "support.hpp"
#include "vsrl/evaluation.hpp"

using namespace vsrl;

namespace {

PipelineConfig phi(const char* name) {
  PipelineConfig c;
  c.features = feature_preset(name);
  return c;
}

std::vector<PropInstance> gold_three() {
  return {{"a", 1, {{{0, 1}, "Arg0"}, {{2, 3}, "Arg1"}, {{1, 2}, "V"}}}, {"b", 0, {{{1, 4}, "ArgM-TMP"}}}};
}

Errc score_error(const std::vector<LabelledSentence>& pred, const std::vector<PropInstance>& gold) {
  try {
    score_labelled(pred, gold);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "scored misaligned input";
  return Errc::IoError;
}

}  // namespace

TEST(Evaluation, IdenticalLabelsScoreOne) {
  std::vector<LabelledSentence> pred;
  for (const auto& g : gold_three()) pred.push_back({g.sentence_id, g.predicate_index, g.arguments});
  PRF p = score_labelled(pred, gold_three());
  EXPECT_EQ(p.matched, 3u);
  EXPECT_EQ(p.gold, 3u);
  EXPECT_EQ(p.f1, 1.0);
}

TEST(Evaluation, PartialCredit) {
  // Right span, wrong role: counted as a wrong prediction.
  std::vector<LabelledSentence> pred{{"a", 1, {{{0, 1}, "Arg0"}, {{2, 3}, "Arg2"}}}, {"b", 0, {{{1, 4}, "ArgM-TMP"}}}};
  PRF p = score_labelled(pred, gold_three());
  EXPECT_DOUBLE_EQ(p.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(p.recall, 2.0 / 3.0);

  // One of two predicted, both correct: P 1, R 2/3, F1 4/5.
  pred = {{"a", 1, {{{0, 1}, "Arg0"}, {{2, 3}, "Arg1"}}}};
  p = score_labelled(pred, gold_three());
  EXPECT_DOUBLE_EQ(p.precision, 1.0);
  EXPECT_DOUBLE_EQ(p.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(p.f1, 0.8);

  // Duplicate predictions absorb one gold argument only; NULL is ignored.
  pred = {{"a", 1, {{{0, 1}, "Arg0"}, {{0, 1}, "Arg0"}, {{2, 3}, "NULL"}}}};
  p = score_labelled(pred, gold_three());
  EXPECT_EQ(p.matched, 1u);
  EXPECT_EQ(p.predicted, 2u);
  EXPECT_DOUBLE_EQ(p.precision, 0.5);

  // Nothing predicted.
  p = score_labelled({}, gold_three());
  EXPECT_EQ(p.f1, 0.0);
  EXPECT_EQ(p.precision, 0.0);
}

TEST(Evaluation, AlignmentErrors) {
  EXPECT_EQ(score_error({{"zzz", 0, {}}}, gold_three()), Errc::AlignmentError);
  auto twice = gold_three();
  twice.push_back(twice.front());
  EXPECT_EQ(score_error({}, twice), Errc::AlignmentError);
}

TEST(Evaluation, F1MatchesHarmonicMean) {
  std::mt19937_64 rng(2017);
  for (int i = 0; i < 10000; ++i) {
    std::size_t predicted = rng() % 50, gold = rng() % 50;
    std::size_t matched = std::min(predicted, gold) == 0 ? 0 : rng() % (std::min(predicted, gold) + 1);
    PRF p = make_prf(matched, predicted, gold);
    // Count form of the harmonic mean: 2m / (predicted + gold).
    double oracle = predicted + gold == 0 ? 0.0 : 2.0 * static_cast<double>(matched) / static_cast<double>(predicted + gold);
    ASSERT_NEAR(p.f1, oracle, 1e-12) << matched << "/" << predicted << "/" << gold;
    if (p.precision + p.recall > 0) {
      ASSERT_NEAR(p.f1, 2 * p.precision * p.recall / (p.precision + p.recall), 1e-12);
    }
    ASSERT_LE(p.f1, std::max(p.precision, p.recall) + 1e-15);
    ASSERT_GE(p.f1, std::min(p.precision, p.recall) - 1e-15);
  }
  EXPECT_EQ(make_prf(0, 0, 0).f1, 0.0);
  EXPECT_EQ(make_prf(0, 5, 0).recall, 0.0);
  EXPECT_EQ(make_prf(0, 0, 5).precision, 0.0);
}

TEST(Evaluation, Folds) {
  auto folds = make_folds(10, 2, 1);
  ASSERT_EQ(folds.size(), 2u);
  EXPECT_EQ(folds[0].size(), 5u);
  EXPECT_EQ(folds[1].size(), 5u);
  for (std::size_t n : {7u, 10u, 23u})
    for (std::size_t k : {2u, 3u, 7u}) {
      auto f = make_folds(n, k, 5);
      std::set<std::size_t> all;
      std::size_t smallest = n, largest = 0;
      for (const auto& fold : f) {
        all.insert(fold.begin(), fold.end());
        smallest = std::min(smallest, fold.size());
        largest = std::max(largest, fold.size());
      }
      EXPECT_EQ(all.size(), n);
      EXPECT_LE(largest - smallest, 1u);
      EXPECT_EQ(make_folds(n, k, 5), f);
    }
  EXPECT_THROW(make_folds(10, 1, 1), Error);
  EXPECT_THROW(make_folds(3, 4, 1), Error);
}

TEST(Evaluation, CrossValidationIsDeterministic) {
  Corpus c = testing_support::toy_corpus(20, 3);
  CvReport a = cross_validate(c, phi("phi1"), 4, 7);
  CvReport b = cross_validate(c, phi("phi1"), 4, 7, 4);
  EXPECT_EQ(a.folds, b.folds);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(cv_report_json(a).dump(), cv_report_json(b).dump());
  EXPECT_EQ(a.fold_sizes, (std::vector<std::size_t>{5, 5, 5, 5}));
  // Function tags decide every role in the toy corpus.
  EXPECT_DOUBLE_EQ(a.mean.f1, 1.0);
}

TEST(Evaluation, AblationSharesFolds) {
  Corpus c = testing_support::toy_corpus(20, 4);
  auto rows = ablation_suite(c, {"phi0", "phi1"}, phi("phi0"), 5, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].first, "phi0");
  EXPECT_EQ(rows[1].first, "phi1");
  EXPECT_EQ(rows[0].second.fold_sizes, rows[1].second.fold_sizes);
  EXPECT_GE(rows[1].second.mean.f1, rows[0].second.mean.f1);
  EXPECT_EQ(rows[0].second.mean, cross_validate(c, phi("phi0"), 5, 2).mean);
  EXPECT_TRUE(ablation_suite(c, {}, phi("phi0"), 5, 2).empty());
}

TEST(Evaluation, LearningCurve) {
  Corpus c = testing_support::toy_corpus(16, 5);
  auto full = learning_curve(c, {16}, phi("phi1"), 4, 9);
  ASSERT_EQ(full.size(), 1u);
  CvReport direct = cross_validate(c, phi("phi1"), 4, 9);
  EXPECT_EQ(full[0].report.folds, direct.folds);
  EXPECT_EQ(full[0].size, 16u);
  EXPECT_TRUE(learning_curve(c, {}, phi("phi1"), 4, 9).empty());

  auto small = learning_curve_sample(16, 6, 9), large = learning_curve_sample(16, 11, 9);
  EXPECT_TRUE(std::is_sorted(small.begin(), small.end()));
  EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));

  auto points = learning_curve(c, {8, 12}, phi("phi1"), 4, 9);
  EXPECT_EQ(points[0].report.fold_sizes, (std::vector<std::size_t>{2, 2, 2, 2}));
  EXPECT_EQ(points[1].report.fold_sizes, (std::vector<std::size_t>{3, 3, 3, 3}));

  try {
    learning_curve(c, {17}, phi("phi1"), 4, 9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SizeExceedsCorpus);
  }
  try {
    learning_curve(c, {12, 8}, phi("phi1"), 4, 9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidConfig);
  }
}

TEST(Evaluation, Reports) {
  std::string table = prf_table({{"sibling walk", make_prf(1, 2, 4)}, {"x", make_prf(0, 0, 0)}}, "Extractor");
  EXPECT_NE(table.find("Extractor"), std::string::npos);
  EXPECT_NE(table.find("50.00%"), std::string::npos);
  EXPECT_NE(table.find("33.33%"), std::string::npos);
  EXPECT_NE(table.find("0.00%"), std::string::npos);
  EXPECT_EQ(percent(0.123456), "12.35%");

  Corpus c = testing_support::toy_corpus(6);
  CvReport r = cross_validate(c, phi("phi0"), 3, 1);
  std::string text = cv_report_text(r);
  EXPECT_NE(text.find("fold 3 (n=2)"), std::string::npos);
  EXPECT_NE(text.find("mean"), std::string::npos);
  auto j = cv_report_json(r);
  EXPECT_EQ(j["folds"].size(), 3u);
  EXPECT_EQ(j["k"], 3);
}
