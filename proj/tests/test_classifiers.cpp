#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support.hpp"
#include "vsrl/classifiers.hpp"

using namespace vsrl;

namespace {

FeatureDictionary dict_of(std::size_t n) {
  FeatureDictionary d;
  for (std::size_t i = 0; i < n; ++i) d.lookup_or_add("f" + std::to_string(i));
  return d;
}

std::vector<Example> random_examples(std::mt19937_64& rng, std::size_t n, std::size_t features, std::size_t labels) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> idx;
    for (std::size_t f = 0; f < features; ++f)
      if (rng() % 3 == 0) idx.push_back(static_cast<std::uint32_t>(f));
    out.push_back({FeatureVector::from_unsorted(idx), "Arg" + std::to_string(i < labels ? i : rng() % labels)});
  }
  return out;
}

double accuracy(const LinearModel& m, const std::vector<Example>& data) {
  std::size_t ok = 0;
  for (const Example& e : data) ok += predict(m, e.features).label == e.label;
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

/// Parameters in the [W, b] layout of MaxentObjective.
std::vector<double> flatten(const LinearModel& m) {
  std::vector<double> x = m.weights();
  x.insert(x.end(), m.biases().begin(), m.biases().end());
  return x;
}

}  // namespace

TEST(Classifiers, ParseNames) {
  EXPECT_EQ(parse_classifier("maxent"), ClassifierKind::Maxent);
  EXPECT_EQ(parse_classifier("svm"), ClassifierKind::Svm);
  EXPECT_THROW(parse_classifier("tree"), Error);
}

TEST(Classifiers, MaxentGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t nf = 2 + rng() % 6, nl = 2 + rng() % 3, n = 3 + rng() % 12;
    auto data = random_examples(rng, n, nf, nl);
    auto [labels, ids] = detail::index_labels(data);
    MaxentObjective obj(data, ids, nf, labels.size(), 0.5 + u(rng) * 0.4);
    std::vector<double> x(obj.dimension()), g(x.size()), scratch(x.size());
    for (double& v : x) v = u(rng);
    obj(x, g);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double h = 1e-5;
      std::vector<double> xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      double fd = (obj(xp, scratch) - obj(xm, scratch)) / (2 * h);
      double rel = std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j]));
      worst = std::max(worst, rel);
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Classifiers, MaxentStopsAtSmallGradient) {
  std::mt19937_64 rng(4);
  auto data = random_examples(rng, 40, 8, 3);
  FeatureDictionary d = dict_of(8);
  TrainConfig cfg;
  cfg.tol = 1e-6;
  LinearModel m = train_maxent(data, d, cfg);
  EXPECT_TRUE(m.metadata()["converged"].get<bool>());
  auto [labels, ids] = detail::index_labels(data);
  MaxentObjective obj(data, ids, 8, labels.size(), cfg.l2_strength);
  std::vector<double> x = flatten(m), g(x.size());
  obj(x, g);
  EXPECT_LE(detail::norm2(g), cfg.tol);
}

TEST(Classifiers, SeparableThreeClassData) {
  for (auto kind : {ClassifierKind::Maxent, ClassifierKind::Svm}) {
    FeatureDictionary d;
    auto data = testing_support::separable_data(200, 20, 8, d);
    TrainConfig cfg;
    cfg.kind = kind;
    LinearModel m = train(data, d, cfg);
    EXPECT_EQ(accuracy(m, data), 1.0) << classifier_name(kind);
  }
}

TEST(Classifiers, SeparableTwoClassData) {
  for (auto kind : {ClassifierKind::Maxent, ClassifierKind::Svm}) {
    std::vector<Example> data{{FeatureVector{{0, 2}}, "Arg0"}, {FeatureVector{{0}}, "Arg0"},
                              {FeatureVector{{1, 2}}, "Arg1"}, {FeatureVector{{1}}, "Arg1"}};
    TrainConfig cfg;
    cfg.kind = kind;
    LinearModel m = train(data, dict_of(3), cfg);
    EXPECT_EQ(accuracy(m, data), 1.0);
    EXPECT_EQ(predict(m, FeatureVector{{0, 2}}).label, "Arg0");
  }
}

TEST(Classifiers, BalancedEmptyFeaturesGiveUniformProbabilities) {
  std::vector<Example> data;
  for (const char* l : {"Arg0", "Arg1", "ArgM-TMP", "NULL"})
    for (int r = 0; r < 3; ++r) data.push_back({FeatureVector{}, l});
  LinearModel m = train_maxent(data, dict_of(2), {});
  for (double p : probabilities(m, FeatureVector{})) EXPECT_NEAR(p, 0.25, 1e-6);
}

TEST(Classifiers, SvmSymmetricMidpoint) {
  std::vector<Example> data{{FeatureVector{{0}}, "Arg0"}, {FeatureVector{{0}}, "Arg0"},
                            {FeatureVector{{1}}, "Arg1"}, {FeatureVector{{1}}, "Arg1"}};
  TrainConfig cfg;
  cfg.kind = ClassifierKind::Svm;
  cfg.tol = 1e-10;
  cfg.max_iter = 100000;
  LinearModel m = train_svm(data, dict_of(2), cfg);
  // Midpoint halfway between the two points: half of each feature.
  auto score = [&](std::size_t l) { return m.biases()[l] + 0.5 * m.weight(0, l) + 0.5 * m.weight(1, l); };
  EXPECT_NEAR(score(0), score(1), 1e-6);
}

TEST(Classifiers, SvmMatchesGridSearchIn1D) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    // One binary feature; labels noisy so the optimum is interior.
    std::vector<FeatureVector> xs;
    std::vector<int> ys;
    for (int i = 0; i < 8; ++i) {
      bool on = rng() % 2;
      xs.push_back(on ? FeatureVector{{0}} : FeatureVector{});
      ys.push_back((on ? rng() % 4 != 0 : rng() % 4 == 0) ? 1 : -1);
    }
    const double c = 0.5 + static_cast<double>(trial) * 0.3;
    BinarySvmResult r = train_binary_svm(xs, ys, 1, c, 100000, 1e-10, 1);
    double trained = svm_objective(xs, ys, r.w, r.bias, c);

    auto obj = [&](double w, double b) { return svm_objective(xs, ys, std::vector<double>{w}, b, c); };
    double best = obj(0, 0), bw = 0, bb = 0;
    for (double w = -4; w <= 4; w += 0.01)
      for (double b = -4; b <= 4; b += 0.01)
        if (double v = obj(w, b); v < best) best = v, bw = w, bb = b;
    const double cw = bw, cb = bb;
    for (double w = cw - 0.02; w <= cw + 0.02; w += 1e-4)
      for (double b = cb - 0.02; b <= cb + 0.02; b += 1e-4)
        if (double v = obj(w, b); v < best) best = v;
    EXPECT_NEAR(trained, best, 1e-3) << "trial " << trial;
    EXPECT_LE(trained, best + 1e-9);
  }
}

TEST(Classifiers, PredictEdgeCases) {
  FeatureDictionary d;
  auto data = testing_support::separable_data(60, 11, 2, d);
  for (auto kind : {ClassifierKind::Maxent, ClassifierKind::Svm}) {
    TrainConfig cfg;
    cfg.kind = kind;
    LinearModel m = train(data, d, cfg);
    // Empty vector: argmax of the biases.
    auto b = m.biases();
    std::size_t arg = std::max_element(b.begin(), b.end()) - b.begin();
    EXPECT_EQ(predict(m, FeatureVector{}).index, arg);
    // A feature beyond the dictionary leaves the scores alone.
    FeatureVector fv = data[0].features, extended = fv;
    extended.indices.push_back(1000);
    EXPECT_EQ(m.scores(fv), m.scores(extended));
    EXPECT_EQ(predict(m, data[0].features).label, data[0].label);
  }
  // A feature with zero weight is irrelevant too.
  LinearModel zero(ClassifierKind::Maxent, {"Arg0", "Arg1"}, dict_of(3));
  zero.weights()[0] = 2.0;  // feature 0, label Arg0
  EXPECT_EQ(zero.scores(FeatureVector{{0}}), zero.scores(FeatureVector{{0, 2}}));
}

TEST(Classifiers, TiesGoToEarlierLabel) {
  LinearModel m(ClassifierKind::Svm, {"NULL", "Arg0"}, dict_of(1));
  EXPECT_EQ(predict(m, FeatureVector{}).label, "NULL");
}

TEST(Classifiers, TrainingErrors) {
  try {
    train_maxent({}, dict_of(1), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyData);
  }
  std::vector<Example> one{{FeatureVector{{0}}, "Arg0"}, {FeatureVector{}, "Arg0"}};
  for (auto kind : {ClassifierKind::Maxent, ClassifierKind::Svm}) {
    TrainConfig cfg;
    cfg.kind = kind;
    try {
      train(one, dict_of(1), cfg);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::SingleLabelData);
    }
  }
  TrainConfig bad;
  bad.l2_strength = 0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Classifiers, DeterministicModels) {
  FeatureDictionary d;
  auto data = testing_support::separable_data(90, 14, 6, d);
  for (auto kind : {ClassifierKind::Maxent, ClassifierKind::Svm}) {
    TrainConfig cfg;
    cfg.kind = kind;
    std::ostringstream a, b;
    save_model(train(data, d, cfg), a);
    save_model(train(data, d, cfg), b);
    EXPECT_EQ(a.str(), b.str());
  }
}

TEST(Classifiers, SaveLoadPredict) {
  FeatureDictionary d;
  auto data = testing_support::separable_data(60, 11, 3, d);
  for (auto kind : {ClassifierKind::Maxent, ClassifierKind::Svm}) {
    TrainConfig cfg;
    cfg.kind = kind;
    LinearModel m = train(data, d, cfg);
    std::stringstream io;
    save_model(m, io);
    std::string text = io.str();
    LinearModel back = load_model(io);
    EXPECT_EQ(back, m);
    for (const Example& e : data) EXPECT_EQ(predict(back, e.features).scores, predict(m, e.features).scores);

    std::istringstream truncated(text.substr(0, text.size() / 2));
    try {
      load_model(truncated);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::CorruptModel);
    }
  }
}

TEST(Classifiers, RejectsOtherVersions) {
  LinearModel m(ClassifierKind::Maxent, {"Arg0", "Arg1"}, dict_of(1));
  auto j = model_to_json(m);
  j["version"] = 2;
  try {
    model_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::VersionMismatch);
  }
  j["version"] = 1;
  j["weights"] = std::vector<double>{1.0};
  EXPECT_THROW(model_from_json(j), Error);
}

TEST(Classifiers, RandomModelsRoundTrip) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> ex(-300, 300);
  for (int i = 0; i < 1000; ++i) {
    std::size_t nf = rng() % 6, nl = 1 + rng() % 4;
    std::vector<std::string> names;
    for (std::size_t f = 0; f < nf; ++f) names.push_back("HeadWord=" + testing_support::random_word(rng) + "#" + std::to_string(f));
    std::vector<std::string> labels;
    for (std::size_t l = 0; l < nl; ++l) labels.push_back("Arg" + std::to_string(l));
    LinearModel m(rng() % 2 ? ClassifierKind::Maxent : ClassifierKind::Svm, labels,
                  FeatureDictionary::from_names(names));
    for (double& w : m.weights()) w = std::ldexp(u(rng), ex(rng));
    for (double& b : m.biases()) b = std::ldexp(u(rng), ex(rng));
    m.metadata()["trial"] = i;
    std::stringstream io;
    save_model(m, io);
    LinearModel back = load_model(io);
    ASSERT_EQ(back, m) << "model " << i;
  }
}
