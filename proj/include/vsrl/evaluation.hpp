// Scoring and experiment drivers: labelled P/R/F1, k-fold cross-validation,
// feature-set ablation and learning curves.
//
// All randomness comes from one seed. Folds may run on several threads; the
// report is assembled in fold order, so the thread count never changes it.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vsrl/corpus.hpp"
#include "vsrl/error.hpp"
#include "vsrl/labelling.hpp"
#include "vsrl/metrics.hpp"
#include "vsrl/text_io.hpp"

namespace vsrl {

/// A prediction counts when both span and role match a gold argument; each
/// gold argument absorbs at most one prediction. V is ignored on both sides.
inline PRF score_labelled(const std::vector<LabelledSentence>& predicted, const std::vector<PropInstance>& gold) {
  using Key = std::pair<std::string, std::size_t>;
  std::map<Key, std::vector<Argument>> by_key;
  for (const LabelledSentence& s : predicted) {
    auto& slot = by_key[{s.sentence_id, s.predicate_index}];
    slot.insert(slot.end(), s.predictions.begin(), s.predictions.end());
  }
  std::map<Key, bool> seen;
  std::size_t matched = 0, n_pred = 0, n_gold = 0;
  for (const PropInstance& g : gold) {
    Key key{g.sentence_id, g.predicate_index};
    if (seen[key])
      throw Error(Errc::AlignmentError, "gold instance " + g.sentence_id + ":" + std::to_string(g.predicate_index) +
                                            " appears twice");
    seen[key] = true;
    std::vector<const Argument*> open;
    for (const Argument& a : g.arguments)
      if (a.role != kPredicateRole) open.push_back(&a);
    n_gold += open.size();
    auto it = by_key.find(key);
    if (it == by_key.end()) continue;
    for (const Argument& p : it->second) {
      if (p.role == kPredicateRole || p.role == kNullRole) continue;
      ++n_pred;
      auto hit = std::find_if(open.begin(), open.end(), [&](const Argument* a) { return a->span == p.span && a->role == p.role; });
      if (hit != open.end()) {
        ++matched;
        open.erase(hit);
      }
    }
  }
  for (const auto& [key, preds] : by_key)
    if (!seen.count(key))
      throw Error(Errc::AlignmentError,
                  "prediction for " + key.first + ":" + std::to_string(key.second) + " has no gold instance");
  return make_prf(matched, n_pred, n_gold);
}

struct CvReport {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<PRF> folds;
  std::vector<std::size_t> fold_sizes;
  /// Arithmetic means of P, R and F1 over folds; counts are summed.
  PRF mean;
  nlohmann::json config;
};

namespace detail {

/// Seeded Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  return order;
}

/// Runs task(i) for i in [0, count) on up to `jobs` threads.
template <typename Task>
void run_parallel(std::size_t count, std::size_t jobs, const Task& task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline PRF mean_prf(const std::vector<PRF>& folds) {
  PRF m;
  if (folds.empty()) return m;
  for (const PRF& f : folds) {
    m.precision += f.precision;
    m.recall += f.recall;
    m.f1 += f.f1;
    m.matched += f.matched;
    m.predicted += f.predicted;
    m.gold += f.gold;
  }
  const double n = static_cast<double>(folds.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

}  // namespace detail

/// Fold membership: positions of the shuffled instance order, split into k
/// contiguous runs whose sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(Errc::InvalidConfig, "cross-validation needs k >= 2");
  if (n < k) throw Error(Errc::TooFewInstances, std::to_string(n) + " instances for " + std::to_string(k) + " folds");
  std::vector<std::size_t> order = detail::shuffled_indices(n, seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

inline nlohmann::json describe_pipeline(const PipelineConfig& config) {
  nlohmann::json j;
  j["strategy"] = strategy_name(config.strategy);
  j["feature_set"] = config.features.name;
  j["templates"] = describe_templates(config.features);
  j["extractor"] = extractor_name(config.extractor.kind);
  j["walk_mode"] = walk_mode_name(config.extractor.mode);
  j["classifier"] = config_metadata(config.train);
  j["clusters"] = config.clusters ? nlohmann::json(config.clusters->k) : nlohmann::json(nullptr);
  return j;
}

inline CvReport cross_validate(const Corpus& corpus, const PipelineConfig& config, std::size_t k, std::uint64_t seed,
                               std::size_t jobs = 1) {
  const auto folds = make_folds(corpus.instances.size(), k, seed);
  CvReport report;
  report.k = k;
  report.seed = seed;
  report.folds.resize(k);
  report.config = describe_pipeline(config);
  for (const auto& f : folds) report.fold_sizes.push_back(f.size());

  detail::run_parallel(k, jobs, [&](std::size_t f) {
    std::vector<PropInstance> train_set, test_set;
    for (std::size_t g = 0; g < k; ++g)
      for (std::size_t i : folds[g]) (g == f ? test_set : train_set).push_back(corpus.instances[i]);
    Corpus train_corpus = corpus.subset(train_set);
    Corpus test_corpus = corpus.subset(test_set);
    SrlPipeline pipeline = train_pipeline(train_corpus, config);
    report.folds[f] = score_labelled(label_corpus(pipeline, test_corpus), test_corpus.instances);
  });
  report.mean = detail::mean_prf(report.folds);
  return report;
}

/// Cross-validates every named preset over the same fold partition.
inline std::vector<std::pair<std::string, CvReport>> ablation_suite(const Corpus& corpus,
                                                                    const std::vector<std::string>& feature_sets,
                                                                    const PipelineConfig& base, std::size_t k,
                                                                    std::uint64_t seed, std::size_t jobs = 1) {
  std::vector<PipelineConfig> configs;
  for (const std::string& name : feature_sets) {
    PipelineConfig c = base;
    c.features = feature_preset(name);
    configs.push_back(std::move(c));
  }
  std::vector<std::pair<std::string, CvReport>> rows;
  for (std::size_t i = 0; i < configs.size(); ++i)
    rows.emplace_back(feature_sets[i], cross_validate(corpus, configs[i], k, seed, jobs));
  return rows;
}

struct CurvePoint {
  std::size_t size = 0;
  CvReport report;
};

/// Corpus positions drawn at `size`: a prefix of one seeded permutation,
/// returned in corpus order. Samples for growing sizes are nested, and the
/// full size reproduces the corpus itself.
inline std::vector<std::size_t> learning_curve_sample(std::size_t corpus_size, std::size_t size, std::uint64_t seed) {
  std::vector<std::size_t> order = detail::shuffled_indices(corpus_size, seed);
  order.resize(std::min(size, corpus_size));
  std::sort(order.begin(), order.end());
  return order;
}

/// Cross-validated score on nested seeded subsamples: the sample at each
/// size is a prefix of one seeded permutation of the corpus.
inline std::vector<CurvePoint> learning_curve(const Corpus& corpus, const std::vector<std::size_t>& sizes,
                                              const PipelineConfig& config, std::size_t k, std::uint64_t seed,
                                              std::size_t jobs = 1) {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] > corpus.instances.size())
      throw Error(Errc::SizeExceedsCorpus,
                  std::to_string(sizes[i]) + " > " + std::to_string(corpus.instances.size()) + " instances");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw Error(Errc::InvalidConfig, "sizes must be strictly increasing");
  }
  std::vector<CurvePoint> out;
  for (std::size_t size : sizes) {
    std::vector<PropInstance> sample;
    for (std::size_t i : learning_curve_sample(corpus.instances.size(), size, seed))
      sample.push_back(corpus.instances[i]);
    out.push_back({size, cross_validate(corpus.subset(sample), config, k, seed, jobs)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::json prf_json(const PRF& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1},
          {"matched", p.matched},     {"predicted", p.predicted}, {"gold", p.gold}};
}

inline nlohmann::json cv_report_json(const CvReport& r) {
  nlohmann::json j;
  j["config"] = r.config;
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["folds"] = nlohmann::json::array();
  for (std::size_t f = 0; f < r.folds.size(); ++f) {
    nlohmann::json row = prf_json(r.folds[f]);
    row["fold"] = f;
    row["size"] = r.fold_sizes[f];
    j["folds"].push_back(std::move(row));
  }
  j["mean"] = prf_json(r.mean);
  return j;
}

inline std::string percent(double v) { return text::format_fixed(100.0 * v, 2) + "%"; }

namespace detail {

inline std::string pad(std::string s, std::size_t width) {
  // Display width: count UTF-8 lead bytes only.
  std::size_t shown = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++shown;
  if (shown < width) s.append(width - shown, ' ');
  return s;
}

}  // namespace detail

/// Aligned table: one row per (name, PRF).
inline std::string prf_table(const std::vector<std::pair<std::string, PRF>>& rows, std::string_view first_column) {
  std::size_t width = first_column.size();
  for (const auto& [name, prf] : rows) width = std::max(width, name.size());
  width += 2;
  std::string out = detail::pad(std::string(first_column), width) + "Precision  Recall     F1\n";
  for (const auto& [name, prf] : rows)
    out += detail::pad(name, width) + detail::pad(percent(prf.precision), 11) + detail::pad(percent(prf.recall), 11) +
           percent(prf.f1) + "\n";
  return out;
}

inline std::string cv_report_text(const CvReport& r) {
  std::string out = "# " + r.config.dump() + "\n";
  out += "# k=" + std::to_string(r.k) + " seed=" + std::to_string(r.seed) + "\n";
  std::vector<std::pair<std::string, PRF>> rows;
  for (std::size_t f = 0; f < r.folds.size(); ++f)
    rows.emplace_back("fold " + std::to_string(f + 1) + " (n=" + std::to_string(r.fold_sizes[f]) + ")", r.folds[f]);
  rows.emplace_back("mean", r.mean);
  return out + prf_table(rows, "Run");
}

}  // namespace vsrl
