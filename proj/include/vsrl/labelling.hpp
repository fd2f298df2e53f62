// End-to-end role labelling: extraction, features and classification.
//
// The one-step strategy classifies every candidate into roles plus NULL.
// The two-step strategy first separates arguments from non-arguments
// (ARG vs NULL) and then assigns a role to the accepted candidates. Each
// candidate is decided independently; overlapping or repeated roles in the
// output are possible and left as they are.

#pragma once

#include <cstddef>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vsrl/classifiers.hpp"
#include "vsrl/clustering.hpp"
#include "vsrl/corpus.hpp"
#include "vsrl/error.hpp"
#include "vsrl/extraction.hpp"
#include "vsrl/features.hpp"

namespace vsrl {

enum class Strategy { OneStep, TwoStep };

inline std::string_view strategy_name(Strategy s) { return s == Strategy::OneStep ? "one-step" : "two-step"; }

inline Strategy parse_strategy(std::string_view name) {
  if (name == "one-step" || name == "1-step" || name == "onestep") return Strategy::OneStep;
  if (name == "two-step" || name == "2-step" || name == "twostep") return Strategy::TwoStep;
  throw Error(Errc::InvalidConfig, "unknown strategy '" + std::string(name) + "'");
}

struct PipelineConfig {
  Strategy strategy = Strategy::OneStep;
  FeatureSetConfig features = feature_preset("phi0");
  ExtractorConfig extractor;
  TrainConfig train;
  FeatureOptions feature_options;
  std::shared_ptr<const ClusterModel> clusters;
};

struct OneStepModels {
  LinearModel model;
};

struct TwoStepModels {
  LinearModel identifier;
  LinearModel classifier;
};

struct SrlPipeline {
  FeatureSetConfig features;
  ExtractorConfig extractor;
  FeatureOptions feature_options;
  std::variant<OneStepModels, TwoStepModels> models;
  std::shared_ptr<const ClusterModel> clusters;

  Strategy strategy() const { return std::holds_alternative<OneStepModels>(models) ? Strategy::OneStep : Strategy::TwoStep; }

  const FeatureDictionary& dictionary() const {
    if (auto* one = std::get_if<OneStepModels>(&models)) return one->model.dictionary();
    return std::get<TwoStepModels>(models).identifier.dictionary();
  }
};

/// One training row per extracted candidate, labelled by exact span match.
struct TrainingData {
  std::vector<Example> examples;
  FeatureDictionary dictionary;
  /// Candidates contributed by each instance, in corpus order.
  std::vector<std::size_t> candidates_per_instance;
};

inline TrainingData build_training_data(const Corpus& corpus, const ExtractorConfig& extractor,
                                        const FeatureSetConfig& features, const ClusterModel* clusters = nullptr,
                                        const FeatureOptions& options = {}) {
  TrainingData data;
  for (const PropInstance& inst : corpus.instances) {
    const Tree& tree = corpus.sentence(inst.sentence_id).tree;
    NodePath predicate = find_predicate_node(tree, inst.predicate_index);
    CandidateSet set = extractor.run(tree, predicate);
    PredicateContext ctx(tree, predicate, options);
    for (const Constituent& c : set.candidates) {
      FeatureVector fv = vectorize(extract_features(c, ctx, features, clusters, options), data.dictionary);
      data.examples.push_back({std::move(fv), gold_label_of(inst, c.span)});
    }
    data.candidates_per_instance.push_back(set.candidates.size());
  }
  return data;
}

namespace detail {

inline LinearModel train_or_constant(const std::vector<Example>& rows, const FeatureDictionary& dict,
                                     const TrainConfig& config, std::string_view fallback) {
  std::string only = rows.empty() ? std::string(fallback) : rows.front().label;
  bool single = true;
  for (const Example& e : rows)
    if (e.label != only) single = false;
  if (single) return constant_model(config.kind, only, dict);
  return train(rows, dict, config);
}

}  // namespace detail

/// Trains the model(s) for `config.strategy`. Data with a single label
/// (for instance a fold without any argument) yields a constant model.
inline SrlPipeline train_pipeline(const Corpus& corpus, const PipelineConfig& config) {
  if (corpus.instances.empty()) throw Error(Errc::EmptyData, "cannot train on an empty corpus");
  if (config.features.needs_clusters() && !config.clusters)
    throw Error(Errc::MissingClusterModel, "feature set '" + config.features.name + "' needs a cluster model");
  TrainingData data =
      build_training_data(corpus, config.extractor, config.features, config.clusters.get(), config.feature_options);
  data.dictionary.freeze();

  SrlPipeline pipeline{config.features, config.extractor, config.feature_options, OneStepModels{}, config.clusters};
  if (config.strategy == Strategy::OneStep) {
    pipeline.models = OneStepModels{detail::train_or_constant(data.examples, data.dictionary, config.train, kNullRole)};
    return pipeline;
  }
  std::vector<Example> identify, classify;
  identify.reserve(data.examples.size());
  for (const Example& e : data.examples) {
    bool is_arg = e.label != kNullRole;
    identify.push_back({e.features, std::string(is_arg ? kArgRole : kNullRole)});
    if (is_arg) classify.push_back(e);
  }
  pipeline.models = TwoStepModels{detail::train_or_constant(identify, data.dictionary, config.train, kNullRole),
                                  detail::train_or_constant(classify, data.dictionary, config.train, kNullRole)};
  return pipeline;
}

struct LabelledSentence {
  std::string sentence_id;
  std::size_t predicate_index = 0;
  std::vector<Argument> predictions;

  PropInstance as_prop() const { return {sentence_id, predicate_index, predictions}; }

  friend bool operator==(const LabelledSentence&, const LabelledSentence&) = default;
};

inline LabelledSentence label_sentence(const SrlPipeline& pipeline, const Sentence& sentence,
                                       std::size_t predicate_index) {
  const Tree& tree = sentence.tree;
  NodePath predicate = find_predicate_node(tree, predicate_index);
  CandidateSet set = pipeline.extractor.run(tree, predicate);
  PredicateContext ctx(tree, predicate, pipeline.feature_options);
  const FeatureDictionary& dict = pipeline.dictionary();

  LabelledSentence out{sentence.id, predicate_index, {}};
  for (const Constituent& c : set.candidates) {
    FeatureVector fv = vectorize(
        extract_features(c, ctx, pipeline.features, pipeline.clusters.get(), pipeline.feature_options), dict);
    std::string role;
    if (auto* one = std::get_if<OneStepModels>(&pipeline.models)) {
      role = predict(one->model, fv).label;
    } else {
      const auto& two = std::get<TwoStepModels>(pipeline.models);
      if (predict(two.identifier, fv).label == kNullRole) continue;
      role = predict(two.classifier, fv).label;
    }
    if (role == kNullRole || role == kPredicateRole || role == kArgRole) continue;
    out.predictions.push_back({c.span, std::move(role)});
  }
  return out;
}

inline std::vector<LabelledSentence> label_corpus(const SrlPipeline& pipeline, const Corpus& corpus) {
  std::vector<LabelledSentence> out;
  out.reserve(corpus.instances.size());
  for (const PropInstance& inst : corpus.instances)
    out.push_back(label_sentence(pipeline, corpus.sentence(inst.sentence_id), inst.predicate_index));
  return out;
}

/// Writes predictions in prop-file grammar, one line per instance.
inline void write_labelled(const std::vector<LabelledSentence>& labelled, std::ostream& out) {
  for (const LabelledSentence& s : labelled) out << format_prop_line(s.as_prop()) << '\n';
}

/// Reads prop-grammar lines without sentence validation. Lines sharing a
/// (sentence, predicate) key are merged, so both one-line-per-instance and
/// one-line-per-prediction files are accepted.
inline std::vector<LabelledSentence> read_labelled(std::istream& in) {
  std::vector<LabelledSentence> out;
  std::map<std::pair<std::string, std::size_t>, std::size_t> position;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    PropInstance inst = parse_prop_line(line, line_no);
    auto key = std::make_pair(inst.sentence_id, inst.predicate_index);
    auto [it, inserted] = position.emplace(key, out.size());
    if (inserted) out.push_back({inst.sentence_id, inst.predicate_index, {}});
    auto& preds = out[it->second].predictions;
    preds.insert(preds.end(), inst.arguments.begin(), inst.arguments.end());
  }
  return out;
}

inline std::vector<LabelledSentence> read_labelled_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  return read_labelled(in);
}

inline constexpr std::string_view kPipelineFormat = "vsrl-pipeline";
inline constexpr int kPipelineVersion = 1;

inline void save_pipeline(const SrlPipeline& pipeline, std::ostream& out) {
  nlohmann::json j;
  j["format"] = kPipelineFormat;
  j["version"] = kPipelineVersion;
  j["strategy"] = strategy_name(pipeline.strategy());
  j["feature_set"] = pipeline.features.name;
  std::vector<std::string> templates;
  for (Template t : pipeline.features.templates) templates.emplace_back(template_name(t));
  j["templates"] = templates;
  j["extractor"] = extractor_name(pipeline.extractor.kind);
  j["walk_mode"] = walk_mode_name(pipeline.extractor.mode);
  j["phrasal_categories"] = std::vector<std::string>(pipeline.extractor.phrasal.categories.begin(),
                                                     pipeline.extractor.phrasal.categories.end());
  j["passive_markers"] = std::vector<std::string>(pipeline.feature_options.passive_markers.begin(),
                                                  pipeline.feature_options.passive_markers.end());
  j["clause_categories"] = std::vector<std::string>(pipeline.feature_options.clause_categories.begin(),
                                                    pipeline.feature_options.clause_categories.end());
  j["head_marker"] = pipeline.feature_options.head_marker;
  if (auto* one = std::get_if<OneStepModels>(&pipeline.models)) {
    j["models"] = {model_to_json(one->model)};
  } else {
    const auto& two = std::get<TwoStepModels>(pipeline.models);
    j["models"] = {model_to_json(two.identifier), model_to_json(two.classifier)};
  }
  if (pipeline.clusters) {
    std::ostringstream clusters;
    save_cluster_model(*pipeline.clusters, clusters);
    j["clusters"] = clusters.str();
  } else {
    j["clusters"] = nullptr;
  }
  out << j.dump() << '\n';
}

inline SrlPipeline load_pipeline(std::istream& in) {
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object() || j.value("format", "") != kPipelineFormat) throw Error(Errc::CorruptModel, "not a pipeline");
    if (j.at("version").get<int>() != kPipelineVersion)
      throw Error(Errc::VersionMismatch, "pipeline version " + j.at("version").dump());
    SrlPipeline p{{}, {}, {}, OneStepModels{}, nullptr};
    p.features.name = j.at("feature_set").get<std::string>();
    for (const auto& t : j.at("templates")) p.features.templates.insert(parse_template(t.get<std::string>()));
    p.extractor.kind = j.at("extractor") == "node-mapping" ? ExtractorKind::NodeMapping : ExtractorKind::SiblingWalk;
    p.extractor.mode = j.at("walk_mode") == "repaired" ? SiblingWalkMode::Repaired : SiblingWalkMode::Strict;
    p.extractor.phrasal.categories.clear();
    for (const auto& c : j.at("phrasal_categories")) p.extractor.phrasal.categories.insert(c.get<std::string>());
    p.feature_options.passive_markers.clear();
    for (const auto& m : j.at("passive_markers")) p.feature_options.passive_markers.insert(m.get<std::string>());
    p.feature_options.clause_categories.clear();
    for (const auto& c : j.at("clause_categories")) p.feature_options.clause_categories.insert(c.get<std::string>());
    p.feature_options.head_marker = j.at("head_marker").get<std::string>();
    const auto& models = j.at("models");
    if (j.at("strategy") == "one-step" && models.size() == 1) {
      p.models = OneStepModels{model_from_json(models[0])};
    } else if (j.at("strategy") == "two-step" && models.size() == 2) {
      p.models = TwoStepModels{model_from_json(models[0]), model_from_json(models[1])};
    } else {
      throw Error(Errc::CorruptModel, "strategy does not match the stored models");
    }
    if (!j.at("clusters").is_null()) {
      std::istringstream clusters(j.at("clusters").get<std::string>());
      p.clusters = std::make_shared<const ClusterModel>(load_cluster_model(clusters));
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptModel, e.what());
  }
}

inline void save_pipeline(const SrlPipeline& pipeline, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path + "'");
  save_pipeline(pipeline, out);
}

inline SrlPipeline load_pipeline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open pipeline '" + path + "'");
  return load_pipeline(in);
}

}  // namespace vsrl
