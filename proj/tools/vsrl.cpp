// vsrl: command-line driver for the role labelling toolkit.
//
// Exit status: 0 on success, 1 when input or configuration is rejected,
// 2 on usage errors. Every report starts with the effective configuration
// so a run can be repeated from its output alone.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vsrl/vsrl.hpp"

namespace {

using nlohmann::json;

struct Options {
  std::string trees, props, embeddings, clusters, model, pred, gold, out;
  std::string features = "phi0";
  std::string strategy = "one-step";
  std::string extractor = "alg1";
  std::string walk_mode = "strict-alg1";
  bool strict_alg1 = false, repaired = false;
  std::string classifier = "maxent";
  double l2 = 1.0, svm_c = 1.0, tol = 1e-4;
  std::size_t max_iter = 1000;
  std::size_t k = 0;
  std::size_t cluster_k = 128;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string format = "text";
  std::string sizes;
  bool no_filter = false;
  bool strict = false;
};

// ---------------------------------------------------------------------------
// Config files: "key = value" lines become "--key value" arguments placed
// before the real ones, so command-line flags win.

std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw vsrl::Error(vsrl::Errc::IoError, "cannot open config '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw vsrl::Error(vsrl::Errc::InvalidConfig, path + ":" + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (value == "false") continue;
    args.push_back("--" + key);
    if (value != "true") args.push_back(value);
  }
  return args;
}

// ---------------------------------------------------------------------------
// Shared plumbing

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

vsrl::Corpus load(const Options& o, bool filter = true) {
  std::vector<std::string> diagnostics;
  vsrl::LoadOptions lo{!o.strict, &diagnostics};
  vsrl::Corpus corpus = vsrl::load_corpus(o.trees, o.props, lo);
  for (const std::string& d : diagnostics) std::cerr << o.props << ": dropped " << d << '\n';
  if (filter && !o.no_filter) {
    vsrl::FilterReport report;
    corpus = vsrl::filter_simple(corpus, &report);
    std::cerr << "simple-sentence filter: kept " << report.kept_sentences << " sentences, dropped "
              << report.dropped_sentences << " sentences and " << report.dropped_instances << " instances\n";
  }
  return corpus;
}

vsrl::ExtractorConfig extractor_config(const Options& o) {
  vsrl::ExtractorConfig e;
  if (o.extractor == "node-mapping")
    e.kind = vsrl::ExtractorKind::NodeMapping;
  else if (o.extractor != "alg1")
    throw vsrl::Error(vsrl::Errc::InvalidConfig, "unknown extractor '" + o.extractor + "'");
  if (o.walk_mode == "repaired")
    e.mode = vsrl::SiblingWalkMode::Repaired;
  else if (o.walk_mode != "strict-alg1")
    throw vsrl::Error(vsrl::Errc::InvalidConfig, "unknown walk mode '" + o.walk_mode + "'");
  if (o.strict_alg1) e.mode = vsrl::SiblingWalkMode::Strict;
  if (o.repaired) e.mode = vsrl::SiblingWalkMode::Repaired;
  return e;
}

std::shared_ptr<const vsrl::ClusterModel> cluster_model(const Options& o) {
  if (!o.clusters.empty()) return std::make_shared<const vsrl::ClusterModel>(vsrl::load_cluster_model(o.clusters));
  if (o.embeddings.empty()) return nullptr;
  vsrl::GmmOptions g;
  g.k = o.cluster_k;
  g.seed = o.seed;
  return std::make_shared<const vsrl::ClusterModel>(vsrl::fit_gmm(vsrl::load_embeddings(o.embeddings), g));
}

vsrl::PipelineConfig pipeline_config(const Options& o) {
  vsrl::PipelineConfig c;
  c.strategy = vsrl::parse_strategy(o.strategy);
  c.features = vsrl::parse_feature_set(o.features);
  c.extractor = extractor_config(o);
  c.train.kind = vsrl::parse_classifier(o.classifier);
  c.train.l2_strength = o.l2;
  c.train.svm_c = o.svm_c;
  c.train.max_iter = o.max_iter;
  c.train.tol = o.tol;
  c.train.seed = o.seed;
  c.train.validate();
  c.clusters = cluster_model(o);
  return c;
}

/// Effective configuration of a run. --jobs is left out on purpose: it
/// never changes results and echoing it would make reports differ.
json run_config(const std::string& command, const Options& o) {
  json j;
  j["command"] = command;
  if (!o.trees.empty()) j["trees"] = o.trees;
  if (!o.props.empty()) j["props"] = o.props;
  if (!o.clusters.empty()) j["clusters"] = o.clusters;
  if (!o.embeddings.empty()) {
    j["embeddings"] = o.embeddings;
    j["cluster_k"] = o.cluster_k;
  }
  j["seed"] = o.seed;
  j["filter"] = !o.no_filter;
  return j;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw vsrl::Error(vsrl::Errc::IoError, "cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void emit(const Options& o, const json& config, const json& body, const std::string& text) {
  Output out(o.out);
  if (o.format == "json") {
    json j = body;
    j["run"] = config;
    out.stream() << j.dump(2) << '\n';
  } else {
    out.stream() << "# run: " << config.dump() << '\n' << text;
  }
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_parse(const Options& o) {
  std::vector<vsrl::Sentence> sentences = vsrl::read_tree_file(o.trees);
  std::size_t tokens = 0;
  for (const auto& s : sentences) tokens += s.tokens.size();
  json body{{"trees", sentences.size()}, {"tokens", tokens}};
  std::string text = "trees: " + std::to_string(sentences.size()) + "\ntokens: " + std::to_string(tokens) + "\n";
  if (!o.props.empty()) {
    vsrl::Corpus corpus = load(o, false);
    body["instances"] = corpus.instances.size();
    text += "instances: " + std::to_string(corpus.instances.size()) + "\n";
  }
  json config = run_config("parse", o);
  config.erase("filter");
  emit(o, config, body, text);
}

void cmd_compare(const Options& o) {
  vsrl::Corpus corpus = load(o);
  vsrl::ExtractorConfig walk = extractor_config(o);
  walk.kind = vsrl::ExtractorKind::SiblingWalk;
  vsrl::ExtractorConfig mapping;
  mapping.kind = vsrl::ExtractorKind::NodeMapping;
  std::vector<std::pair<std::string, vsrl::PRF>> rows{
      {"sibling walk (" + std::string(vsrl::walk_mode_name(walk.mode)) + ")",
       vsrl::score_extraction(vsrl::extract_all(corpus, walk), corpus.instances)},
      {"1-1 node mapping", vsrl::score_extraction(vsrl::extract_all(corpus, mapping), corpus.instances)}};
  json config = run_config("compare-extractors", o);
  config["walk_mode"] = vsrl::walk_mode_name(walk.mode);
  json body{{"instances", corpus.instances.size()},
            {"extractors", {{{"name", "alg1"}, {"walk_mode", vsrl::walk_mode_name(walk.mode)},
                             {"prf", vsrl::prf_json(rows[0].second)}},
                            {{"name", "node-mapping"}, {"prf", vsrl::prf_json(rows[1].second)}}}}};
  emit(o, config, body, vsrl::prf_table(rows, "Extractor"));
}

void cmd_cluster(const Options& o) {
  std::vector<std::string> warnings;
  vsrl::EmbeddingTable table = vsrl::load_embeddings(o.embeddings, &warnings);
  for (const std::string& w : warnings) std::cerr << o.embeddings << ": " << w << '\n';
  vsrl::GmmOptions g;
  g.k = o.k == 0 ? 128 : o.k;
  g.seed = o.seed;
  if (o.max_iter != 1000) g.max_iter = o.max_iter;
  vsrl::GmmTrace trace;
  vsrl::ClusterModel model = vsrl::fit_gmm(table, g, &trace);
  vsrl::save_cluster_model(model, o.out);
  std::cerr << "clustered " << table.size() << " words into " << g.k << " components in " << trace.iterations
            << " EM iterations (mean log-likelihood " << vsrl::text::format_double(trace.log_likelihood.back())
            << (trace.converged ? "" : ", not converged") << ")\n";
}

void cmd_train(const Options& o) {
  vsrl::Corpus corpus = load(o);
  vsrl::PipelineConfig config = pipeline_config(o);
  vsrl::SrlPipeline pipeline = vsrl::train_pipeline(corpus, config);
  vsrl::save_pipeline(pipeline, o.out);
  std::cerr << "trained " << vsrl::strategy_name(config.strategy) << " pipeline on " << corpus.instances.size()
            << " instances (" << pipeline.dictionary().size() << " features)\n";
}

void cmd_label(const Options& o) {
  vsrl::SrlPipeline pipeline = vsrl::load_pipeline(o.model);
  vsrl::Corpus corpus = load(o, false);
  Output out(o.out);
  json config = run_config("label", o);
  config["model"] = o.model;
  config.erase("filter");
  out.stream() << "# run: " << config.dump() << '\n';
  vsrl::write_labelled(vsrl::label_corpus(pipeline, corpus), out.stream());
}

void cmd_score(const Options& o) {
  std::vector<vsrl::LabelledSentence> pred = vsrl::read_labelled_file(o.pred);
  std::vector<vsrl::PropInstance> gold;
  for (const auto& s : vsrl::read_labelled_file(o.gold)) gold.push_back(s.as_prop());
  vsrl::PRF prf = vsrl::score_labelled(pred, gold);
  json config{{"command", "score"}, {"pred", o.pred}, {"gold", o.gold}};
  emit(o, config, vsrl::prf_json(prf), vsrl::prf_table({{"labelled", prf}}, "Scope"));
}

std::size_t folds(const Options& o) { return o.k == 0 ? 10 : o.k; }

void cmd_cv(const Options& o) {
  vsrl::Corpus corpus = load(o);
  vsrl::CvReport report = vsrl::cross_validate(corpus, pipeline_config(o), folds(o), o.seed, o.jobs);
  emit(o, run_config("cv", o), vsrl::cv_report_json(report), vsrl::cv_report_text(report));
}

void cmd_ablate(const Options& o) {
  vsrl::Corpus corpus = load(o);
  std::vector<std::string> names = split_list(o.features);
  if (names.empty()) throw vsrl::Error(vsrl::Errc::InvalidConfig, "--features is empty");
  Options base_opts = o;
  base_opts.features = names.front();
  vsrl::PipelineConfig base = pipeline_config(base_opts);
  for (const std::string& name : names)
    if (vsrl::feature_preset(name).needs_clusters() && !base.clusters)
      throw vsrl::Error(vsrl::Errc::MissingClusterModel, "feature set '" + name + "' needs --clusters or --embeddings");
  auto rows = vsrl::ablation_suite(corpus, names, base, folds(o), o.seed, o.jobs);
  json body{{"feature_sets", json::array()}};
  std::vector<std::pair<std::string, vsrl::PRF>> table;
  for (const auto& [name, report] : rows) {
    body["feature_sets"].push_back({{"name", name}, {"report", vsrl::cv_report_json(report)}});
    table.emplace_back(name, report.mean);
  }
  json config = run_config("ablate", o);
  config["pipeline"] = vsrl::describe_pipeline(base);
  config["k"] = folds(o);
  emit(o, config, body, vsrl::prf_table(table, "Features"));
}

void cmd_curve(const Options& o) {
  vsrl::Corpus corpus = load(o);
  std::vector<std::size_t> sizes;
  for (const std::string& s : split_list(o.sizes)) {
    std::size_t n = 0;
    if (!vsrl::detail::parse_size(s, n)) throw vsrl::Error(vsrl::Errc::InvalidConfig, "bad size '" + s + "'");
    sizes.push_back(n);
  }
  if (sizes.empty()) throw vsrl::Error(vsrl::Errc::InvalidConfig, "--sizes is empty");
  vsrl::PipelineConfig config = pipeline_config(o);
  auto points = vsrl::learning_curve(corpus, sizes, config, folds(o), o.seed, o.jobs);
  json body{{"points", json::array()}};
  std::vector<std::pair<std::string, vsrl::PRF>> table;
  for (const auto& p : points) {
    body["points"].push_back({{"size", p.size}, {"report", vsrl::cv_report_json(p.report)}});
    table.emplace_back(std::to_string(p.size), p.report.mean);
  }
  json run = run_config("learning-curve", o);
  run["pipeline"] = vsrl::describe_pipeline(config);
  run["k"] = folds(o);
  emit(o, run, body, vsrl::prf_table(table, "Instances"));
}

// ---------------------------------------------------------------------------

void add_corpus(CLI::App* cmd, Options& o, bool props_required = true) {
  cmd->add_option("--trees", o.trees, "Bracketed tree file")->required();
  auto* p = cmd->add_option("--props", o.props, "Prop file (sentence-id predicate-index role:start-end ...)");
  if (props_required) p->required();
  cmd->add_flag("--no-filter", o.no_filter, "Keep sentences with several annotated predicates");
  cmd->add_flag("--strict", o.strict, "Fail on the first invalid prop line instead of skipping it");
}

void add_walk(CLI::App* cmd, Options& o) {
  cmd->add_option("--walk-mode", o.walk_mode, "strict-alg1 or repaired");
  auto* s = cmd->add_flag("--strict-alg1", o.strict_alg1, "Literal sibling walk");
  auto* r = cmd->add_flag("--repaired", o.repaired, "Keep unsplittable sisters whole");
  s->excludes(r);
}

void add_pipeline(CLI::App* cmd, Options& o) {
  cmd->add_option("--features", o.features, "Feature preset (phi0..phi16) or comma-separated template names");
  cmd->add_option("--strategy", o.strategy, "one-step or two-step");
  cmd->add_option("--extractor", o.extractor, "alg1 or node-mapping");
  add_walk(cmd, o);
  cmd->add_option("--classifier", o.classifier, "maxent or svm");
  cmd->add_option("--l2", o.l2, "Maxent L2 strength (larger means weaker penalty)");
  cmd->add_option("--svm-c", o.svm_c, "SVM cost C");
  cmd->add_option("--max-iter", o.max_iter, "Optimizer iteration cap");
  cmd->add_option("--tol", o.tol, "Optimizer tolerance");
  cmd->add_option("--clusters", o.clusters, "Cluster model for the cluster templates");
  cmd->add_option("--embeddings", o.embeddings, "Fit a cluster model from these embeddings instead");
  cmd->add_option("--cluster-k", o.cluster_k, "Components when fitting from --embeddings");
  cmd->add_option("--seed", o.seed, "Seed for every random choice");
}

void add_report(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--out", o.out, "Output file (default: standard output)");
}

int run(int argc, char** argv) {
  // Splice config-file arguments in right after the subcommand name.
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      std::vector<std::string> extra = config_arguments(args[i + 1]);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      args.insert(args.begin() + (args.empty() ? 0 : 1), extra.begin(), extra.end());
      break;
    }
  }

  Options o;
  CLI::App app{"Semantic role labelling toolkit for bracketed treebanks", "vsrl"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");
  app.footer("Every subcommand also accepts --config FILE with key=value lines; flags override it.");

  auto* parse = app.add_subcommand("parse", "Validate a tree file (and optionally a prop file)");
  add_corpus(parse, o, false);
  add_report(parse, o);

  auto* compare = app.add_subcommand("compare-extractors", "Extraction P/R/F1 of the sibling walk vs 1-1 node mapping");
  add_corpus(compare, o);
  add_walk(compare, o);
  add_report(compare, o);

  auto* cluster = app.add_subcommand("cluster", "Fit a Gaussian mixture over word embeddings");
  cluster->add_option("--embeddings", o.embeddings, "Embedding file: word v1 ... vd per line")->required();
  cluster->add_option("--k", o.k, "Number of components (default 128)");
  cluster->add_option("--seed", o.seed, "Seed");
  cluster->add_option("--max-iter", o.max_iter, "EM iteration cap");
  cluster->add_option("--out", o.out, "Cluster model output")->required();

  auto* train = app.add_subcommand("train", "Train a labelling pipeline");
  add_corpus(train, o);
  add_pipeline(train, o);
  train->add_option("--out", o.out, "Pipeline model output")->required();

  auto* label = app.add_subcommand("label", "Label the predicates listed in a prop file");
  label->add_option("--model", o.model, "Trained pipeline")->required();
  add_corpus(label, o);
  label->add_option("--out", o.out, "Output file (default: standard output)");

  auto* score = app.add_subcommand("score", "Labelled P/R/F1 of predictions against gold props");
  score->add_option("--pred", o.pred, "Predicted props")->required();
  score->add_option("--gold", o.gold, "Gold props")->required();
  add_report(score, o);

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation");
  add_corpus(cv, o);
  add_pipeline(cv, o);
  cv->add_option("--k", o.k, "Folds (default 10)");
  cv->add_option("--jobs", o.jobs, "Folds trained in parallel")->check(CLI::PositiveNumber);
  add_report(cv, o);

  auto* ablate = app.add_subcommand("ablate", "Cross-validate several feature presets");
  add_corpus(ablate, o);
  add_pipeline(ablate, o);
  ablate->add_option("--k", o.k, "Folds (default 10)");
  ablate->add_option("--jobs", o.jobs, "Folds trained in parallel")->check(CLI::PositiveNumber);
  add_report(ablate, o);

  auto* curve = app.add_subcommand("learning-curve", "Cross-validated score on nested subsamples");
  add_corpus(curve, o);
  add_pipeline(curve, o);
  curve->add_option("--sizes", o.sizes, "Comma-separated, increasing instance counts")->required();
  curve->add_option("--k", o.k, "Folds (default 10)");
  curve->add_option("--jobs", o.jobs, "Folds trained in parallel")->check(CLI::PositiveNumber);
  add_report(curve, o);

  if (args.empty()) {
    std::cerr << app.help();
    return 2;
  }
  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*parse) cmd_parse(o);
  else if (*compare) cmd_compare(o);
  else if (*cluster) cmd_cluster(o);
  else if (*train) cmd_train(o);
  else if (*label) cmd_label(o);
  else if (*score) cmd_score(o);
  else if (*cv) cmd_cv(o);
  else if (*ablate) cmd_ablate(o);
  else if (*curve) cmd_curve(o);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const vsrl::Error& e) {
    std::cerr << "vsrl: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "vsrl: " << e.what() << '\n';
    return 1;
  }
}
