// Multiclass linear models over binary sparse features.
//
// Two trainers share one model type:
//
//  * maxent: multinomial logistic regression minimising
//      sum_i -log p(y_i | x_i) + 1/(2 * l2_strength) * ||W||^2
//    with unpenalised biases, solved by L-BFGS to a gradient-norm tolerance.
//
//  * svm: one-vs-rest linear SVM minimising, per label,
//      1/2 * (||w||^2 + b^2) + C * sum_i max(0, 1 - y_i (w.x_i + b))
//    by dual coordinate descent. The bias is an extra constant feature and
//    so is penalised together with w.
//
// Both are deterministic functions of (data, dictionary, config).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vsrl/corpus.hpp"
#include "vsrl/error.hpp"
#include "vsrl/features.hpp"
#include "vsrl/sparse.hpp"

namespace vsrl {

enum class ClassifierKind { Maxent, Svm };

inline std::string_view classifier_name(ClassifierKind kind) { return kind == ClassifierKind::Maxent ? "maxent" : "svm"; }

inline ClassifierKind parse_classifier(std::string_view name) {
  if (name == "maxent" || name == "me") return ClassifierKind::Maxent;
  if (name == "svm") return ClassifierKind::Svm;
  throw Error(Errc::InvalidConfig, "unknown classifier '" + std::string(name) + "'");
}

struct TrainConfig {
  ClassifierKind kind = ClassifierKind::Maxent;
  double l2_strength = 1.0;
  double svm_c = 1.0;
  std::size_t max_iter = 1000;
  double tol = 1e-4;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(l2_strength > 0.0)) throw Error(Errc::InvalidConfig, "l2 strength must be positive");
    if (!(svm_c > 0.0)) throw Error(Errc::InvalidConfig, "svm C must be positive");
    if (!(tol > 0.0)) throw Error(Errc::InvalidConfig, "tolerance must be positive");
  }
};

struct Example {
  FeatureVector features;
  std::string label;
};

class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(ClassifierKind kind, std::vector<std::string> labels, FeatureDictionary dictionary)
      : kind_(kind),
        labels_(std::move(labels)),
        dictionary_(std::move(dictionary)),
        weights_(dictionary_.size() * labels_.size(), 0.0),
        biases_(labels_.size(), 0.0) {
    dictionary_.freeze();
  }

  ClassifierKind kind() const { return kind_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const FeatureDictionary& dictionary() const { return dictionary_; }
  FeatureDictionary& dictionary() { return dictionary_; }
  std::size_t feature_count() const { return dictionary_.size(); }
  std::size_t label_count() const { return labels_.size(); }

  /// Feature-major: weight(f, l) = weights()[f * label_count() + l].
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& biases() const { return biases_; }
  std::vector<double>& biases() { return biases_; }

  double weight(std::size_t feature, std::size_t label) const { return weights_[feature * labels_.size() + label]; }

  const nlohmann::json& metadata() const { return metadata_; }
  nlohmann::json& metadata() { return metadata_; }

  /// Linear score of every label; indices beyond the dictionary are ignored.
  std::vector<double> scores(const FeatureVector& fv) const {
    std::vector<double> out = biases_;
    const std::size_t nl = labels_.size();
    for (std::uint32_t f : fv.indices) {
      if (f >= dictionary_.size()) continue;
      const double* row = weights_.data() + static_cast<std::size_t>(f) * nl;
      for (std::size_t l = 0; l < nl; ++l) out[l] += row[l];
    }
    return out;
  }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  ClassifierKind kind_ = ClassifierKind::Maxent;
  std::vector<std::string> labels_;
  FeatureDictionary dictionary_;
  std::vector<double> weights_;
  std::vector<double> biases_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

struct Prediction {
  std::size_t index = 0;
  std::string label;
  std::vector<double> scores;
};

/// Argmax of the label scores; ties go to the earlier label.
inline Prediction predict(const LinearModel& model, const FeatureVector& fv) {
  Prediction p;
  p.scores = model.scores(fv);
  for (std::size_t l = 1; l < p.scores.size(); ++l)
    if (p.scores[l] > p.scores[p.index]) p.index = l;
  p.label = model.labels().at(p.index);
  return p;
}

/// Softmax of the scores; meaningful for maxent models.
inline std::vector<double> probabilities(const LinearModel& model, const FeatureVector& fv) {
  std::vector<double> s = model.scores(fv);
  double top = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (double& v : s) z += (v = std::exp(v - top));
  for (double& v : s) v /= z;
  return s;
}

namespace detail {

/// Labels present in `data`, in canonical order, and each row's label id.
inline std::pair<std::vector<std::string>, std::vector<std::size_t>> index_labels(const std::vector<Example>& data) {
  std::vector<std::string> labels;
  for (const Example& e : data) labels.push_back(e.label);
  std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
    return label_order_less(a, b);
  });
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::vector<std::size_t> ids;
  ids.reserve(data.size());
  for (const Example& e : data)
    ids.push_back(static_cast<std::size_t>(std::find(labels.begin(), labels.end(), e.label) - labels.begin()));
  return {labels, ids};
}

inline void check_training_input(const std::vector<Example>& data, const FeatureDictionary& dict) {
  if (data.empty()) throw Error(Errc::EmptyData, "no training examples");
  for (const Example& e : data)
    for (std::uint32_t f : e.features.indices)
      if (f >= dict.size())
        throw Error(Errc::IndexOutOfRange, "feature index " + std::to_string(f) + " outside dictionary");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace detail

/// Penalised negative log-likelihood of a multinomial logistic model and
/// its gradient. Parameters are laid out as [W (features x labels), b].
class MaxentObjective {
 public:
  MaxentObjective(const std::vector<Example>& data, std::vector<std::size_t> label_ids, std::size_t features,
                  std::size_t labels, double l2_strength)
      : data_(data), ids_(std::move(label_ids)), features_(features), labels_(labels), l2_(l2_strength) {}

  std::size_t dimension() const { return (features_ + 1) * labels_; }

  double operator()(std::span<const double> params, std::span<double> grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t nl = labels_;
    const double* w = params.data();
    const double* b = params.data() + features_ * nl;
    double* gw = grad.data();
    double* gb = grad.data() + features_ * nl;
    std::vector<double> s(nl);
    double loss = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      std::copy(b, b + nl, s.begin());
      for (std::uint32_t f : data_[i].features.indices)
        for (std::size_t l = 0; l < nl; ++l) s[l] += w[f * nl + l];
      double top = *std::max_element(s.begin(), s.end());
      double z = 0.0;
      for (std::size_t l = 0; l < nl; ++l) z += std::exp(s[l] - top);
      double lse = top + std::log(z);
      loss += lse - s[ids_[i]];
      for (std::size_t l = 0; l < nl; ++l) {
        double r = std::exp(s[l] - lse) - (l == ids_[i] ? 1.0 : 0.0);
        gb[l] += r;
        for (std::uint32_t f : data_[i].features.indices) gw[f * nl + l] += r;
      }
    }
    double penalty = 0.0;
    for (std::size_t j = 0; j < features_ * nl; ++j) {
      penalty += w[j] * w[j];
      gw[j] += w[j] / l2_;
    }
    return loss + 0.5 * penalty / l2_;
  }

 private:
  const std::vector<Example>& data_;
  std::vector<std::size_t> ids_;
  std::size_t features_, labels_;
  double l2_;
};

struct OptimizerResult {
  std::size_t iterations = 0;
  double value = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
};

/// Limited-memory BFGS with Armijo backtracking. Minimises a smooth convex
/// `objective(x, grad) -> value` in place until ||grad|| <= tol.
template <typename Objective>
OptimizerResult minimize_lbfgs(const Objective& objective, std::vector<double>& x, std::size_t max_iter, double tol,
                               std::size_t memory = 10) {
  const std::size_t n = x.size();
  std::vector<double> g(n), d(n), x_new(n), g_new(n);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  OptimizerResult result;
  double f = objective(x, g);
  result.value = f;
  result.gradient_norm = detail::norm2(g);
  std::vector<double> alpha(memory);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    if (result.gradient_norm <= tol) {
      result.converged = true;
      break;
    }
    // Two-loop recursion for d = -H g.
    std::copy(g.begin(), g.end(), d.begin());
    for (std::size_t m = s_hist.size(); m-- > 0;) {
      alpha[m] = rho_hist[m] * detail::dot(s_hist[m], d);
      for (std::size_t j = 0; j < n; ++j) d[j] -= alpha[m] * y_hist[m][j];
    }
    if (!s_hist.empty()) {
      double gamma = detail::dot(s_hist.back(), y_hist.back()) / detail::dot(y_hist.back(), y_hist.back());
      for (double& v : d) v *= gamma;
    }
    for (std::size_t m = 0; m < s_hist.size(); ++m) {
      double beta = rho_hist[m] * detail::dot(y_hist[m], d);
      for (std::size_t j = 0; j < n; ++j) d[j] += s_hist[m][j] * (alpha[m] - beta);
    }
    for (double& v : d) v = -v;
    double slope = detail::dot(g, d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t j = 0; j < n; ++j) d[j] = -g[j];
      slope = detail::dot(g, d);
    }

    double step = s_hist.empty() ? std::min(1.0, 1.0 / result.gradient_norm) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t j = 0; j < n; ++j) x_new[j] = x[j] + step * d[j];
      f_new = objective(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    result.iterations = iter + 1;
    if (!accepted) break;

    std::vector<double> s(n), y(n);
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = x_new[j] - x[j];
      y[j] = g_new[j] - g[j];
    }
    double sy = detail::dot(s, y);
    if (sy > 1e-12 * detail::norm2(s) * detail::norm2(y)) {
      if (s_hist.size() == memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    result.value = f;
    result.gradient_norm = detail::norm2(g);
  }
  if (result.gradient_norm <= tol) result.converged = true;
  return result;
}

inline nlohmann::json config_metadata(const TrainConfig& config) {
  nlohmann::json m;
  m["kind"] = classifier_name(config.kind);
  m["max_iter"] = config.max_iter;
  m["tol"] = config.tol;
  m["seed"] = config.seed;
  if (config.kind == ClassifierKind::Maxent) {
    m["l2_strength"] = config.l2_strength;
    m["penalty"] = "sum_i -log p(y_i|x_i) + ||W||^2 / (2 * l2_strength); biases unpenalised";
    m["optimizer"] = "lbfgs";
  } else {
    m["svm_c"] = config.svm_c;
    m["loss"] = "hinge";
    m["penalty"] = "(||w||^2 + b^2) / 2 per label, one-vs-rest";
    m["optimizer"] = "dual coordinate descent";
  }
  return m;
}

inline LinearModel train_maxent(const std::vector<Example>& data, FeatureDictionary dictionary,
                                const TrainConfig& config) {
  config.validate();
  detail::check_training_input(data, dictionary);
  auto [labels, ids] = detail::index_labels(data);
  if (labels.size() < 2) throw Error(Errc::SingleLabelData, "only label '" + labels.front() + "' present");

  LinearModel model(ClassifierKind::Maxent, labels, std::move(dictionary));
  const std::size_t nf = model.feature_count(), nl = labels.size();
  MaxentObjective objective(data, ids, nf, nl, config.l2_strength);
  std::vector<double> params(objective.dimension(), 0.0);
  auto fn = [&](std::span<const double> x, std::span<double> g) { return objective(x, g); };
  OptimizerResult r = minimize_lbfgs(fn, params, config.max_iter, config.tol);

  std::copy(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(nf * nl), model.weights().begin());
  std::copy(params.begin() + static_cast<std::ptrdiff_t>(nf * nl), params.end(), model.biases().begin());
  nlohmann::json meta = config_metadata(config);
  meta["kind"] = "maxent";
  meta["iterations"] = r.iterations;
  meta["converged"] = r.converged;
  meta["final_objective"] = r.value;
  meta["final_gradient_norm"] = r.gradient_norm;
  model.metadata() = std::move(meta);
  return model;
}

/// Primal SVM objective of one binary problem (labels +1 / -1).
inline double svm_objective(const std::vector<FeatureVector>& xs, const std::vector<int>& ys,
                            std::span<const double> w, double bias, double c) {
  double reg = bias * bias;
  for (double v : w) reg += v * v;
  double hinge = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double s = bias;
    for (std::uint32_t f : xs[i].indices) s += w[f];
    hinge += std::max(0.0, 1.0 - ys[i] * s);
  }
  return 0.5 * reg + c * hinge;
}

struct BinarySvmResult {
  std::vector<double> w;
  double bias = 0.0;
  std::size_t epochs = 0;
  bool converged = false;
};

/// Dual coordinate descent for the L1-loss SVM with a penalised bias.
/// Stops when the projected-gradient spread falls below `tol`.
inline BinarySvmResult train_binary_svm(const std::vector<FeatureVector>& xs, const std::vector<int>& ys,
                                        std::size_t features, double c, std::size_t max_epochs, double tol,
                                        std::uint64_t seed) {
  const std::size_t n = xs.size();
  BinarySvmResult out;
  out.w.assign(features, 0.0);
  std::vector<double> alpha(n, 0.0), qd(n);
  for (std::size_t i = 0; i < n; ++i) qd[i] = static_cast<double>(xs[i].indices.size()) + 1.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);

  for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
      const double y = ys[i];
      double s = out.bias;
      for (std::uint32_t f : xs[i].indices) s += out.w[f];
      double g = y * s - 1.0;
      double pg = g;
      if (alpha[i] == 0.0)
        pg = std::min(g, 0.0);
      else if (alpha[i] == c)
        pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      double old = alpha[i];
      alpha[i] = std::clamp(old - g / qd[i], 0.0, c);
      double delta = (alpha[i] - old) * y;
      if (delta == 0.0) continue;
      for (std::uint32_t f : xs[i].indices) out.w[f] += delta;
      out.bias += delta;
    }
    out.epochs = epoch + 1;
    if (pg_max - pg_min <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

inline LinearModel train_svm(const std::vector<Example>& data, FeatureDictionary dictionary,
                             const TrainConfig& config) {
  config.validate();
  detail::check_training_input(data, dictionary);
  auto [labels, ids] = detail::index_labels(data);
  if (labels.size() < 2) throw Error(Errc::SingleLabelData, "only label '" + labels.front() + "' present");

  LinearModel model(ClassifierKind::Svm, labels, std::move(dictionary));
  const std::size_t nf = model.feature_count(), nl = labels.size();
  std::vector<FeatureVector> xs;
  xs.reserve(data.size());
  for (const Example& e : data) xs.push_back(e.features);

  nlohmann::json per_label = nlohmann::json::array();
  bool all_converged = true;
  std::vector<int> ys(data.size());
  for (std::size_t l = 0; l < nl; ++l) {
    for (std::size_t i = 0; i < data.size(); ++i) ys[i] = ids[i] == l ? 1 : -1;
    // Same seed for every label, so mirrored binary problems stay mirrored.
    BinarySvmResult r = train_binary_svm(xs, ys, nf, config.svm_c, config.max_iter, config.tol, config.seed);
    for (std::size_t f = 0; f < nf; ++f) model.weights()[f * nl + l] = r.w[f];
    model.biases()[l] = r.bias;
    per_label.push_back({{"label", labels[l]}, {"epochs", r.epochs}, {"converged", r.converged}});
    all_converged = all_converged && r.converged;
  }
  nlohmann::json meta = config_metadata(config);
  meta["converged"] = all_converged;
  meta["per_label"] = std::move(per_label);
  model.metadata() = std::move(meta);
  return model;
}

inline LinearModel train(const std::vector<Example>& data, FeatureDictionary dictionary, const TrainConfig& config) {
  return config.kind == ClassifierKind::Maxent ? train_maxent(data, std::move(dictionary), config)
                                               : train_svm(data, std::move(dictionary), config);
}

/// Model with a single label and no weights; predicts that label always.
inline LinearModel constant_model(ClassifierKind kind, std::string label, FeatureDictionary dictionary) {
  LinearModel model(kind, {std::move(label)}, std::move(dictionary));
  model.metadata() = {{"kind", classifier_name(kind)}, {"constant", true}};
  return model;
}

inline constexpr std::string_view kLinearModelFormat = "vsrl-linear-model";
inline constexpr int kLinearModelVersion = 1;

inline nlohmann::json model_to_json(const LinearModel& model) {
  nlohmann::json j;
  j["format"] = kLinearModelFormat;
  j["version"] = kLinearModelVersion;
  j["kind"] = classifier_name(model.kind());
  j["labels"] = model.labels();
  j["features"] = model.dictionary().names();
  j["biases"] = model.biases();
  j["weights"] = model.weights();
  j["metadata"] = model.metadata();
  return j;
}

inline LinearModel model_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kLinearModelFormat)
      throw Error(Errc::CorruptModel, "not a linear model");
    if (j.at("version").get<int>() != kLinearModelVersion)
      throw Error(Errc::VersionMismatch, "linear model version " + j.at("version").dump());
    LinearModel model(parse_classifier(j.at("kind").get<std::string>()),
                      j.at("labels").get<std::vector<std::string>>(),
                      FeatureDictionary::from_names(j.at("features").get<std::vector<std::string>>()));
    auto weights = j.at("weights").get<std::vector<double>>();
    auto biases = j.at("biases").get<std::vector<double>>();
    if (weights.size() != model.weights().size() || biases.size() != model.biases().size() ||
        model.labels().empty() || model.dictionary().size() != j.at("features").size())
      throw Error(Errc::CorruptModel, "weight matrix does not match labels and features");
    model.weights() = std::move(weights);
    model.biases() = std::move(biases);
    model.metadata() = j.at("metadata");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptModel, e.what());
  }
}

inline void save_model(const LinearModel& model, std::ostream& out) { out << model_to_json(model).dump() << '\n'; }

inline LinearModel load_model(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptModel, e.what());
  }
  return model_from_json(j);
}

inline void save_model(const LinearModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path + "'");
  save_model(model, out);
}

inline LinearModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open model '" + path + "'");
  return load_model(in);
}

}  // namespace vsrl
