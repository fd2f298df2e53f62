// Word clusters from pre-trained embeddings.
//
// Vectors are grouped with a diagonal-covariance Gaussian mixture fitted by
// EM. Every word in the embedding table gets the id of its most responsible
// component; words outside the table share one extra id, equal to k.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vsrl/corpus.hpp"
#include "vsrl/error.hpp"
#include "vsrl/text_io.hpp"

namespace vsrl {

/// Word vectors of one shared dimension, stored row-major.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

  std::span<const double> find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return {};
    return row(it->second);
  }

  bool contains(std::string_view word) const { return index_.count(std::string(word)) > 0; }

  /// Adds or replaces `word`. Returns false when it replaced an entry.
  bool set(const std::string& word, std::span<const double> vec) {
    if (vec.size() != dim_)
      throw Error(Errc::InconsistentDimension,
                  "vector of length " + std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
    for (double v : vec)
      if (!std::isfinite(v)) throw Error(Errc::NonNumericComponent, "non-finite component for '" + word + "'");
    auto [it, inserted] = index_.emplace(word, words_.size());
    if (inserted) {
      words_.push_back(word);
      values_.insert(values_.end(), vec.begin(), vec.end());
    } else {
      std::copy(vec.begin(), vec.end(), values_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
    }
    return inserted;
  }

 private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads "word v1 ... vd" lines, with an optional "<count> <dim>" header.
/// '_' in words stands for a space, as in tree files. A repeated word
/// replaces the earlier vector and adds a warning.
inline EmbeddingTable load_embeddings(std::istream& in, std::vector<std::string>* warnings = nullptr) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_dim = false;
  EmbeddingTable table;
  std::vector<double> vec;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string_view> fields = detail::split_ws(line);
    if (fields.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line_no == 1 && fields.size() == 2) {
      std::size_t count = 0, header_dim = 0;
      if (detail::parse_size(fields[0], count) && detail::parse_size(fields[1], header_dim)) {
        dim = header_dim;
        have_dim = true;
        table = EmbeddingTable(dim);
        continue;
      }
    }
    if (!have_dim) {
      dim = fields.size() - 1;
      if (dim == 0) throw Error(Errc::InconsistentDimension, where + ": word without a vector");
      have_dim = true;
      table = EmbeddingTable(dim);
    }
    if (fields.size() != dim + 1)
      throw Error(Errc::InconsistentDimension,
                  where + ": " + std::to_string(fields.size() - 1) + " components, expected " + std::to_string(dim));
    vec.resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
      if (!text::parse_double(fields[i + 1], vec[i]))
        throw Error(Errc::NonNumericComponent, where + ": '" + std::string(fields[i + 1]) + "'");
    std::string word = detail::underscores_to_spaces(fields[0]);
    if (!table.set(word, vec) && warnings) warnings->push_back(where + ": duplicate word '" + word + "', last wins");
  }
  if (table.size() == 0) throw Error(Errc::EmptyFile, "no embeddings in input");
  return table;
}

inline EmbeddingTable load_embeddings(const std::string& path, std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open embeddings '" + path + "'");
  return load_embeddings(in, warnings);
}

struct ClusterModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> means;      // k x dim
  std::vector<double> variances;  // k x dim, diagonal
  std::vector<double> weights;    // k
  std::map<std::string, int, std::less<>> assignments;

  int unknown_id() const { return static_cast<int>(k); }

  friend bool operator==(const ClusterModel&, const ClusterModel&) = default;
};

inline int assign_cluster(const ClusterModel& model, std::string_view word) {
  auto it = model.assignments.find(word);
  return it == model.assignments.end() ? model.unknown_id() : it->second;
}

struct GmmOptions {
  std::size_t k = 128;
  std::uint64_t seed = 0;
  std::size_t max_iter = 200;
  /// Stop once the mean per-vector log-likelihood improves by less than this.
  double tol = 1e-5;
  double variance_floor = 1e-6;
};

struct GmmTrace {
  /// Mean per-vector log-likelihood before each M-step, then at the end.
  std::vector<double> log_likelihood;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// k-means++ seeding; returns row indices of the chosen centres.
inline std::vector<std::size_t> kmeans_pp(const EmbeddingTable& table, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = table.size();
  std::vector<std::size_t> centres;
  centres.push_back(static_cast<std::size_t>(rng() % n));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (centres.size() < k) {
    auto c = table.row(centres.back());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(table.row(i), c));
      total += nearest[i];
    }
    if (!(total > 0.0))
      throw Error(Errc::DegenerateComponent,
                  "fewer than " + std::to_string(k) + " distinct vectors; cannot seed every component");
    double target = unit_uniform(rng) * total;
    std::size_t pick = n;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (nearest[i] <= 0.0) continue;
      acc += nearest[i];
      pick = i;
      if (acc > target) break;
    }
    centres.push_back(pick);
  }
  return centres;
}

struct GmmState {
  std::size_t k, dim;
  std::vector<double> means, variances, weights;
  std::vector<double> log_norm;  // log w_k - 0.5 * sum_d log(2 pi v_kd)

  void refresh() {
    log_norm.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      double s = std::log(weights[c]);
      for (std::size_t d = 0; d < dim; ++d) s -= 0.5 * std::log(2.0 * std::numbers::pi * variances[c * dim + d]);
      log_norm[c] = s;
    }
  }

  /// Joint log density log(w_c N(x | c)) for every component.
  void component_log_density(std::span<const double> x, std::vector<double>& out) const {
    out.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      const double* mu = means.data() + c * dim;
      const double* var = variances.data() + c * dim;
      double q = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        double diff = x[d] - mu[d];
        q += diff * diff / var[d];
      }
      out[c] = log_norm[c] - 0.5 * q;
    }
  }
};

/// Weighted M-step from responsibilities `resp` (n x k).
inline void m_step(const EmbeddingTable& table, const std::vector<double>& resp, GmmState& state, double floor) {
  const std::size_t n = table.size(), k = state.k, dim = state.dim;
  std::vector<double> mass(k, 0.0);
  std::vector<double> sum(k * dim, 0.0), sum_sq(k * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = table.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      double r = resp[i * k + c];
      if (r == 0.0) continue;
      mass[c] += r;
      double* s = sum.data() + c * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] += r * x[d];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!(mass[c] > 0.0))
      throw Error(Errc::DegenerateComponent, "component " + std::to_string(c) + " lost all responsibility mass");
    for (std::size_t d = 0; d < dim; ++d) state.means[c * dim + d] = sum[c * dim + d] / mass[c];
  }
  // Second pass around the new means keeps the variance numerically stable.
  for (std::size_t i = 0; i < n; ++i) {
    auto x = table.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      double r = resp[i * k + c];
      if (r == 0.0) continue;
      const double* mu = state.means.data() + c * dim;
      double* s = sum_sq.data() + c * dim;
      for (std::size_t d = 0; d < dim; ++d) {
        double diff = x[d] - mu[d];
        s[d] += r * diff * diff;
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < dim; ++d)
      state.variances[c * dim + d] = std::max(sum_sq[c * dim + d] / mass[c], floor);
    state.weights[c] = mass[c] / static_cast<double>(n);
  }
  state.refresh();
}

/// E-step; fills responsibilities and returns the mean log-likelihood.
inline double e_step(const EmbeddingTable& table, const GmmState& state, std::vector<double>& resp) {
  const std::size_t n = table.size(), k = state.k;
  resp.assign(n * k, 0.0);
  std::vector<double> logp;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    state.component_log_density(table.row(i), logp);
    double top = *std::max_element(logp.begin(), logp.end());
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) z += std::exp(logp[c] - top);
    double lse = top + std::log(z);
    total += lse;
    for (std::size_t c = 0; c < k; ++c) resp[i * k + c] = std::exp(logp[c] - lse);
  }
  return total / static_cast<double>(n);
}

}  // namespace detail

/// Fits the mixture by EM from a k-means++ start. Deterministic in
/// (table, options).
inline ClusterModel fit_gmm(const EmbeddingTable& table, const GmmOptions& options, GmmTrace* trace = nullptr) {
  const std::size_t n = table.size(), k = options.k, dim = table.dim();
  if (k < 1) throw Error(Errc::InvalidConfig, "k must be at least 1");
  if (n < k)
    throw Error(Errc::TooFewVectors, std::to_string(n) + " vectors cannot fill " + std::to_string(k) + " components");

  detail::GmmState state{k, dim, std::vector<double>(k * dim), std::vector<double>(k * dim),
                         std::vector<double>(k), {}};

  // Hard assignment to the nearest seed gives the starting responsibilities.
  std::vector<std::size_t> centres = detail::kmeans_pp(table, k, options.seed);
  std::vector<double> resp(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double d = detail::squared_distance(table.row(i), table.row(centres[c]));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    resp[i * k + best] = 1.0;
  }
  detail::m_step(table, resp, state, options.variance_floor);

  GmmTrace local;
  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    double ll = detail::e_step(table, state, resp);
    local.log_likelihood.push_back(ll);
    local.iterations = iter + 1;
    if (ll - previous < options.tol) {
      local.converged = true;
      break;
    }
    previous = ll;
    detail::m_step(table, resp, state, options.variance_floor);
  }
  if (!local.converged) local.log_likelihood.push_back(detail::e_step(table, state, resp));

  ClusterModel model;
  model.k = k;
  model.dim = dim;
  model.means = state.means;
  model.variances = state.variances;
  model.weights = state.weights;
  std::vector<double> logp;
  for (std::size_t i = 0; i < n; ++i) {
    state.component_log_density(table.row(i), logp);
    auto best = std::max_element(logp.begin(), logp.end());
    model.assignments[table.words()[i]] = static_cast<int>(best - logp.begin());
  }
  if (trace) *trace = std::move(local);
  return model;
}

inline constexpr std::string_view kClusterModelMagic = "vsrl-cluster-model";
inline constexpr int kClusterModelVersion = 1;

/// Text persistence: header, weights, per-component means and variances,
/// then one "word id" line per known word.
inline void save_cluster_model(const ClusterModel& model, std::ostream& out) {
  out << kClusterModelMagic << ' ' << kClusterModelVersion << '\n';
  out << "k " << model.k << " dim " << model.dim << " unknown " << model.unknown_id() << " words "
      << model.assignments.size() << '\n';
  out << "weights";
  for (double w : model.weights) out << ' ' << text::format_double(w);
  out << '\n';
  for (std::size_t c = 0; c < model.k; ++c) {
    out << "mean " << c;
    for (std::size_t d = 0; d < model.dim; ++d) out << ' ' << text::format_double(model.means[c * model.dim + d]);
    out << '\n';
    out << "var " << c;
    for (std::size_t d = 0; d < model.dim; ++d) out << ' ' << text::format_double(model.variances[c * model.dim + d]);
    out << '\n';
  }
  for (const auto& [word, id] : model.assignments) out << detail::spaces_to_underscores(word) << ' ' << id << '\n';
}

inline ClusterModel load_cluster_model(std::istream& in) {
  auto corrupt = [](const std::string& why) { return Error(Errc::CorruptModel, "cluster model: " + why); };
  std::string line;
  if (!std::getline(in, line)) throw corrupt("empty input");
  auto fields = detail::split_ws(line);
  if (fields.size() != 2 || fields[0] != kClusterModelMagic) throw corrupt("missing header");
  if (fields[1] != std::to_string(kClusterModelVersion))
    throw Error(Errc::VersionMismatch, "cluster model version " + std::string(fields[1]));

  ClusterModel model;
  std::size_t unknown = 0, words = 0;
  if (!std::getline(in, line)) throw corrupt("truncated header");
  fields = detail::split_ws(line);
  if (fields.size() != 8 || fields[0] != "k" || !detail::parse_size(fields[1], model.k) || fields[2] != "dim" ||
      !detail::parse_size(fields[3], model.dim) || fields[4] != "unknown" ||
      !detail::parse_size(fields[5], unknown) || fields[6] != "words" || !detail::parse_size(fields[7], words))
    throw corrupt("bad size line");
  if (unknown != model.k) throw corrupt("unknown id must equal k");

  auto read_numbers = [&](std::string_view tag, bool indexed, std::size_t index, std::size_t count,
                          std::vector<double>& dest) {
    if (!std::getline(in, line)) throw corrupt("truncated before " + std::string(tag));
    auto f = detail::split_ws(line);
    std::size_t skip = indexed ? 2 : 1;
    std::size_t idx = 0;
    if (f.size() != count + skip || f[0] != tag || (indexed && (!detail::parse_size(f[1], idx) || idx != index)))
      throw corrupt("bad " + std::string(tag) + " line");
    for (std::size_t i = 0; i < count; ++i) {
      double v = 0.0;
      if (!text::parse_double(f[i + skip], v)) throw corrupt("bad number in " + std::string(tag) + " line");
      dest.push_back(v);
    }
  };
  read_numbers("weights", false, 0, model.k, model.weights);
  for (std::size_t c = 0; c < model.k; ++c) {
    read_numbers("mean", true, c, model.dim, model.means);
    read_numbers("var", true, c, model.dim, model.variances);
  }
  for (std::size_t w = 0; w < words; ++w) {
    if (!std::getline(in, line)) throw corrupt("truncated assignment list");
    auto f = detail::split_ws(line);
    std::size_t id = 0;
    if (f.size() != 2 || !detail::parse_size(f[1], id) || id >= model.k) throw corrupt("bad assignment line");
    model.assignments[detail::underscores_to_spaces(f[0])] = static_cast<int>(id);
  }
  return model;
}

inline void save_cluster_model(const ClusterModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path + "'");
  save_cluster_model(model, out);
}

inline ClusterModel load_cluster_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open cluster model '" + path + "'");
  return load_cluster_model(in);
}

}  // namespace vsrl
