// Generates the bundled synthetic corpus under data/synthetic/.
//
//   make_synthetic_corpus <out-dir> [--seed N]
//
// Writes corpus.trees, corpus.props and embeddings.txt. Sentences are drawn
// from a small clause grammar (transitive, ditransitive, passive, with
// optional negation, modal, manner, direction and time adjuncts and a final
// particle). Every gold argument is a constituent the sibling-walk extractor
// reaches, and non-argument siblings (passive markers, particles) provide
// NULL candidates. A few sentences carry two predicates so that the
// simple-sentence filter has something to drop.
//
// Embeddings are 50-dimensional: one random centroid per word class plus
// small per-word noise, padded with filler words so that a 128-component
// mixture can be fitted.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"

namespace {

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine() % n); }
  bool chance(int percent) { return below(100) < static_cast<std::size_t>(percent); }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
  double unit() { return static_cast<double>(engine() >> 11) * (1.0 / 9007199254740992.0); }
  double gaussian() {
    double u1 = unit(), u2 = unit();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
};

const std::vector<std::string> kPeople{"Nam", "Huy", "Lan", "Mai", "tôi", "anh_ấy", "cô_ấy", "bà", "ông", "chúng_tôi"};
const std::vector<std::string> kThings{"bóng", "sách", "bài", "cơm", "xe", "thư", "áo", "hoa", "quà", "bánh"};
const std::vector<std::string> kTransitive{"đá", "đọc", "học", "ăn", "mua", "viết", "thấy", "bán"};
const std::vector<std::string> kDitransitive{"tặng", "gửi", "đưa", "cho"};
const std::vector<std::string> kPassive{"phạt", "mắng", "khen", "đánh"};
const std::vector<std::string> kMotion{"đi", "chạy", "về"};
const std::vector<std::string> kPlaces{"trường", "chợ", "nhà", "công_viên"};
const std::vector<std::string> kTimes{"hôm_qua", "hôm_nay", "sáng_nay", "tối_qua"};
const std::vector<std::string> kModals{"sẽ", "phải", "cần"};
const std::vector<std::string> kNegations{"không", "chưa"};
const std::vector<std::string> kManners{"nhanh", "chậm", "cẩn_thận"};
const std::vector<std::string> kParticles{"mà", "nhé", "đâu"};
const std::vector<std::string> kPassiveMarkers{"bị", "được"};

/// A clause under construction: pre-verbal and post-verbal parts of the VP,
/// each with its gold role (empty for non-arguments).
struct Part {
  std::string bracket;
  std::size_t width;
  std::string role;
};

struct Clause {
  std::string tree;
  std::size_t predicate = 0;
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> args;
  std::size_t width = 0;
};

Part leaf_np(const std::string& tag, const std::string& word, const std::string& role) {
  return {"(NP" + tag + " (N-H " + word + "))", 1, role};
}

Clause make_clause(Rng& rng) {
  std::vector<Part> pre;   // before the verb, inside VP
  std::vector<Part> post;  // after the verb, inside VP
  std::string verb;
  Part subject;
  int kind = static_cast<int>(rng.below(4));
  if (kind == 0 || kind == 1) {
    verb = rng.pick(kTransitive);
    subject = leaf_np("-SUB", rng.pick(kPeople), "Arg0");
    post.push_back(leaf_np("-DOB", rng.pick(kThings), "Arg1"));
  } else if (kind == 2) {
    verb = rng.pick(kDitransitive);
    subject = leaf_np("-SUB", rng.pick(kPeople), "Arg0");
    if (rng.chance(50)) {
      post.push_back(leaf_np("-IOB", rng.pick(kPeople), "Arg2"));
      post.push_back(leaf_np("-DOB", rng.pick(kThings), "Arg1"));
    } else {
      // Packed object pair; the extractor splits it into its two children.
      std::string iob = rng.pick(kPeople), dob = rng.pick(kThings);
      post.push_back({"(NP (NP-IOB (N-H " + iob + ")) (NP-DOB (N-H " + dob + ")))", 2, "split"});
    }
  } else {
    verb = rng.pick(kPassive);
    subject = leaf_np("-SUB", rng.pick(kPeople), "Arg1");
    pre.push_back({"(V " + rng.pick(kPassiveMarkers) + ")", 1, ""});
  }
  if (kind != 3 && rng.chance(25)) pre.insert(pre.begin(), {"(R-MOD " + rng.pick(kModals) + ")", 1, "ArgM-MOD"});
  if (rng.chance(25)) pre.insert(pre.begin(), {"(R-NEG " + rng.pick(kNegations) + ")", 1, "ArgM-NEG"});
  if (kind <= 1 && rng.chance(30)) post.push_back({"(AP-MNR (A-H " + rng.pick(kManners) + "))", 1, "ArgM-MNR"});
  if (kind == 1 && rng.chance(40)) {
    // Motion verbs take a direction instead of an object.
    verb = rng.pick(kMotion);
    post.erase(post.begin());
    post.push_back({"(PP-DIR (E-H đến) (NP (N-H " + rng.pick(kPlaces) + ")))", 2, "ArgM-DIR"});
  }
  if (rng.chance(45)) post.push_back({"(PP-TMP (E-H vào) (NP (N-H " + rng.pick(kTimes) + ")))", 2, "ArgM-TMP"});

  Clause c;
  std::size_t pos = 0;
  auto add = [&](const Part& p) {
    if (p.role == "split") {
      c.args.emplace_back("Arg2", pos, pos + 1);
      c.args.emplace_back("Arg1", pos + 1, pos + 2);
    } else if (!p.role.empty()) {
      c.args.emplace_back(p.role, pos, pos + p.width);
    }
    pos += p.width;
  };
  add(subject);
  std::string vp = "(VP";
  for (const Part& p : pre) {
    add(p);
    vp += " " + p.bracket;
  }
  c.predicate = pos++;
  vp += " (V-H " + verb + ")";
  for (const Part& p : post) {
    add(p);
    vp += " " + p.bracket;
  }
  vp += ")";
  c.tree = "(S " + subject.bracket + " " + vp;
  if (rng.chance(20)) {
    c.tree += " (T " + rng.pick(kParticles) + ")";
    ++pos;
  }
  c.tree += ")";
  c.width = pos;
  return c;
}

std::string prop_line(const std::string& id, std::size_t predicate,
                      const std::vector<std::tuple<std::string, std::size_t, std::size_t>>& args) {
  std::string line = id + " " + std::to_string(predicate);
  for (const auto& [role, start, end] : args)
    line += " " + role + ":" + std::to_string(start) + "-" + std::to_string(end);
  return line;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the bundled synthetic SRL corpus"};
  std::string out_dir;
  std::uint64_t seed = 20170101;
  std::size_t simple = 48;
  app.add_option("out-dir", out_dir, "Output directory")->required();
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--sentences", simple, "Number of single-predicate sentences");
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out_dir);
  std::ofstream trees(out_dir + "/corpus.trees"), props(out_dir + "/corpus.props");
  trees << "# Synthetic corpus generated by tools/make_synthetic_corpus (seed " << seed << ").\n";
  props << "# <sentence-id> <predicate-index> <role>:<start>-<end> ...\n";

  Rng rng(seed);
  std::size_t id = 0;
  for (std::size_t i = 0; i < simple; ++i) {
    Clause c = make_clause(rng);
    std::string sid = "syn" + std::to_string(++id);
    trees << sid << ' ' << c.tree << '\n';
    props << prop_line(sid, c.predicate, c.args) << '\n';
  }

  // Two-predicate sentences: "X muốn V O" with an embedded VP.
  const std::vector<std::string> control{"muốn", "định", "thích"};
  for (int i = 0; i < 3; ++i) {
    std::string subject = rng.pick(kPeople), outer = rng.pick(control), inner = rng.pick(kTransitive),
                object = rng.pick(kThings);
    std::string sid = "syn" + std::to_string(++id);
    trees << sid << " (S (NP-SUB (N-H " << subject << ")) (VP (V-H " << outer << ") (VP (V-H " << inner
          << ") (NP-DOB (N-H " << object << ")))))\n";
    props << prop_line(sid, 1, {{"Arg0", 0, 1}, {"Arg1", 2, 4}}) << '\n';
    props << prop_line(sid, 2, {{"Arg0", 0, 1}, {"Arg1", 3, 4}}) << '\n';
  }

  // Embeddings: class centroid + noise, plus filler vocabulary.
  const std::size_t dim = 50;
  std::map<std::string, std::vector<std::string>> classes{
      {"people", kPeople},   {"things", kThings}, {"transitive", kTransitive}, {"ditransitive", kDitransitive},
      {"passive", kPassive}, {"motion", kMotion}, {"places", kPlaces},         {"times", kTimes},
      {"modals", kModals},   {"negation", kNegations}, {"manner", kManners},   {"particles", kParticles},
      {"markers", kPassiveMarkers}, {"control", control}, {"function", {"vào", "đến"}}};
  std::vector<std::string> filler;
  for (int i = 0; i < 160; ++i) filler.push_back("từ" + std::to_string(1000 + i));
  classes["filler"] = filler;

  std::ofstream emb(out_dir + "/embeddings.txt");
  std::size_t total = 0;
  for (const auto& [name, words] : classes) total += words.size();
  emb << total << ' ' << dim << '\n';
  emb.precision(6);
  emb << std::fixed;
  for (const auto& [name, words] : classes) {
    std::vector<double> centre(dim);
    for (double& v : centre) v = 3.0 * rng.gaussian();
    for (const std::string& w : words) {
      emb << w;
      for (std::size_t d = 0; d < dim; ++d) emb << ' ' << centre[d] + (name == "filler" ? 2.0 : 0.3) * rng.gaussian();
      emb << '\n';
    }
  }
  std::cout << "wrote " << id << " sentences and " << total << " embeddings to " << out_dir << "\n";
  return 0;
}
