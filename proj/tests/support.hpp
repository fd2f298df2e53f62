// Shared fixtures and generators for the test suites.

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "vsrl/vsrl.hpp"

namespace testing_support {

inline const std::string kDataDir = VSRL_DATA_DIR;

inline const std::string kSimpleClause = "(S (NP-SUB (N-H Nam)) (VP (V-H đá) (NP (N-H bóng))))";
inline const std::string kRelativeClause =
    "(S (NP-SUB (N-H Bà)) (VP (V-H nói) (SBAR (S (NP-SUB (P-H nó)) (VP (V-H là) (NP (N-H con_trai) (P tôi) "
    "(T mà)))))))";

inline std::vector<std::string> texts(const vsrl::CandidateSet& set) {
  std::vector<std::string> out;
  for (const auto& c : set.candidates) out.push_back(c.text);
  return out;
}

inline std::string random_word(std::mt19937_64& rng) {
  static const std::array<std::string, 12> pieces{"a", "b", "ngh", "ư", "ờ", "đ", "x", "Q", "7", "ê", "ọ", " "};
  std::string w;
  std::size_t n = 1 + rng() % 4;
  for (std::size_t i = 0; i < n; ++i) w += pieces[rng() % pieces.size()];
  // Tokens keep interior spaces only; edges must be visible characters.
  if (w.front() == ' ') w.front() = 'z';
  if (w.back() == ' ') w.back() = 'y';
  return w;
}

inline std::string random_label(std::mt19937_64& rng, bool phrasal) {
  static const std::array<std::string, 6> phrases{"S", "NP", "VP", "PP", "SBAR", "AP"};
  static const std::array<std::string, 6> tags{"N", "V", "P", "E", "A", "T"};
  static const std::array<std::string, 5> functions{"SUB", "H", "DOB", "TMP", "LOC"};
  std::string label = phrasal ? phrases[rng() % phrases.size()] : tags[rng() % tags.size()];
  std::size_t n = rng() % 3;
  for (std::size_t i = 0; i < n; ++i) label += "-" + functions[rng() % functions.size()];
  return label;
}

inline vsrl::Tree random_tree(std::mt19937_64& rng, int depth = 0) {
  if (depth >= 4 || (depth > 0 && rng() % 3 == 0))
    return vsrl::Tree(vsrl::parse_label(random_label(rng, false)), random_word(rng));
  std::vector<vsrl::Tree> children;
  std::size_t n = 1 + rng() % 3;
  for (std::size_t i = 0; i < n; ++i) children.push_back(random_tree(rng, depth + 1));
  return vsrl::Tree(vsrl::parse_label(random_label(rng, true)), std::move(children));
}

struct CommandResult {
  int status = -1;
  std::string output;
};

/// Runs a shell command and captures standard output.
inline CommandResult run_command(const std::string& command) {
  CommandResult r;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return r;
  char buffer[4096];
  std::size_t n;
  while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0) r.output.append(buffer, n);
  int status = pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

/// Three classes, each owning a block of indicator features; every point
/// fires two features of its class and two shared noise features.
inline std::vector<vsrl::Example> separable_data(std::size_t points, std::size_t features, std::uint64_t seed,
                                                 vsrl::FeatureDictionary& dict) {
  std::mt19937_64 rng(seed);
  for (std::size_t f = 0; f < features; ++f) dict.lookup_or_add("f" + std::to_string(f));
  const std::size_t block = (features - 2) / 3;
  std::vector<vsrl::Example> out;
  for (std::size_t i = 0; i < points; ++i) {
    std::size_t cls = i % 3;
    std::vector<std::uint32_t> idx;
    idx.push_back(static_cast<std::uint32_t>(cls * block + rng() % block));
    idx.push_back(static_cast<std::uint32_t>(cls * block + rng() % block));
    idx.push_back(static_cast<std::uint32_t>(features - 2 + rng() % 2));
    out.push_back({vsrl::FeatureVector::from_unsorted(idx), "C" + std::to_string(cls)});
  }
  return out;
}

/// Small corpus whose roles follow from function tags. Adjunct phrases are
/// word-for-word identical between TMP and DIR readings, so only the
/// function tag tells them apart.
inline vsrl::Corpus toy_corpus(std::size_t n, std::uint64_t seed = 1) {
  static const std::array<std::string, 4> subjects{"Nam", "Lan", "Huy", "Mai"};
  static const std::array<std::string, 3> verbs{"đọc", "mua", "ăn"};
  static const std::array<std::string, 3> objects{"sách", "cơm", "báo"};
  std::mt19937_64 rng(seed);
  std::vector<vsrl::Sentence> sentences;
  std::vector<vsrl::PropInstance> instances;
  for (std::size_t i = 0; i < n; ++i) {
    std::string id = "t" + std::to_string(i);
    bool tmp = i % 2 == 0;
    std::string text = "(S (NP-SUB (N-H " + subjects[rng() % 4] + ")) (VP (V-H " + verbs[rng() % 3] +
                       ") (NP-DOB (N-H " + objects[rng() % 3] + ")) (PP-" + (tmp ? "TMP" : "DIR") +
                       " (E-H ở) (NP (N-H đó)))))";
    sentences.emplace_back(id, vsrl::parse_bracketed(text));
    instances.push_back({id, 1, {{{0, 1}, "Arg0"}, {{2, 3}, "Arg1"}, {{3, 5}, tmp ? "ArgM-TMP" : "ArgM-DIR"}}});
  }
  return vsrl::make_corpus(std::move(sentences), std::move(instances));
}

}  // namespace testing_support
