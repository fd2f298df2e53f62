// Precision / recall / F1 over match counts.

#pragma once

#include <cstddef>

namespace vsrl {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  friend bool operator==(const PRF&, const PRF&) = default;
};

/// Zero denominators give zero; F1 is the harmonic mean of P and R.
inline PRF make_prf(std::size_t matched, std::size_t predicted, std::size_t gold) {
  PRF r;
  r.matched = matched;
  r.predicted = predicted;
  r.gold = gold;
  r.precision = predicted == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(predicted);
  r.recall = gold == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(gold);
  double sum = r.precision + r.recall;
  r.f1 = sum > 0.0 ? 2.0 * r.precision * r.recall / sum : 0.0;
  return r;
}

}  // namespace vsrl
