// Binary sparse feature vectors.

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace vsrl {

/// Indices of the features present; strictly increasing.
struct FeatureVector {
  std::vector<std::uint32_t> indices;

  static FeatureVector from_unsorted(std::vector<std::uint32_t> raw) {
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    return FeatureVector{std::move(raw)};
  }

  bool empty() const { return indices.empty(); }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

}  // namespace vsrl
