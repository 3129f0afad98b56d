#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace repalign::detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double dist_sq(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

// Indices of the k best scores excluding `self`, where lower is better and
// equal scores break toward the lower index. Returned in ascending index
// order when sort_by_index is set, otherwise best-first.
inline std::vector<std::uint32_t> select_k_best(std::span<const double> scores, std::size_t self,
                                                std::size_t k, bool sort_by_index = true) {
  if (k == 0) return {};
  const std::size_t n = scores.size();
  std::vector<std::uint32_t> cand;
  cand.reserve(n - 1);
  for (std::uint32_t j = 0; j < n; ++j) {
    if (j != self) cand.push_back(j);
  }
  auto better = [&scores](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  };
  if (k < cand.size()) {
    std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end(), better);
    cand.resize(k);
    cand.shrink_to_fit();  // callers keep these lists; don't pin the n-wide scratch
  }
  if (sort_by_index) {
    std::sort(cand.begin(), cand.end());
  } else {
    std::sort(cand.begin(), cand.end(), better);
  }
  return cand;
}

}  // namespace repalign::detail
