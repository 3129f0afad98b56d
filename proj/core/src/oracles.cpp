// Reference implementations used to validate the streaming metric paths.
// Everything here is a direct transcription of the defining formulas over
// materialized matrices, with independent neighbor sorts and no shared
// metric machinery.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "repalign/errors.hpp"
#include "repalign/synth.hpp"

namespace repalign {

namespace {

void check_cap(std::size_t n) {
  if (n > oracle_size_cap) {
    throw std::invalid_argument("oracle input has " + std::to_string(n) + " items; cap is " +
                                std::to_string(oracle_size_cap));
  }
}

EmbeddingSet normalized_copy(const EmbeddingSet& set) {
  return set.normalized ? set : normalize_rows(set).set;
}

std::vector<double> gram(const EmbeddingSet& set) {
  const std::size_t n = set.n_items, d = set.dim;
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += set.values[i * d + c] * set.values[j * d + c];
      k[i * n + j] = acc;
    }
  }
  return k;
}

std::vector<double> center(const std::vector<double>& k, std::size_t n, Centering mode) {
  double grand = 0.0;
  for (const double v : k) grand += v;
  grand /= static_cast<double>(n) * static_cast<double>(n);
  std::vector<double> out(n * n);
  if (mode == Centering::scalar) {
    for (std::size_t i = 0; i < n * n; ++i) out[i] = k[i] - grand;
    return out;
  }
  std::vector<double> rm(n, 0.0), cm(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      rm[i] += k[i * n + j];
      cm[j] += k[i * n + j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    rm[i] /= static_cast<double>(n);
    cm[i] /= static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = k[i * n + j] - rm[i] - cm[j] + grand;
  }
  return out;
}

double frob_product(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Top-k neighbor flags per row: nearest by similarity (descending) or
// distance (ascending), ties toward the lower index, self excluded.
std::vector<std::vector<bool>> topk_flags(const EmbeddingSet& set, std::size_t k, NeighborMetric metric) {
  const std::size_t n = set.n_items, d = set.dim;
  std::vector<std::vector<bool>> flags(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      if (metric == NeighborMetric::inner_product) {
        for (std::size_t c = 0; c < d; ++c) s -= set.values[i * d + c] * set.values[j * d + c];
      } else {
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = set.values[i * d + c] - set.values[j * d + c];
          s += diff * diff;
        }
      }
      scored.emplace_back(s, j);
    }
    std::sort(scored.begin(), scored.end());
    for (std::size_t p = 0; p < k; ++p) flags[i][scored[p].second] = true;
  }
  return flags;
}

std::vector<double> distance_matrix(const EmbeddingSet& set) {
  const std::size_t n = set.n_items, d = set.dim;
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = set.values[i * d + c] - set.values[j * d + c];
        acc += diff * diff;
      }
      dist[i * n + j] = std::sqrt(acc);
    }
  }
  return dist;
}

}  // namespace

double oracle_hsic(const KernelMatrix& k_centered, const KernelMatrix& l_centered) {
  check_cap(k_centered.n);
  if (k_centered.centering == Centering::none || k_centered.centering != l_centered.centering) {
    throw std::invalid_argument("oracle_hsic expects two kernels centered the same way");
  }
  if (k_centered.n != l_centered.n || k_centered.n < 2) {
    throw std::invalid_argument("oracle_hsic: bad kernel sizes");
  }
  const std::size_t n = k_centered.n;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) acc += k_centered.at(i, j) * l_centered.at(i, j);
  }
  return acc / (static_cast<double>(n - 1) * static_cast<double>(n - 1));
}

double oracle_cka(const EmbeddingSet& f, const EmbeddingSet& g, Centering mode) {
  check_cap(f.n_items);
  require_aligned(f, g);
  if (f.n_items < 2) throw std::invalid_argument("oracle_cka needs at least 2 items");
  const EmbeddingSet fn = normalized_copy(f), gn = normalized_copy(g);
  const std::size_t n = fn.n_items;
  const auto kc = center(gram(fn), n, mode);
  const auto lc = center(gram(gn), n, mode);
  const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
  const double cross = frob_product(kc, lc) / denom;
  const double self_k = frob_product(kc, kc) / denom;
  const double self_l = frob_product(lc, lc) / denom;
  if (self_k <= 0.0) throw degenerate_input_error("oracle_cka: HSIC(K,K) vanishes for '" + f.model_name + "'");
  if (self_l <= 0.0) throw degenerate_input_error("oracle_cka: HSIC(L,L) vanishes for '" + g.model_name + "'");
  return std::clamp(cross / std::sqrt(self_k * self_l), -1.0, 1.0);
}

double oracle_cknna(const EmbeddingSet& f, const EmbeddingSet& g, std::size_t k, const CknnaOptions& opts) {
  check_cap(f.n_items);
  require_aligned(f, g);
  const std::size_t n = f.n_items;
  if (n < 2) throw std::invalid_argument("oracle_cknna needs at least 2 items");
  if (k < 1 || k > n - 1) throw std::invalid_argument("oracle_cknna: k out of range");
  const EmbeddingSet fn = normalized_copy(f), gn = normalized_copy(g);
  const auto kc = center(gram(fn), n, opts.centering);
  const auto lc = center(gram(gn), n, opts.centering);
  const auto ff = topk_flags(fn, k, opts.neighbor);
  const auto gf = topk_flags(gn, k, opts.neighbor);
  double num = 0.0, den_f = 0.0, den_g = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool in_f = ff[i][j], in_g = gf[i][j];
      if (in_f && in_g) num += kc[i * n + j] * lc[i * n + j];
      if (opts.shared_denominator_mask) {
        if (in_f && in_g) {
          den_f += kc[i * n + j] * kc[i * n + j];
          den_g += lc[i * n + j] * lc[i * n + j];
        }
      } else {
        if (in_f) den_f += kc[i * n + j] * kc[i * n + j];
        if (in_g) den_g += lc[i * n + j] * lc[i * n + j];
      }
    }
  }
  if (den_f <= 0.0) {
    throw degenerate_input_error("oracle_cknna: denominator vanishes for '" + f.model_name + "'");
  }
  if (den_g <= 0.0) {
    throw degenerate_input_error("oracle_cknna: denominator vanishes for '" + g.model_name + "'");
  }
  return std::clamp(num / std::sqrt(den_f * den_g), -1.0, 1.0);
}

double oracle_dcor(const EmbeddingSet& f, const EmbeddingSet& g, const DcorOptions& opts) {
  check_cap(f.n_items);
  require_aligned(f, g);
  const std::size_t n = f.n_items;
  if (n < 2) throw std::invalid_argument("oracle_dcor needs at least 2 items");
  const auto da = distance_matrix(f);
  const auto db = distance_matrix(g);
  const auto a = center(da, n, Centering::doubly);
  const auto b = center(db, n, Centering::doubly);
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  const double cov = frob_product(a, b) / n2;
  const double var_a = frob_product(a, a) / n2;
  const double var_b = frob_product(b, b) / n2;
  if (var_a <= 0.0) {
    throw degenerate_input_error("oracle_dcor: distance variance vanishes for '" + f.model_name + "'");
  }
  if (var_b <= 0.0) {
    throw degenerate_input_error("oracle_dcor: distance variance vanishes for '" + g.model_name + "'");
  }
  const double ratio = std::clamp(cov / std::sqrt(var_a * var_b), 0.0, 1.0);
  return opts.sqrt_output ? std::sqrt(ratio) : ratio;
}

std::vector<std::vector<std::uint32_t>> oracle_ranks(const EmbeddingSet& set, RankDistance distance) {
  check_cap(set.n_items);
  const std::size_t n = set.n_items, d = set.dim;
  if (n < 2) throw std::invalid_argument("oracle_ranks needs at least 2 items");
  std::vector<std::vector<std::uint32_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      if (distance == RankDistance::euclidean) {
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = set.values[i * d + c] - set.values[j * d + c];
          s += diff * diff;
        }
      } else {
        for (std::size_t c = 0; c < d; ++c) s -= set.values[i * d + c] * set.values[j * d + c];
      }
      scored.emplace_back(s, j);
    }
    std::sort(scored.begin(), scored.end());
    order[i].reserve(n - 1);
    for (const auto& [s, j] : scored) order[i].push_back(static_cast<std::uint32_t>(j));
  }
  return order;
}

ImbalancePair oracle_information_imbalance(const EmbeddingSet& f, const EmbeddingSet& g, std::size_t k,
                                           RankDistance distance) {
  check_cap(f.n_items);
  require_aligned(f, g);
  const std::size_t n = f.n_items;
  if (n < 2) throw std::invalid_argument("oracle needs at least 2 items");
  if (k < 1 || k > n - 1) throw std::invalid_argument("oracle: k out of range");
  const auto fo = oracle_ranks(f, distance);
  const auto go = oracle_ranks(g, distance);
  auto direction = [n, k](const std::vector<std::vector<std::uint32_t>>& from,
                          const std::vector<std::vector<std::uint32_t>>& to) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const std::uint32_t j = from[i][p];
        const auto pos = std::find(to[i].begin(), to[i].end(), j);
        total += static_cast<double>(pos - to[i].begin()) + 1.0;
      }
    }
    return 2.0 * total / (static_cast<double>(k) * static_cast<double>(n) * static_cast<double>(n));
  };
  ImbalancePair pair;
  pair.k = k;
  pair.n = n;
  pair.forward = direction(fo, go);
  pair.backward = direction(go, fo);
  return pair;
}

}  // namespace repalign
