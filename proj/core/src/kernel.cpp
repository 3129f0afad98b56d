#include "repalign/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "dense_ops.hpp"
#include "repalign/errors.hpp"
#include "repalign/parallel.hpp"
#include "warn.hpp"

namespace repalign {

namespace {

// Kernel-space ops expect max-abs normalized rows; fix up a raw set once,
// with a warning, instead of silently computing on a different kernel.
const EmbeddingSet& ensure_normalized(const EmbeddingSet& set, std::optional<EmbeddingSet>& storage) {
  if (set.normalized) return set;
  detail::warn("normalizing rows of '" + set.model_name + "' (kernel metrics expect normalized rows)");
  storage = normalize_rows(set).set;
  return *storage;
}

void require_counts(const EmbeddingSet& set, std::size_t k) {
  if (set.n_items < 2) throw std::invalid_argument("'" + set.model_name + "': need at least 2 items");
  if (k < 1 || k > set.n_items - 1) {
    throw std::invalid_argument("k = " + std::to_string(k) + " out of range [1, " +
                                std::to_string(set.n_items - 1) + "] for '" + set.model_name + "'");
  }
}

// Ascending-index intersection of two ascending index lists.
void intersect_into(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                    std::vector<std::uint32_t>& out) {
  out.clear();
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] < b[ib]) {
      ++ia;
    } else if (b[ib] < a[ia]) {
      ++ib;
    } else {
      out.push_back(a[ia]);
      ++ia;
      ++ib;
    }
  }
}

struct CenteringStats {
  std::vector<double> row_mean;
  double grand_mean = 0.0;
};

// Row means and grand mean of the inner-product kernel, computed from the
// feature side: row_mean[i] = <phi_i, s>/N with s the column-sum vector.
CenteringStats kernel_centering_stats(const EmbeddingSet& set) {
  const std::size_t n = set.n_items, d = set.dim;
  std::vector<double> col_sum(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = set.row(i);
    for (std::size_t a = 0; a < d; ++a) col_sum[a] += row[a];
  }
  CenteringStats stats;
  stats.row_mean.resize(n);
  parallel_for(n, [&](std::size_t i) {
    stats.row_mean[i] = detail::dot(set.row(i), col_sum) / static_cast<double>(n);
  });
  stats.grand_mean = detail::dot(col_sum, col_sum) / (static_cast<double>(n) * static_cast<double>(n));
  return stats;
}

inline double centered_entry(const EmbeddingSet& set, const CenteringStats& stats, Centering mode,
                             std::size_t i, std::size_t j) {
  const double k = detail::dot(set.row(i), set.row(j));
  if (mode == Centering::scalar) return k - stats.grand_mean;
  return k - stats.row_mean[i] - stats.row_mean[j] + stats.grand_mean;
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

const char* to_string(Centering mode) {
  switch (mode) {
    case Centering::none: return "none";
    case Centering::scalar: return "scalar";
    case Centering::doubly: return "double";
  }
  return "?";
}

Centering parse_centering(std::string_view name) {
  if (name == "scalar") return Centering::scalar;
  if (name == "double") return Centering::doubly;
  throw std::invalid_argument("unknown centering '" + std::string(name) + "' (expected scalar or double)");
}

const char* to_string(NeighborMetric metric) {
  return metric == NeighborMetric::inner_product ? "inner-product" : "euclidean";
}

NeighborMetric parse_neighbor_metric(std::string_view name) {
  if (name == "inner-product") return NeighborMetric::inner_product;
  if (name == "euclidean") return NeighborMetric::euclidean;
  throw std::invalid_argument("unknown neighbor metric '" + std::string(name) +
                              "' (expected inner-product or euclidean)");
}

KernelMatrix inner_product_kernel(const EmbeddingSet& set) {
  if (set.n_items == 0) throw std::invalid_argument("empty embedding set");
  std::optional<EmbeddingSet> storage;
  const EmbeddingSet& s = ensure_normalized(set, storage);
  KernelMatrix kernel;
  kernel.source_model = s.model_name;
  kernel.n = s.n_items;
  kernel.values.resize(kernel.n * kernel.n);
  parallel_for(kernel.n, [&](std::size_t i) {
    for (std::size_t j = i; j < kernel.n; ++j) {
      const double v = detail::dot(s.row(i), s.row(j));
      kernel.at(i, j) = v;
      kernel.at(j, i) = v;
    }
  });
  return kernel;
}

KernelMatrix center_kernel(const KernelMatrix& kernel, Centering mode) {
  if (kernel.centering != Centering::none) throw std::invalid_argument("kernel is already centered");
  if (mode == Centering::none) throw std::invalid_argument("centering mode must be scalar or double");
  if (kernel.n == 0) throw std::invalid_argument("empty kernel");
  const std::size_t n = kernel.n;
  std::vector<double> row_sum(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += kernel.at(i, j);
    row_sum[i] = acc;
  });
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += row_sum[i];
  const double grand = total / (static_cast<double>(n) * static_cast<double>(n));

  KernelMatrix out;
  out.source_model = kernel.source_model;
  out.n = n;
  out.centering = mode;
  out.values.resize(n * n);
  if (mode == Centering::scalar) {
    parallel_for(n, [&](std::size_t i) {
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) = kernel.at(i, j) - grand;
    });
    return out;
  }
  std::vector<double> col_sum(n, 0.0);
  parallel_for(n, [&](std::size_t j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += kernel.at(i, j);
    col_sum[j] = acc;
  });
  parallel_for(n, [&](std::size_t i) {
    const double rm = row_sum[i] / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      out.at(i, j) = kernel.at(i, j) - rm - col_sum[j] / static_cast<double>(n) + grand;
    }
  });
  return out;
}

double hsic(const KernelMatrix& k_centered, const KernelMatrix& l_centered) {
  if (k_centered.centering == Centering::none || k_centered.centering != l_centered.centering) {
    throw std::invalid_argument("hsic expects two kernels centered the same way");
  }
  if (k_centered.n != l_centered.n) throw std::invalid_argument("hsic: kernel sizes differ");
  const std::size_t n = k_centered.n;
  if (n < 2) throw std::invalid_argument("hsic needs at least 2 items");
  std::vector<double> row_acc(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += k_centered.at(i, j) * l_centered.at(i, j);
    row_acc[i] = acc;
  });
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += row_acc[i];
  const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
  return total / denom;
}

double cka(const KernelMatrix& k, const KernelMatrix& l, Centering mode) {
  if (k.centering != Centering::none || l.centering != Centering::none) {
    throw std::invalid_argument("cka expects uncentered kernels");
  }
  if (k.n != l.n) throw std::invalid_argument("cka: kernel sizes differ");
  if (k.n < 2) throw std::invalid_argument("cka needs at least 2 items");
  const KernelMatrix kc = center_kernel(k, mode);
  const KernelMatrix lc = center_kernel(l, mode);
  const double cross = hsic(kc, lc);
  const double self_k = hsic(kc, kc);
  const double self_l = hsic(lc, lc);
  if (self_k <= 0.0) {
    throw degenerate_input_error("cka: HSIC(K,K) vanishes for '" + k.source_model + "'");
  }
  if (self_l <= 0.0) {
    throw degenerate_input_error("cka: HSIC(L,L) vanishes for '" + l.source_model + "'");
  }
  return clamp_unit(cross / std::sqrt(self_k * self_l));
}

std::vector<std::vector<std::uint32_t>> knn_lists(const EmbeddingSet& set, std::size_t k,
                                                  NeighborMetric metric) {
  std::optional<EmbeddingSet> storage;
  const EmbeddingSet& s = ensure_normalized(set, storage);
  require_counts(s, k);
  const std::size_t n = s.n_items;
  std::vector<std::vector<std::uint32_t>> lists(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> score(n);
    const auto row_i = s.row(i);
    if (metric == NeighborMetric::inner_product) {
      for (std::size_t j = 0; j < n; ++j) score[j] = -detail::dot(row_i, s.row(j));
    } else {
      for (std::size_t j = 0; j < n; ++j) score[j] = detail::dist_sq(row_i, s.row(j));
    }
    lists[i] = detail::select_k_best(score, i, k);
  });
  return lists;
}

bool MutualMask::at(std::size_t i, std::size_t j) const {
  const auto& row = rows[i];
  return std::binary_search(row.begin(), row.end(), static_cast<std::uint32_t>(j));
}

std::size_t MutualMask::count() const {
  std::size_t total = 0;
  for (const auto& row : rows) total += row.size();
  return total;
}

MutualMask mutual_knn_mask(const EmbeddingSet& f, const EmbeddingSet& g, std::size_t k,
                           NeighborMetric metric) {
  require_aligned(f, g);
  const auto fl = knn_lists(f, k, metric);
  const auto gl = knn_lists(g, k, metric);
  MutualMask mask;
  mask.n = f.n_items;
  mask.k = k;
  mask.rows.resize(mask.n);
  parallel_for(mask.n, [&](std::size_t i) { intersect_into(fl[i], gl[i], mask.rows[i]); });
  return mask;
}

CknnaModelState cknna_prepare(const EmbeddingSet& set, std::size_t k, const CknnaOptions& opts) {
  if (!set.normalized) {
    throw std::invalid_argument("cknna_prepare requires a normalized embedding set; call normalize_rows first");
  }
  require_counts(set, k);
  if (opts.centering == Centering::none) throw std::invalid_argument("centering mode must be scalar or double");
  CknnaModelState state;
  state.set = &set;
  state.k = k;
  state.neighbor = opts.neighbor;
  state.centering = opts.centering;
  state.knn = knn_lists(set, k, opts.neighbor);
  auto stats = kernel_centering_stats(set);
  state.row_mean = std::move(stats.row_mean);
  state.grand_mean = stats.grand_mean;
  const std::size_t n = set.n_items;
  CenteringStats local{state.row_mean, state.grand_mean};
  std::vector<double> row_acc(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double acc = 0.0;
    for (const std::uint32_t j : state.knn[i]) {
      const double v = centered_entry(set, local, opts.centering, i, j);
      acc += v * v;
    }
    row_acc[i] = acc;
  });
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += row_acc[i];
  state.self_align = total;
  return state;
}

double cknna_pair(const CknnaModelState& f, const CknnaModelState& g, const CknnaOptions& opts) {
  if (!f.set || !g.set) throw std::invalid_argument("cknna_pair: uninitialized state");
  if (f.k != g.k || f.neighbor != g.neighbor || f.centering != g.centering) {
    throw std::invalid_argument("cknna_pair: states prepared with different options");
  }
  if (f.centering != opts.centering || f.neighbor != opts.neighbor) {
    throw std::invalid_argument("cknna_pair: states do not match the requested options");
  }
  require_aligned(*f.set, *g.set);
  const std::size_t n = f.set->n_items;
  const CenteringStats fstats{f.row_mean, f.grand_mean};
  const CenteringStats gstats{g.row_mean, g.grand_mean};
  std::vector<double> num_acc(n, 0.0), ff_acc(n, 0.0), gg_acc(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::uint32_t> shared;
    intersect_into(f.knn[i], g.knn[i], shared);
    double num = 0.0, ff = 0.0, gg = 0.0;
    for (const std::uint32_t j : shared) {
      const double kv = centered_entry(*f.set, fstats, opts.centering, i, j);
      const double lv = centered_entry(*g.set, gstats, opts.centering, i, j);
      num += kv * lv;
      ff += kv * kv;
      gg += lv * lv;
    }
    num_acc[i] = num;
    ff_acc[i] = ff;
    gg_acc[i] = gg;
  });
  double num = 0.0, ff_shared = 0.0, gg_shared = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += num_acc[i];
    ff_shared += ff_acc[i];
    gg_shared += gg_acc[i];
  }
  const double den_f = opts.shared_denominator_mask ? ff_shared : f.self_align;
  const double den_g = opts.shared_denominator_mask ? gg_shared : g.self_align;
  if (den_f <= 0.0) {
    throw degenerate_input_error("cknna: masked alignment denominator vanishes for '" +
                                 f.set->model_name + "'");
  }
  if (den_g <= 0.0) {
    throw degenerate_input_error("cknna: masked alignment denominator vanishes for '" +
                                 g.set->model_name + "'");
  }
  return clamp_unit(num / std::sqrt(den_f * den_g));
}

double cknna(const EmbeddingSet& f, const EmbeddingSet& g, std::size_t k, const CknnaOptions& opts) {
  require_aligned(f, g);
  std::optional<EmbeddingSet> f_storage, g_storage;
  const EmbeddingSet& fn = ensure_normalized(f, f_storage);
  const EmbeddingSet& gn = ensure_normalized(g, g_storage);
  const CknnaModelState sf = cknna_prepare(fn, k, opts);
  const CknnaModelState sg = cknna_prepare(gn, k, opts);
  return cknna_pair(sf, sg, opts);
}

CkaModelState cka_prepare(const EmbeddingSet& set, Centering mode) {
  if (!set.normalized) {
    throw std::invalid_argument("cka_prepare requires a normalized embedding set; call normalize_rows first");
  }
  if (set.n_items < 2) throw std::invalid_argument("'" + set.model_name + "': need at least 2 items");
  if (mode == Centering::none) throw std::invalid_argument("centering mode must be scalar or double");
  const std::size_t n = set.n_items, d = set.dim;
  CkaModelState state;
  state.set = &set;
  state.centering = mode;
  std::vector<double> col_sum(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = set.row(i);
    for (std::size_t a = 0; a < d; ++a) col_sum[a] += row[a];
  }
  const double nd = static_cast<double>(n);
  const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
  if (mode == Centering::scalar) {
    state.col_sum = col_sum;
    state.kernel_mean = detail::dot(col_sum, col_sum) / (nd * nd);
    // sum_ij K_ij^2 = ||Phi^T Phi||_F^2, accumulated row by row of the Gram.
    std::vector<double> gram_row_acc(d, 0.0);
    parallel_for(d, [&](std::size_t a) {
      std::vector<double> grow(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = set.row(i);
        const double va = row[a];
        if (va == 0.0) continue;
        for (std::size_t b = 0; b < d; ++b) grow[b] += va * row[b];
      }
      double acc = 0.0;
      for (std::size_t b = 0; b < d; ++b) acc += grow[b] * grow[b];
      gram_row_acc[a] = acc;
    });
    double sq = 0.0;
    for (std::size_t a = 0; a < d; ++a) sq += gram_row_acc[a];
    state.self_hsic = (sq - nd * nd * state.kernel_mean * state.kernel_mean) / denom;
  } else {
    state.centered.resize(n * d);
    for (std::size_t a = 0; a < d; ++a) col_sum[a] /= nd;
    parallel_for(n, [&](std::size_t i) {
      const auto row = set.row(i);
      for (std::size_t a = 0; a < d; ++a) state.centered[i * d + a] = row[a] - col_sum[a];
    });
    std::vector<double> gram_row_acc(d, 0.0);
    parallel_for(d, [&](std::size_t a) {
      std::vector<double> grow(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double va = state.centered[i * d + a];
        if (va == 0.0) continue;
        for (std::size_t b = 0; b < d; ++b) grow[b] += va * state.centered[i * d + b];
      }
      double acc = 0.0;
      for (std::size_t b = 0; b < d; ++b) acc += grow[b] * grow[b];
      gram_row_acc[a] = acc;
    });
    double sq = 0.0;
    for (std::size_t a = 0; a < d; ++a) sq += gram_row_acc[a];
    state.self_hsic = sq / denom;
  }
  if (state.self_hsic <= 0.0) {
    throw degenerate_input_error("cka: HSIC(K,K) vanishes for '" + set.model_name + "'");
  }
  return state;
}

double cka_pair(const CkaModelState& f, const CkaModelState& g) {
  if (!f.set || !g.set) throw std::invalid_argument("cka_pair: uninitialized state");
  if (f.centering != g.centering) throw std::invalid_argument("cka_pair: centering modes differ");
  require_aligned(*f.set, *g.set);
  const std::size_t n = f.set->n_items;
  const std::size_t df = f.set->dim, dg = g.set->dim;
  const double nd = static_cast<double>(n);
  const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
  // G = Phi^T Psi, accumulated over rows of G so threads never share a slot.
  std::vector<double> gram_row_acc(df, 0.0);
  const bool scalar = f.centering == Centering::scalar;
  parallel_for(df, [&](std::size_t a) {
    std::vector<double> grow(dg, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double va = scalar ? f.set->row(i)[a] : f.centered[i * df + a];
      if (va == 0.0) continue;
      const double* gi = scalar ? g.set->row(i).data() : g.centered.data() + i * dg;
      for (std::size_t b = 0; b < dg; ++b) grow[b] += va * gi[b];
    }
    double acc = 0.0;
    for (std::size_t b = 0; b < dg; ++b) acc += grow[b] * grow[b];
    gram_row_acc[a] = acc;
  });
  double sq = 0.0;
  for (std::size_t a = 0; a < df; ++a) sq += gram_row_acc[a];
  double cross = 0.0;
  if (scalar) {
    cross = (sq - nd * nd * f.kernel_mean * g.kernel_mean) / denom;
  } else {
    cross = sq / denom;
  }
  return clamp_unit(cross / std::sqrt(f.self_hsic * g.self_hsic));
}

double cka(const EmbeddingSet& f, const EmbeddingSet& g, Centering mode) {
  require_aligned(f, g);
  std::optional<EmbeddingSet> f_storage, g_storage;
  const EmbeddingSet& fn = ensure_normalized(f, f_storage);
  const EmbeddingSet& gn = ensure_normalized(g, g_storage);
  const CkaModelState sf = cka_prepare(fn, mode);
  const CkaModelState sg = cka_prepare(gn, mode);
  return cka_pair(sf, sg);
}

}  // namespace repalign
