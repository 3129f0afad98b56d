#include "repalign/global_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dense_ops.hpp"
#include "repalign/errors.hpp"
#include "repalign/parallel.hpp"

namespace repalign {

namespace {

void require_pairable(const EmbeddingSet& set) {
  if (set.n_items < 2) throw std::invalid_argument("'" + set.model_name + "': need at least 2 items");
}

double distance(const EmbeddingSet& set, std::size_t i, std::size_t j) {
  return std::sqrt(detail::dist_sq(set.row(i), set.row(j)));
}

// Per-row distance scores for rank metrics; lower means nearer.
void rank_scores(const EmbeddingSet& set, RankDistance distance, std::size_t i,
                 std::vector<double>& out) {
  const std::size_t n = set.n_items;
  out.resize(n);
  const auto row_i = set.row(i);
  if (distance == RankDistance::euclidean) {
    for (std::size_t j = 0; j < n; ++j) out[j] = detail::dist_sq(row_i, set.row(j));
  } else {
    for (std::size_t j = 0; j < n; ++j) out[j] = -detail::dot(row_i, set.row(j));
  }
}

void fill_rank_row(const std::vector<double>& scores, std::size_t i, std::size_t n,
                   std::uint32_t* ranks_row, std::uint32_t* order_row) {
  const auto order = detail::select_k_best(scores, i, n - 1, /*sort_by_index=*/false);
  for (std::size_t p = 0; p < order.size(); ++p) {
    order_row[p] = order[p];
    ranks_row[order[p]] = static_cast<std::uint32_t>(p + 1);
  }
  ranks_row[i] = 0;
}

}  // namespace

CenteredDistanceMatrix centered_distance_matrix(const EmbeddingSet& set) {
  require_pairable(set);
  const std::size_t n = set.n_items;
  CenteredDistanceMatrix m;
  m.n = n;
  m.raw.resize(n * n);
  parallel_for(n, [&](std::size_t i) {
    m.raw[i * n + i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(set, i, j);
      m.raw[i * n + j] = d;
      m.raw[j * n + i] = d;
    }
  });
  m.row_means.resize(n);
  m.col_means.resize(n);
  parallel_for(n, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += m.raw[i * n + j];
    m.row_means[i] = acc / static_cast<double>(n);
  });
  parallel_for(n, [&](std::size_t j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += m.raw[i * n + j];
    m.col_means[j] = acc / static_cast<double>(n);
  });
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += m.row_means[i];
  m.grand_mean = total / static_cast<double>(n);
  m.centered.resize(n * n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      m.centered[i * n + j] = m.raw[i * n + j] - m.row_means[i] - m.col_means[j] + m.grand_mean;
    }
  });
  return m;
}

DcorPrep dcor_prepare(const EmbeddingSet& set) {
  require_pairable(set);
  const std::size_t n = set.n_items;
  DcorPrep prep;
  prep.set = &set;
  prep.row_means.resize(n);
  parallel_for(n, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += distance(set, i, j);
    prep.row_means[i] = acc / static_cast<double>(n);
  });
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += prep.row_means[i];
  prep.grand_mean = total / static_cast<double>(n);
  std::vector<double> var_acc(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = distance(set, i, j) - prep.row_means[i] - prep.row_means[j] + prep.grand_mean;
      acc += a * a;
    }
    var_acc[i] = acc;
  });
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += var_acc[i];
  prep.variance = var / (static_cast<double>(n) * static_cast<double>(n));
  if (prep.variance <= 0.0) {
    throw degenerate_input_error("dcor: distance variance vanishes for '" + set.model_name +
                                 "' (all points coincide)");
  }
  return prep;
}

double dcor_pair(const DcorPrep& f, const DcorPrep& g, const DcorOptions& opts) {
  if (!f.set || !g.set) throw std::invalid_argument("dcor_pair: uninitialized prep");
  require_aligned(*f.set, *g.set);
  const std::size_t n = f.set->n_items;
  std::vector<double> cov_acc(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = distance(*f.set, i, j) - f.row_means[i] - f.row_means[j] + f.grand_mean;
      const double b = distance(*g.set, i, j) - g.row_means[i] - g.row_means[j] + g.grand_mean;
      acc += a * b;
    }
    cov_acc[i] = acc;
  });
  double cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) cov += cov_acc[i];
  cov /= static_cast<double>(n) * static_cast<double>(n);
  const double ratio = std::clamp(cov / std::sqrt(f.variance * g.variance), 0.0, 1.0);
  return opts.sqrt_output ? std::sqrt(ratio) : ratio;
}

double dcor(const EmbeddingSet& f, const EmbeddingSet& g, const DcorOptions& opts) {
  require_aligned(f, g);
  const DcorPrep pf = dcor_prepare(f);
  const DcorPrep pg = dcor_prepare(g);
  return dcor_pair(pf, pg, opts);
}

const char* to_string(RankDistance distance) {
  return distance == RankDistance::euclidean ? "euclidean" : "inner-product";
}

RankDistance parse_rank_distance(std::string_view name) {
  if (name == "euclidean") return RankDistance::euclidean;
  if (name == "inner-product") return RankDistance::inner_product;
  throw std::invalid_argument("unknown rank distance '" + std::string(name) +
                              "' (expected euclidean or inner-product)");
}

NeighborTable rank_table(const EmbeddingSet& set, RankDistance distance) {
  require_pairable(set);
  const std::size_t n = set.n_items;
  NeighborTable table;
  table.n = n;
  table.ranks.resize(n * n);
  table.order.resize(n * (n - 1));
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> scores;
    rank_scores(set, distance, i, scores);
    fill_rank_row(scores, i, n, table.ranks.data() + i * n, table.order.data() + i * (n - 1));
  });
  return table;
}

NeighborTable rank_table_from_distances(const std::vector<double>& distances, std::size_t n) {
  if (n < 2) throw std::invalid_argument("rank table needs at least 2 items");
  if (distances.size() != n * n) {
    throw std::invalid_argument("distance matrix size mismatch: expected " + std::to_string(n * n) +
                                " entries, got " + std::to_string(distances.size()));
  }
  NeighborTable table;
  table.n = n;
  table.ranks.resize(n * n);
  table.order.resize(n * (n - 1));
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> scores(distances.begin() + static_cast<std::ptrdiff_t>(i * n),
                               distances.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    fill_rank_row(scores, i, n, table.ranks.data() + i * n, table.order.data() + i * (n - 1));
  });
  return table;
}

namespace {

// Mean to-space rank of each point's k nearest from-space neighbors, times 2/N.
double imbalance_direction(const EmbeddingSet& from, const EmbeddingSet& to, std::size_t k,
                           RankDistance distance) {
  const std::size_t n = from.n_items;
  std::vector<double> row_acc(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> from_scores, to_scores;
    rank_scores(from, distance, i, from_scores);
    const auto knn = detail::select_k_best(from_scores, i, k, /*sort_by_index=*/false);
    rank_scores(to, distance, i, to_scores);
    const auto to_order = detail::select_k_best(to_scores, i, n - 1, /*sort_by_index=*/false);
    std::vector<std::uint32_t> to_rank(n, 0);
    for (std::size_t p = 0; p < to_order.size(); ++p) to_rank[to_order[p]] = static_cast<std::uint32_t>(p + 1);
    double acc = 0.0;
    for (const std::uint32_t j : knn) acc += static_cast<double>(to_rank[j]);
    row_acc[i] = acc;
  });
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += row_acc[i];
  const double nd = static_cast<double>(n);
  return 2.0 * total / (static_cast<double>(k) * nd * nd);
}

}  // namespace

ImbalancePair information_imbalance(const EmbeddingSet& f, const EmbeddingSet& g, std::size_t k,
                                    RankDistance distance) {
  require_aligned(f, g);
  require_pairable(f);
  if (k < 1 || k > f.n_items - 1) {
    throw std::invalid_argument("k = " + std::to_string(k) + " out of range [1, " +
                                std::to_string(f.n_items - 1) + "]");
  }
  ImbalancePair pair;
  pair.k = k;
  pair.n = f.n_items;
  pair.forward = imbalance_direction(f, g, k, distance);
  pair.backward = imbalance_direction(g, f, k, distance);
  return pair;
}

ImbalancePair information_imbalance_from_ranks(const NeighborTable& f, const NeighborTable& g,
                                               std::size_t k) {
  if (f.n != g.n) throw std::invalid_argument("rank tables cover different item counts");
  if (f.n < 2) throw std::invalid_argument("need at least 2 items");
  if (k < 1 || k > f.n - 1) {
    throw std::invalid_argument("k = " + std::to_string(k) + " out of range [1, " + std::to_string(f.n - 1) +
                                "]");
  }
  const std::size_t n = f.n;
  auto direction = [n, k](const NeighborTable& from, const NeighborTable& to) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t* order = from.row_order(i);
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += static_cast<double>(to.rank(i, order[p]));
      total += acc;
    }
    const double nd = static_cast<double>(n);
    return 2.0 * total / (static_cast<double>(k) * nd * nd);
  };
  ImbalancePair pair;
  pair.k = k;
  pair.n = n;
  pair.forward = direction(f, g);
  pair.backward = direction(g, f);
  return pair;
}

}  // namespace repalign
