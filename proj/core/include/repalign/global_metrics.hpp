#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "repalign/embedding.hpp"

namespace repalign {

struct CenteredDistanceMatrix {
  std::size_t n = 0;
  std::vector<double> raw;       // n x n Euclidean distances
  std::vector<double> centered;  // raw minus row/col means plus grand mean
  std::vector<double> row_means;
  std::vector<double> col_means;
  double grand_mean = 0.0;

  double raw_at(std::size_t i, std::size_t j) const { return raw[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return centered[i * n + j]; }
};

// Materialized double-centered Euclidean distance matrix; O(N^2) memory,
// intended for moderate N and for checking the streaming path.
CenteredDistanceMatrix centered_distance_matrix(const EmbeddingSet& set);

struct DcorOptions {
  bool sqrt_output = false;  // report sqrt of the ratio instead of the ratio
};

// Distance correlation between the two sets' centered distance structure.
// Streaming two-pass implementation; never materializes an N x N matrix.
double dcor(const EmbeddingSet& f, const EmbeddingSet& g, const DcorOptions& opts = {});

// Per-model half of the dcor computation, reusable across pairs.
struct DcorPrep {
  const EmbeddingSet* set = nullptr;
  std::vector<double> row_means;  // row means of the raw distance matrix
  double grand_mean = 0.0;
  double variance = 0.0;  // mean squared centered entry
};
DcorPrep dcor_prepare(const EmbeddingSet& set);
double dcor_pair(const DcorPrep& f, const DcorPrep& g, const DcorOptions& opts = {});

// Distance used when ranking neighbors for rank-based metrics.
enum class RankDistance { euclidean, inner_product };
const char* to_string(RankDistance distance);
RankDistance parse_rank_distance(std::string_view name);

// Dense neighbor ranks: rank(i, j) is the position (1-based) of j among all
// points other than i, by increasing distance from i, ties toward the lower
// index. O(N^2) memory; metrics below also have streaming entry points.
struct NeighborTable {
  std::size_t n = 0;
  std::vector<std::uint32_t> ranks;  // n x n, diagonal 0
  std::vector<std::uint32_t> order;  // n x (n-1), nearest first

  std::uint32_t rank(std::size_t i, std::size_t j) const { return ranks[i * n + j]; }
  const std::uint32_t* row_order(std::size_t i) const { return order.data() + i * (n - 1); }
};
NeighborTable rank_table(const EmbeddingSet& set, RankDistance distance = RankDistance::euclidean);
// Same table from a precomputed symmetric distance matrix (n x n, row-major).
NeighborTable rank_table_from_distances(const std::vector<double>& distances, std::size_t n);

struct ImbalancePair {
  double forward = 0.0;   // rank information lost going f -> g
  double backward = 0.0;  // g -> f
  std::size_t k = 0;
  std::size_t n = 0;
};

// Mean g-rank of the k nearest f-neighbors, scaled by 2/N (and vice versa).
// Streaming; requires 1 <= k <= N - 1.
ImbalancePair information_imbalance(const EmbeddingSet& f, const EmbeddingSet& g, std::size_t k,
                                    RankDistance distance = RankDistance::euclidean);
ImbalancePair information_imbalance_from_ranks(const NeighborTable& f, const NeighborTable& g,
                                               std::size_t k);

}  // namespace repalign
