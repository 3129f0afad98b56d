#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "repalign/aggregation.hpp"

namespace repalign {

// Row and column confusion profiles of a non-negative square matrix:
// smoothed, normalized distributions over the M models.
struct ConfusionProfiles {
  std::size_t m = 0;
  double epsilon = 0.0;
  std::vector<double> row_profiles;  // m x m; row i sums to 1
  std::vector<double> col_profiles;  // m x m; row i is model i's column profile

  std::span<const double> row(std::size_t i) const { return {row_profiles.data() + i * m, m}; }
  std::span<const double> col(std::size_t i) const { return {col_profiles.data() + i * m, m}; }
};
ConfusionProfiles confusion_profiles(const AlignmentMatrix& matrix, double epsilon = 1e-12);

// Jensen-Shannon divergence, base 2; inputs must be same-length probability
// vectors (non-negative, each summing to 1 within 1e-9).
double jsd(std::span<const double> p, std::span<const double> q);

struct DistanceMatrix {
  std::vector<std::string> labels;
  std::size_t m = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * m + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * m + j]; }
};

// D_ij = alpha * sqrt(JSD(row_i, row_j)) + (1 - alpha) * sqrt(JSD(col_i, col_j)).
// Baseline models recorded in the matrix are excluded first.
DistanceMatrix model_distance_matrix(const AlignmentMatrix& matrix, double alpha = 0.5,
                                     double epsilon = 1e-12);

struct PhyloTree {
  struct Edge {
    std::size_t a = 0, b = 0;
    double length = 0.0;
  };
  std::vector<std::string> leaf_names;  // nodes 0 .. M-1; internals follow
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  std::size_t final_edge = 0;  // index of the closing join; Newick roots at its midpoint
};

// Neighbor joining over a symmetric non-negative distance matrix. Negative
// branch lengths are clamped to zero with the slack pushed to the sibling.
PhyloTree neighbor_joining(const DistanceMatrix& distances);

// Canonical Newick form: children ordered by smallest contained leaf label,
// labels quoted only when needed, lengths trimmed to `precision` digits.
std::string to_newick(const PhyloTree& tree, int precision = 6);

// Inverse of to_newick for binary-rooted strings: the two root children are
// merged back into the final edge. Leaf ids follow appearance order.
PhyloTree parse_newick(const std::string& text);

// Pairwise path lengths between leaves, in leaf_names order (m x m).
std::vector<double> leaf_distance_matrix(const PhyloTree& tree);

}  // namespace repalign
