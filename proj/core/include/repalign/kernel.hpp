#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "repalign/embedding.hpp"

namespace repalign {

enum class Centering { none, scalar, doubly };
const char* to_string(Centering mode);
Centering parse_centering(std::string_view name);  // "scalar" | "double"

// Similarity used to rank neighbors in kernel-space metrics.
enum class NeighborMetric { inner_product, euclidean };
const char* to_string(NeighborMetric metric);
NeighborMetric parse_neighbor_metric(std::string_view name);

struct KernelMatrix {
  std::string source_model;
  std::size_t n = 0;
  std::vector<double> values;  // n x n, symmetric
  Centering centering = Centering::none;

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

// Gram matrix of row inner products. Rows are expected normalized; a raw set
// is normalized on the fly with a warning.
KernelMatrix inner_product_kernel(const EmbeddingSet& set);

// scalar: subtract the grand mean. doubly: subtract row and column means,
// add back the grand mean. Input must be uncentered.
KernelMatrix center_kernel(const KernelMatrix& kernel, Centering mode);

// Trace(K L^T) / (n - 1)^2 for two same-size kernels centered the same way.
double hsic(const KernelMatrix& k_centered, const KernelMatrix& l_centered);

// HSIC(K,L) / sqrt(HSIC(K,K) HSIC(L,L)), clamped to [-1, 1].
double cka(const KernelMatrix& k, const KernelMatrix& l, Centering mode = Centering::scalar);
// Feature-space path over the same arithmetic; never materializes an N x N matrix.
double cka(const EmbeddingSet& f, const EmbeddingSet& g, Centering mode = Centering::scalar);

// Per-row k-nearest-neighbor lists, self excluded, ties broken toward the
// lower index, each row's indices ascending. Requires 1 <= k <= N - 1.
std::vector<std::vector<std::uint32_t>> knn_lists(const EmbeddingSet& set, std::size_t k,
                                                  NeighborMetric metric = NeighborMetric::inner_product);

// alpha(i, j) = 1 iff j is in the k-NN of i in BOTH spaces. Stored sparse,
// row by row, column indices ascending.
struct MutualMask {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::vector<std::uint32_t>> rows;

  bool at(std::size_t i, std::size_t j) const;
  std::size_t count() const;
};
MutualMask mutual_knn_mask(const EmbeddingSet& f, const EmbeddingSet& g, std::size_t k,
                           NeighborMetric metric = NeighborMetric::inner_product);

struct CknnaOptions {
  Centering centering = Centering::scalar;
  NeighborMetric neighbor = NeighborMetric::inner_product;
  // Off: each denominator term uses its own space's mask. On: both reuse the
  // cross-space mask from the numerator.
  bool shared_denominator_mask = false;
};

// Neighbor-masked CKA. Works from per-model neighbor lists and centering
// statistics, so memory stays O(N (k + d)) at any N.
double cknna(const EmbeddingSet& f, const EmbeddingSet& g, std::size_t k, const CknnaOptions& opts = {});

// Per-model state reused across pairs by all-pairs drivers. Holds a pointer
// to the (normalized) embedding set, which must outlive the state.
struct CknnaModelState {
  const EmbeddingSet* set = nullptr;
  std::size_t k = 0;
  NeighborMetric neighbor = NeighborMetric::inner_product;
  Centering centering = Centering::scalar;
  std::vector<std::vector<std::uint32_t>> knn;  // ascending per row
  std::vector<double> row_mean;                 // kernel row means (doubly centering)
  double grand_mean = 0.0;                      // kernel grand mean
  double self_align = 0.0;                      // masked sum of squared centered entries
};
CknnaModelState cknna_prepare(const EmbeddingSet& set, std::size_t k, const CknnaOptions& opts = {});
double cknna_pair(const CknnaModelState& f, const CknnaModelState& g, const CknnaOptions& opts = {});

// Per-model state for the feature-space CKA path.
struct CkaModelState {
  const EmbeddingSet* set = nullptr;
  Centering centering = Centering::scalar;
  std::vector<double> centered;  // doubly mode: column-centered copy
  std::vector<double> col_sum;   // scalar mode: per-dimension sums
  double kernel_mean = 0.0;      // scalar mode: grand mean of the kernel
  double self_hsic = 0.0;
};
CkaModelState cka_prepare(const EmbeddingSet& set, Centering mode = Centering::scalar);
double cka_pair(const CkaModelState& f, const CkaModelState& g);

}  // namespace repalign
