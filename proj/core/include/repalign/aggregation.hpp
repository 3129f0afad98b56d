#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "repalign/embedding.hpp"
#include "repalign/global_metrics.hpp"
#include "repalign/kernel.hpp"

namespace repalign {

enum class MetricKind { cknna, cka, dcor, ii_forward };
const char* to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view name);

struct MetricParams {
  std::size_t k = 25;                                   // cknna / imbalance neighbors
  Centering centering = Centering::scalar;              // kernel metrics
  NeighborMetric neighbor = NeighborMetric::inner_product;
  RankDistance rank_distance = RankDistance::euclidean;  // imbalance ranking
  bool sqrt_dcor = false;
  bool shared_denominator_mask = false;

  std::map<std::string, std::string> describe(MetricKind kind) const;
};

struct AlignmentMatrix {
  std::vector<std::string> model_names;
  std::size_t m = 0;
  std::vector<double> values;  // m x m; NaN marks a missing cell
  std::string metric;          // "" when the matrix is not metric-derived
  std::map<std::string, std::string> params;
  bool symmetric = true;
  std::vector<std::string> baselines;

  struct MissingCell {
    std::size_t i = 0, j = 0;
    std::string reason;
  };
  std::vector<MissingCell> missing;

  double at(std::size_t i, std::size_t j) const { return values[i * m + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * m + j]; }
  bool is_missing(std::size_t i, std::size_t j) const;
  std::optional<std::size_t> index_of(std::string_view model) const;
};

// All-pairs metric table. Each model's neighbor/centering state is prepared
// once and reused, and a model whose preparation fails degenerately loses
// its row and column (reason recorded) instead of failing the whole matrix.
AlignmentMatrix pairwise_matrix(std::span<const EmbeddingSet> sets, MetricKind metric,
                                const MetricParams& params = {});

struct GroupSpec {
  std::vector<std::string> group_order;  // first-appearance order
  std::map<std::string, std::string> model_to_group;
};
// CSV with a "model,group" header.
GroupSpec load_group_spec(const std::filesystem::path& path);

// Group-block means over non-missing cells; diagonal blocks include the
// models' own diagonal cells.
AlignmentMatrix condense(const AlignmentMatrix& matrix, const GroupSpec& groups);

struct PerformanceEntry {
  double performance = 0.0;
  std::optional<double> size;
};
// CSV with a "model,performance[,size]" header.
std::map<std::string, PerformanceEntry> load_performance(const std::filesystem::path& path);

struct ConvergenceRow {
  std::string model_name;
  double performance = 0.0;
  double alignment = 0.0;  // NaN if the matrix cell is missing
  std::optional<double> size;
};
struct ConvergenceTable {
  std::string reference;
  std::vector<ConvergenceRow> rows;          // matrix order, reference excluded
  std::optional<double> spearman_vs_rank;    // alignment vs performance rank
};
ConvergenceTable convergence_table(const AlignmentMatrix& matrix,
                                   const std::map<std::string, PerformanceEntry>& performance,
                                   const std::string& reference);

// Spearman rank correlation with average ranks for ties; nullopt when either
// side has no rank variance or fewer than 2 points.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// CSV (comment header with provenance) or JSON document. Round-trips
// metric, params, symmetry, baselines, and missing-cell reasons.
void save_matrix(const AlignmentMatrix& matrix, const std::filesystem::path& path, std::string_view format);
AlignmentMatrix load_matrix(const std::filesystem::path& path);

}  // namespace repalign
