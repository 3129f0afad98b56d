#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace repalign {

// One model's embeddings of N shared items, row-major N x dim.
struct EmbeddingSet {
  std::string model_name;
  std::size_t n_items = 0;
  std::size_t dim = 0;
  std::vector<double> values;         // n_items * dim
  std::vector<std::string> item_ids;  // empty, or one id per row
  bool normalized = false;            // rows scaled to max |entry| == 1
  bool baseline = false;              // reference-noise model; excluded from trees

  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
};

// Validates shape and finiteness. Throws std::invalid_argument on a shape
// mismatch and data_error naming the first non-finite cell.
EmbeddingSet make_embedding_set(std::string model_name, std::size_t n_items, std::size_t dim,
                                std::vector<double> values);

enum class EmbeddingFormat { csv, emb };
EmbeddingFormat parse_embedding_format(std::string_view name);
// auto-detects from the extension: ".emb" is binary, everything else CSV.
EmbeddingFormat embedding_format_for_path(const std::filesystem::path& path);

// CSV: one row per line, comma-separated, '#' lines ignored.
// EMB: "EMB1" magic, little-endian u32 header length, JSON header
// {name, n, d, dtype: f32|f64, order: row-major}, then n*d little-endian values.
EmbeddingSet load_embeddings(const std::filesystem::path& path, EmbeddingFormat format);
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path, EmbeddingFormat format);

struct NormalizeResult {
  EmbeddingSet set;
  std::size_t zero_rows = 0;
};

// Divides each row by its maximum absolute entry. All-zero rows pass through
// unchanged and are tallied. Idempotent: a second pass is the identity.
NormalizeResult normalize_rows(EmbeddingSet set);

// First n entries of a seeded permutation of [0, n_items); depends only on
// (n_items, n, seed).
std::vector<std::size_t> subsample_indices(std::size_t n_items, std::size_t n, std::uint64_t seed);
EmbeddingSet subsample(const EmbeddingSet& set, std::size_t n, std::uint64_t seed);

// Pairwise metrics assume both sets embed the same items in the same order.
// Throws std::invalid_argument on a count or item-id mismatch.
void require_aligned(const EmbeddingSet& f, const EmbeddingSet& g);

}  // namespace repalign
