#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "repalign/embedding.hpp"
#include "repalign/global_metrics.hpp"
#include "repalign/kernel.hpp"

namespace repalign {

enum class Warp { linear, tanh_mixed };
const char* to_string(Warp warp);
Warp parse_warp(std::string_view name);

struct SharedLatentSpec {
  std::size_t n = 0;
  std::size_t d_latent = 0;
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  double noise_sigma = 0.0;
  Warp warp = Warp::linear;
  std::uint64_t seed = 0;
};

// Views of one latent Gaussian draw: each view maps the latent rows through
// its own random linear map (optionally tanh-mixed) and adds white noise.
// Draw order is fixed: latent matrix first, then per view its map and noise.
std::vector<EmbeddingSet> shared_latent_family(std::size_t n, std::size_t d_latent,
                                               std::span<const std::size_t> dims,
                                               std::span<const double> noise_sigma, Warp warp,
                                               std::uint64_t seed);
std::pair<EmbeddingSet, EmbeddingSet> shared_latent_pair(const SharedLatentSpec& spec);

// Independent Gaussian set, flagged as a baseline model.
EmbeddingSet random_baseline(std::size_t n, std::size_t d, std::uint64_t seed);

// Simple manifolds for dimension-recovery checks, embedded in ambient_dim
// coordinates (zero-padded) with an optional random rotation.
EmbeddingSet sample_segment(std::size_t n, std::size_t ambient_dim, std::uint64_t seed);
EmbeddingSet sample_disk(std::size_t n, std::size_t ambient_dim, std::uint64_t seed);
EmbeddingSet sample_cube(std::size_t n, std::size_t cube_dim, std::size_t ambient_dim, std::uint64_t seed);

// Applies a seeded random rotation (orthogonalized Gaussian matrix).
EmbeddingSet rotate_randomly(const EmbeddingSet& set, std::uint64_t seed);

// Reference implementations: direct loops over materialized matrices, with
// their own neighbor sorts. Refuse inputs larger than oracle_size_cap.
inline constexpr std::size_t oracle_size_cap = 256;

double oracle_hsic(const KernelMatrix& k_centered, const KernelMatrix& l_centered);
double oracle_cka(const EmbeddingSet& f, const EmbeddingSet& g, Centering mode = Centering::scalar);
double oracle_cknna(const EmbeddingSet& f, const EmbeddingSet& g, std::size_t k,
                    const CknnaOptions& opts = {});
double oracle_dcor(const EmbeddingSet& f, const EmbeddingSet& g, const DcorOptions& opts = {});
std::vector<std::vector<std::uint32_t>> oracle_ranks(const EmbeddingSet& set,
                                                     RankDistance distance = RankDistance::euclidean);
ImbalancePair oracle_information_imbalance(const EmbeddingSet& f, const EmbeddingSet& g, std::size_t k,
                                           RankDistance distance = RankDistance::euclidean);

}  // namespace repalign
