#include "repalign/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "repalign/errors.hpp"
#include "repalign/rng.hpp"

namespace repalign {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Column-orthonormalized Gaussian matrix (modified Gram-Schmidt), d x d.
std::vector<double> random_rotation(std::size_t d, Xoshiro256StarStar& rng) {
  std::vector<double> q(d * d);
  for (auto& v : q) v = rng.normal();
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t prev = 0; prev < c; ++prev) {
      double proj = 0.0;
      for (std::size_t r = 0; r < d; ++r) proj += q[r * d + c] * q[r * d + prev];
      for (std::size_t r = 0; r < d; ++r) q[r * d + c] -= proj * q[r * d + prev];
    }
    double norm_sq = 0.0;
    for (std::size_t r = 0; r < d; ++r) norm_sq += q[r * d + c] * q[r * d + c];
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) throw degenerate_input_error("random rotation draw collapsed; try another seed");
    for (std::size_t r = 0; r < d; ++r) q[r * d + c] /= norm;
  }
  return q;
}

void rotate_rows(EmbeddingSet& set, const std::vector<double>& q) {
  const std::size_t d = set.dim;
  std::vector<double> tmp(d);
  for (std::size_t i = 0; i < set.n_items; ++i) {
    auto row = set.row(i);
    for (std::size_t r = 0; r < d; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += q[r * d + c] * row[c];
      tmp[r] = acc;
    }
    std::copy(tmp.begin(), tmp.end(), row.begin());
  }
}

EmbeddingSet blank_set(std::string name, std::size_t n, std::size_t d) {
  EmbeddingSet set;
  set.model_name = std::move(name);
  set.n_items = n;
  set.dim = d;
  set.values.assign(n * d, 0.0);
  return set;
}

}  // namespace

const char* to_string(Warp warp) { return warp == Warp::linear ? "linear" : "tanh-mixed"; }

Warp parse_warp(std::string_view name) {
  if (name == "linear") return Warp::linear;
  if (name == "tanh-mixed") return Warp::tanh_mixed;
  throw std::invalid_argument("unknown warp '" + std::string(name) + "' (expected linear or tanh-mixed)");
}

std::vector<EmbeddingSet> shared_latent_family(std::size_t n, std::size_t d_latent,
                                               std::span<const std::size_t> dims,
                                               std::span<const double> noise_sigma, Warp warp,
                                               std::uint64_t seed) {
  if (n < 1 || d_latent < 1) throw std::invalid_argument("need n >= 1 and d_latent >= 1");
  if (dims.empty() || dims.size() != noise_sigma.size()) {
    throw std::invalid_argument("need one view dimension per noise level, at least one view");
  }
  for (std::size_t v = 0; v < dims.size(); ++v) {
    if (dims[v] < 1) throw std::invalid_argument("view dimensions must be >= 1");
    if (warp == Warp::linear && dims[v] < d_latent) {
      throw std::invalid_argument("linear views need dim >= d_latent to stay full rank");
    }
    if (noise_sigma[v] < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
  }
  Xoshiro256StarStar rng(seed);
  std::vector<double> latent(n * d_latent);
  for (auto& v : latent) v = rng.normal();
  std::vector<EmbeddingSet> views;
  views.reserve(dims.size());
  for (std::size_t v = 0; v < dims.size(); ++v) {
    const std::size_t d = dims[v];
    std::vector<double> map(d * d_latent);
    for (auto& x : map) x = rng.normal();
    EmbeddingSet view = blank_set("view-" + std::to_string(v), n, d);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = view.row(i);
      const double* z = latent.data() + i * d_latent;
      for (std::size_t a = 0; a < d; ++a) {
        double acc = 0.0;
        for (std::size_t l = 0; l < d_latent; ++l) acc += map[a * d_latent + l] * z[l];
        row[a] = warp == Warp::tanh_mixed ? 0.5 * (acc + std::tanh(acc)) : acc;
      }
    }
    if (noise_sigma[v] > 0.0) {
      for (auto& x : view.values) x += noise_sigma[v] * rng.normal();
    }
    views.push_back(std::move(view));
  }
  return views;
}

std::pair<EmbeddingSet, EmbeddingSet> shared_latent_pair(const SharedLatentSpec& spec) {
  const std::size_t dims[2] = {spec.d1, spec.d2};
  const double noise[2] = {spec.noise_sigma, spec.noise_sigma};
  auto views = shared_latent_family(spec.n, spec.d_latent, dims, noise, spec.warp, spec.seed);
  return {std::move(views[0]), std::move(views[1])};
}

EmbeddingSet random_baseline(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("need n >= 1 and d >= 1");
  Xoshiro256StarStar rng(seed);
  EmbeddingSet set = blank_set("random-baseline", n, d);
  for (auto& v : set.values) v = rng.normal();
  set.baseline = true;
  return set;
}

EmbeddingSet sample_segment(std::size_t n, std::size_t ambient_dim, std::uint64_t seed) {
  if (ambient_dim < 1) throw std::invalid_argument("ambient dimension must be >= 1");
  Xoshiro256StarStar rng(seed);
  EmbeddingSet set = blank_set("segment", n, ambient_dim);
  for (std::size_t i = 0; i < n; ++i) set.row(i)[0] = rng.uniform01();
  rotate_rows(set, random_rotation(ambient_dim, rng));
  return set;
}

EmbeddingSet sample_disk(std::size_t n, std::size_t ambient_dim, std::uint64_t seed) {
  if (ambient_dim < 2) throw std::invalid_argument("ambient dimension must be >= 2 for a disk");
  Xoshiro256StarStar rng(seed);
  EmbeddingSet set = blank_set("disk", n, ambient_dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::sqrt(rng.uniform01());
    const double theta = kTwoPi * rng.uniform01();
    auto row = set.row(i);
    row[0] = r * std::cos(theta);
    row[1] = r * std::sin(theta);
  }
  rotate_rows(set, random_rotation(ambient_dim, rng));
  return set;
}

EmbeddingSet sample_cube(std::size_t n, std::size_t cube_dim, std::size_t ambient_dim, std::uint64_t seed) {
  if (cube_dim < 1 || ambient_dim < cube_dim) {
    throw std::invalid_argument("need 1 <= cube_dim <= ambient_dim");
  }
  Xoshiro256StarStar rng(seed);
  EmbeddingSet set = blank_set("cube-" + std::to_string(cube_dim), n, ambient_dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = set.row(i);
    for (std::size_t c = 0; c < cube_dim; ++c) row[c] = rng.uniform01();
  }
  rotate_rows(set, random_rotation(ambient_dim, rng));
  return set;
}

EmbeddingSet rotate_randomly(const EmbeddingSet& set, std::uint64_t seed) {
  Xoshiro256StarStar rng(seed);
  EmbeddingSet out = set;
  rotate_rows(out, random_rotation(out.dim, rng));
  out.normalized = false;
  return out;
}

}  // namespace repalign
