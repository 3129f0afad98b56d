#include <benchmark/benchmark.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "repalign/aggregation.hpp"
#include "repalign/embedding.hpp"
#include "repalign/global_metrics.hpp"
#include "repalign/intrinsic_dim.hpp"
#include "repalign/kernel.hpp"
#include "repalign/phylo.hpp"
#include "repalign/rng.hpp"
#include "repalign/synth.hpp"

namespace {

using namespace repalign;

EmbeddingSet random_set(const std::string& name, std::size_t n, std::size_t d, std::uint64_t seed) {
  Xoshiro256StarStar rng(seed);
  std::vector<double> values(n * d);
  for (auto& v : values) v = rng.normal();
  return make_embedding_set(name, n, d, std::move(values));
}

std::pair<EmbeddingSet, EmbeddingSet> aligned_pair(std::size_t n, std::size_t d) {
  SharedLatentSpec spec;
  spec.n = n;
  spec.d_latent = 8;
  spec.d1 = d;
  spec.d2 = d;
  spec.noise_sigma = 0.1;
  spec.warp = Warp::linear;
  spec.seed = 7;
  auto [f, g] = shared_latent_pair(spec);
  return {normalize_rows(std::move(f)).set, normalize_rows(std::move(g)).set};
}

void bm_cknna(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto [f, g] = aligned_pair(n, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cknna(f, g, 25));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_cknna)->RangeMultiplier(2)->Range(256, 4096)->Complexity()->Unit(benchmark::kMillisecond);

// Per-pair cost once neighbor lists and centering stats are cached, as in
// pairwise_matrix: this is the part that scales with the number of pairs.
void bm_cknna_pair_prepared(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto [f, g] = aligned_pair(n, 64);
  const auto fs = cknna_prepare(f, 25);
  const auto gs = cknna_prepare(g, 25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cknna_pair(fs, gs));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_cknna_pair_prepared)
    ->RangeMultiplier(2)
    ->Range(256, 4096)
    ->Complexity()
    ->Unit(benchmark::kMillisecond);

void bm_cka(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto [f, g] = aligned_pair(n, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cka(f, g, Centering::scalar));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_cka)->RangeMultiplier(2)->Range(256, 4096)->Complexity()->Unit(benchmark::kMillisecond);

void bm_dcor(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto [f, g] = aligned_pair(n, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dcor(f, g));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_dcor)->RangeMultiplier(2)->Range(256, 2048)->Complexity()->Unit(benchmark::kMillisecond);

void bm_rank_table(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto set = random_set("ranks", n, 32, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_table(set));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_rank_table)->RangeMultiplier(2)->Range(256, 2048)->Complexity()->Unit(benchmark::kMillisecond);

void bm_information_imbalance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto f = random_set("ii-f", n, 32, 13);
  const auto g = random_set("ii-g", n, 16, 14);
  for (auto _ : state) {
    benchmark::DoNotOptimize(information_imbalance(f, g, 1));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_information_imbalance)
    ->RangeMultiplier(2)
    ->Range(256, 2048)
    ->Complexity()
    ->Unit(benchmark::kMillisecond);

void bm_twonn_id(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto set = sample_cube(n, 5, 8, 17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(twonn_id(set));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_twonn_id)->RangeMultiplier(2)->Range(1024, 8192)->Complexity()->Unit(benchmark::kMillisecond);

void bm_mle_id(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto set = sample_cube(n, 5, 8, 19);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mle_id(set, 50));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_mle_id)->RangeMultiplier(2)->Range(1024, 8192)->Complexity()->Unit(benchmark::kMillisecond);

void bm_neighbor_joining(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  Xoshiro256StarStar rng(23);
  DistanceMatrix d;
  d.m = m;
  d.values.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    d.labels.push_back("L" + std::to_string(i));
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = 0.5 + rng.uniform01();
      d.at(i, j) = v;
      d.at(j, i) = v;
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(neighbor_joining(d));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_neighbor_joining)->RangeMultiplier(2)->Range(8, 128)->Complexity();

// Whole-table cost for six models; prepare-once reuse keeps this close to
// 6x prepare + 15x pair rather than 15x full cknna.
void bm_pairwise_matrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<std::size_t> dims(6, 48);
  const std::vector<double> noise(6, 0.2);
  const auto sets = shared_latent_family(n, 8, dims, noise, Warp::linear, 29);
  MetricParams params;
  params.k = 25;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pairwise_matrix(sets, MetricKind::cknna, params));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_pairwise_matrix)
    ->RangeMultiplier(2)
    ->Range(512, 2048)
    ->Complexity()
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
