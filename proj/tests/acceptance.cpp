// Acceptance gate: one line per criterion, exit code = number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "repalign/aggregation.hpp"
#include "repalign/embedding.hpp"
#include "repalign/energy.hpp"
#include "repalign/global_metrics.hpp"
#include "repalign/intrinsic_dim.hpp"
#include "repalign/kernel.hpp"
#include "repalign/phylo.hpp"
#include "repalign/rng.hpp"
#include "repalign/synth.hpp"

#ifndef REPALIGN_CLI_PATH
#error "REPALIGN_CLI_PATH must point at the repalign binary"
#endif

namespace {

using namespace repalign;
using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point start) {
  return std::chrono::duration<double>(steady::now() - start).count();
}

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(3);
  out << v;
  return out.str();
}

EmbeddingSet gaussian(const std::string& name, std::size_t n, std::size_t d, std::uint64_t seed) {
  Xoshiro256StarStar rng(seed);
  std::vector<double> values(n * d);
  for (auto& v : values) v = rng.normal();
  return make_embedding_set(name, n, d, std::move(values));
}

// --------------------------------------------------------------- criterion 1

Result oracle_equivalence() {
  const auto start = steady::now();
  constexpr double kTol = 1e-10;
  const std::size_t sizes[3] = {16, 64, 128};
  double worst_cknna = 0, worst_cka = 0, worst_hsic = 0, worst_dcor = 0;
  bool ranks_ok = true;
  for (std::size_t i = 0; i < 50; ++i) {
    SharedLatentSpec spec;
    spec.n = sizes[i % 3];
    spec.d_latent = 4;
    spec.d1 = 8;
    spec.d2 = 12;
    spec.noise_sigma = 0.1;
    spec.warp = (i % 2 == 0) ? Warp::linear : Warp::tanh_mixed;
    spec.seed = 1000 + i;
    auto [f_raw, g_raw] = shared_latent_pair(spec);
    const EmbeddingSet f = normalize_rows(std::move(f_raw)).set;
    const EmbeddingSet g = normalize_rows(std::move(g_raw)).set;
    const std::size_t k = 1 + i % std::min<std::size_t>(25, spec.n - 1);
    CknnaOptions opts;
    opts.centering = (i % 4 < 2) ? Centering::scalar : Centering::doubly;
    worst_cknna = std::max(worst_cknna, std::fabs(cknna(f, g, k, opts) - oracle_cknna(f, g, k, opts)));
    worst_cka = std::max(worst_cka,
                         std::fabs(cka(f, g, opts.centering) - oracle_cka(f, g, opts.centering)));
    const auto kc = center_kernel(inner_product_kernel(f), opts.centering);
    const auto lc = center_kernel(inner_product_kernel(g), opts.centering);
    worst_hsic = std::max(worst_hsic, std::fabs(hsic(kc, lc) - oracle_hsic(kc, lc)));
    worst_dcor = std::max(worst_dcor, std::fabs(dcor(f, g) - oracle_dcor(f, g)));
    const EmbeddingSet& r = (i % 2 == 0) ? f : g;
    const auto table = rank_table(r);
    const auto expected = oracle_ranks(r);
    for (std::size_t a = 0; a < r.n_items && ranks_ok; ++a) {
      for (std::size_t b = 0; b + 1 < r.n_items; ++b) {
        if (table.row_order(a)[b] != expected[a][b]) {
          ranks_ok = false;
          break;
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  Result res;
  res.pass = worst_cknna <= kTol && worst_cka <= kTol && worst_hsic <= kTol && worst_dcor <= kTol &&
             ranks_ok && elapsed < 60.0;
  res.detail = "max|dev| cknna " + fmt(worst_cknna) + ", cka " + fmt(worst_cka) + ", hsic " +
               fmt(worst_hsic) + ", dcor " + fmt(worst_dcor) + ", ranks " +
               (ranks_ok ? "exact" : "MISMATCH") + " (" + fmt(elapsed) + "s < 60s)";
  return res;
}

// --------------------------------------------------------------- criterion 2

Result self_alignment() {
  constexpr double kTol = 1e-10;
  const std::size_t dims[8] = {2, 4, 8, 32, 64, 128, 256, 512};
  double worst = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto set = normalize_rows(gaussian("self", 300, dims[i % 8], 1100 + i)).set;
    worst = std::max(worst, std::fabs(cknna(set, set, 25) - 1.0));
    worst = std::max(worst, std::fabs(dcor(set, set) - 1.0));
  }
  Result res;
  res.pass = worst <= kTol;
  res.detail = "max|self - 1| " + fmt(worst) + " over d in [2, 512]";
  return res;
}

// --------------------------------------------------------------- criterion 3

Result null_calibration() {
  double worst_cknna = 0, worst_dcor = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto f = normalize_rows(gaussian("null-f", 1000, 32, 1200 + 2 * i)).set;
    const auto g = normalize_rows(gaussian("null-g", 1000, 32, 1201 + 2 * i)).set;
    worst_cknna = std::max(worst_cknna, std::fabs(cknna(f, g, 25)));
    worst_dcor = std::max(worst_dcor, dcor(f, g));
  }
  Result res;
  res.pass = worst_cknna < 0.1 && worst_dcor < 0.15;
  res.detail = "max|cknna| " + fmt(worst_cknna) + " < 0.1, max dcor " + fmt(worst_dcor) + " < 0.15";
  return res;
}

// --------------------------------------------------------------- criterion 4

Result k_monotonicity() {
  const auto start = steady::now();
  const std::size_t ks[4] = {2, 25, 50, 100};
  double mean[4] = {0, 0, 0, 0};
  for (std::size_t s = 0; s < 10; ++s) {
    SharedLatentSpec spec;
    spec.n = 2000;
    spec.d_latent = 8;
    spec.d1 = 32;
    spec.d2 = 32;
    spec.noise_sigma = 0.1;
    spec.warp = Warp::linear;
    spec.seed = 2000 + s;
    auto [f_raw, g_raw] = shared_latent_pair(spec);
    const EmbeddingSet f = normalize_rows(std::move(f_raw)).set;
    const EmbeddingSet g = normalize_rows(std::move(g_raw)).set;
    for (std::size_t j = 0; j < 4; ++j) mean[j] += cknna(f, g, ks[j]) / 10.0;
  }
  bool ok = true;
  for (std::size_t j = 0; j + 1 < 4; ++j) ok = ok && mean[j + 1] >= mean[j] - 0.02;
  const double elapsed = seconds_since(start);
  Result res;
  res.pass = ok && elapsed < 300.0;
  res.detail = "mean cknna k{2,25,50,100} = {" + fmt(mean[0]) + ", " + fmt(mean[1]) + ", " +
               fmt(mean[2]) + ", " + fmt(mean[3]) + "} (" + fmt(elapsed) + "s < 300s)";
  return res;
}

// --------------------------------------------------------------- criterion 5
//
// Known limit: the pooled k=50 MLE on a uniform 10-cube at n = 10,000 sits
// ~17% low — the 50-neighbor radius is ~0.54 of the cube edge, so boundary
// truncation compresses the log-distance ratios. That bias is a property of
// the estimator at this sample size, not of the implementation (the same code
// matches the reference bands on the line, disk, and 5-cube, and both
// estimators agree within 10%). The line below reports the honest number and
// is expected to fail the ±15% bound on that one manifold.

Result id_recovery() {
  const auto start = steady::now();
  struct Manifold {
    const char* name;
    double true_d;
    EmbeddingSet (*make)(std::size_t, std::uint64_t);
  };
  const Manifold manifolds[4] = {
      {"line", 1.0, [](std::size_t n, std::uint64_t s) { return sample_segment(n, 4, s); }},
      {"disk", 2.0, [](std::size_t n, std::uint64_t s) { return sample_disk(n, 5, s); }},
      {"cube5", 5.0, [](std::size_t n, std::uint64_t s) { return sample_cube(n, 5, 8, s); }},
      {"cube10", 10.0, [](std::size_t n, std::uint64_t s) { return sample_cube(n, 10, 12, s); }},
  };
  double worst_twonn = 0, worst_mle = 0, worst_gap = 0;
  const char* worst_twonn_on = "";
  const char* worst_mle_on = "";
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t s = 0; s < 10; ++s) {
      const auto set = manifolds[m].make(10000, 3000 + m * 10 + s);
      const double tw = twonn_id(set).value;
      const double ml = mle_id(set, 50).value;
      const double tw_err = std::fabs(tw - manifolds[m].true_d) / manifolds[m].true_d;
      const double ml_err = std::fabs(ml - manifolds[m].true_d) / manifolds[m].true_d;
      if (tw_err > worst_twonn) {
        worst_twonn = tw_err;
        worst_twonn_on = manifolds[m].name;
      }
      if (ml_err > worst_mle) {
        worst_mle = ml_err;
        worst_mle_on = manifolds[m].name;
      }
      worst_gap = std::max(worst_gap, std::fabs(tw - ml) / std::max(tw, ml));
    }
  }
  const double elapsed = seconds_since(start);
  Result res;
  res.pass = worst_twonn <= 0.15 && worst_mle <= 0.15 && worst_gap <= 0.20 && elapsed < 180.0;
  res.detail = "worst rel err twonn " + fmt(worst_twonn) + " (" + worst_twonn_on + "), mle " +
               fmt(worst_mle) + " (" + std::string(worst_mle_on) + "), estimator gap " +
               fmt(worst_gap) + " (" + fmt(elapsed) + "s < 180s)";
  return res;
}

// --------------------------------------------------------------- criterion 6

Result imbalance_asymmetry() {
  constexpr std::size_t kN = 2000;
  std::size_t asym_hits = 0;
  bool self_exact = true;
  double indep_lo = 10.0, indep_hi = 0.0;
  for (std::size_t s = 0; s < 10; ++s) {
    Xoshiro256StarStar rng(1300 + s);
    std::vector<double> z(kN * 4), w(kN * 4), joint(kN * 8);
    for (auto& v : z) v = rng.normal();
    for (auto& v : w) v = rng.normal();
    for (std::size_t i = 0; i < kN; ++i) {
      for (std::size_t c = 0; c < 4; ++c) {
        joint[i * 8 + c] = z[i * 4 + c];
        joint[i * 8 + 4 + c] = w[i * 4 + c];
      }
    }
    const auto f = make_embedding_set("joint", kN, 8, std::move(joint));
    const auto g = make_embedding_set("part", kN, 4, std::move(z));
    const auto pair = information_imbalance(f, g, 1);
    if (pair.forward < pair.backward) ++asym_hits;
    if (information_imbalance(f, f, 1).forward != 2.0 / static_cast<double>(kN)) self_exact = false;

    const auto x = gaussian("x", kN, 8, 1400 + 2 * s);
    const auto y = gaussian("y", kN, 8, 1401 + 2 * s);
    const auto indep = information_imbalance(x, y, 1);
    indep_lo = std::min({indep_lo, indep.forward, indep.backward});
    indep_hi = std::max({indep_hi, indep.forward, indep.backward});
  }
  Result res;
  res.pass = asym_hits >= 9 && self_exact && indep_lo >= 0.9 && indep_hi <= 1.1;
  res.detail = "forward<backward in " + std::to_string(asym_hits) + "/10, self " +
               (self_exact ? "exactly 2/N" : "NOT exact") + ", independent range [" + fmt(indep_lo) +
               ", " + fmt(indep_hi) + "]";
  return res;
}

// --------------------------------------------------------------- criterion 7

struct RandomTree {
  std::size_t node_count = 0;
  std::vector<PhyloTree::Edge> edges;
};

// Unrooted binary tree whose every edge length is drawn from U[0.1, 2].
RandomTree random_additive_tree(std::size_t n_leaves, std::uint64_t seed) {
  Xoshiro256StarStar rng(seed);
  const auto rand_len = [&] { return 0.1 + 1.9 * rng.uniform01(); };
  RandomTree t;
  std::vector<std::size_t> active(n_leaves);
  for (std::size_t i = 0; i < n_leaves; ++i) active[i] = i;
  std::size_t next = n_leaves;
  while (active.size() > 3) {
    const std::size_t a = rng.below(active.size());
    std::size_t b = rng.below(active.size() - 1);
    if (b >= a) ++b;
    const std::size_t parent = next++;
    t.edges.push_back({active[a], parent, rand_len()});
    t.edges.push_back({active[b], parent, rand_len()});
    if (a > b) std::swap(active[a], active[b]);  // erase the higher slot first
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(std::max(a, b)));
    active[std::min(a, b)] = parent;
  }
  const std::size_t center = next++;
  for (const std::size_t node : active) t.edges.push_back({node, center, rand_len()});
  t.node_count = next;
  return t;
}

std::vector<double> tree_leaf_distances(const RandomTree& t, std::size_t n_leaves) {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(t.node_count);
  for (const auto& e : t.edges) {
    adj[e.a].push_back({e.b, e.length});
    adj[e.b].push_back({e.a, e.length});
  }
  std::vector<double> out(n_leaves * n_leaves, 0.0);
  for (std::size_t s = 0; s < n_leaves; ++s) {
    std::vector<double> dist(t.node_count, -1.0);
    std::vector<std::size_t> stack{s};
    dist[s] = 0.0;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const auto& [v, len] : adj[u]) {
        if (dist[v] < 0.0) {
          dist[v] = dist[u] + len;
          stack.push_back(v);
        }
      }
    }
    for (std::size_t e = 0; e < n_leaves; ++e) out[s * n_leaves + e] = dist[e];
  }
  return out;
}

Result nj_exactness() {
  double worst = 0;
  bool round_trips = true;
  for (std::size_t i = 0; i < 25; ++i) {
    const std::size_t leaves = 4 + i % 9;
    const auto truth = random_additive_tree(leaves, 4000 + i);
    DistanceMatrix d;
    d.m = leaves;
    for (std::size_t l = 0; l < leaves; ++l) d.labels.push_back("L" + std::to_string(l));
    d.values = tree_leaf_distances(truth, leaves);
    const auto tree = neighbor_joining(d);
    const auto back = leaf_distance_matrix(tree);
    for (std::size_t c = 0; c < back.size(); ++c) {
      worst = std::max(worst, std::fabs(back[c] - d.values[c]));
    }
    const auto text = to_newick(tree, 12);
    if (to_newick(parse_newick(text), 12) != text) round_trips = false;
  }
  Result res;
  res.pass = worst <= 1e-9 && round_trips;
  res.detail = "max branch-distance error " + fmt(worst) + " <= 1e-9, newick round-trips " +
               (round_trips ? "ok" : "BROKEN") + " over 25 trees, 4-12 leaves";
  return res;
}

// --------------------------------------------------------------- criterion 8

Result jsd_correctness() {
  const std::vector<double> half{0.5, 0.5};
  const std::vector<double> hot{1.0, 0.0};
  const std::vector<double> other{0.0, 1.0};
  const double expected = 0.5 * (0.5 * std::log2(0.5 / 0.75) + 0.5 * std::log2(0.5 / 0.25)) +
                          0.5 * std::log2(1.0 / 0.75);
  const bool identities = jsd(half, half) == 0.0 && jsd(hot, other) == 1.0;
  const double hand_dev = std::fabs(jsd(half, hot) - expected);

  Xoshiro256StarStar rng(5000);
  const auto random_dist = [&] {
    std::vector<double> v(5);
    double total = 0.0;
    for (auto& x : v) {
      x = rng.uniform01() + 1e-9;
      total += x;
    }
    for (auto& x : v) x /= total;
    return v;
  };
  bool triangle = true;
  for (std::size_t i = 0; i < 10000 && triangle; ++i) {
    const auto p = random_dist(), q = random_dist(), r = random_dist();
    if (std::sqrt(jsd(p, q)) > std::sqrt(jsd(p, r)) + std::sqrt(jsd(r, q)) + 1e-12) triangle = false;
  }
  Result res;
  res.pass = identities && hand_dev <= 1e-12 && triangle;
  res.detail = std::string("identities ") + (identities ? "exact" : "BROKEN") + ", hand-value dev " +
               fmt(hand_dev) + ", sqrt-jsd triangle on 10000 triples " + (triangle ? "holds" : "FAILS");
  return res;
}

// --------------------------------------------------------------- criterion 9

Result energy_invariance() {
  constexpr std::size_t kN = 200;
  Xoshiro256StarStar rng(6000);
  EnergyTable table;
  table.element_order = {"al", "mg", "si"};
  table.model_names = {"shifted", "bumped"};
  std::vector<std::vector<double>> counts;
  for (std::size_t i = 0; i < kN; ++i) {
    const double a = static_cast<double>(rng.below(9));
    const double b = static_cast<double>(rng.below(9));
    const double c = static_cast<double>(1 + rng.below(8));
    counts.push_back({a, b, c});
    Composition comp;
    comp.entries = {{"al", a}, {"mg", b}, {"si", c}};
    table.compositions.push_back(comp);
    table.ids.push_back("s" + std::to_string(i));
    table.e_true.push_back(1.2 * a - 3.4 * b + 0.7 * c + 5.0 + 2.0 * rng.normal());
  }
  std::vector<double> shifted(kN);
  for (std::size_t i = 0; i < kN; ++i) {
    shifted[i] = table.e_true[i] + 1.7 * counts[i][0] - 0.3 * counts[i][1] + 2.2 * counts[i][2] + 4.5;
  }
  std::vector<double> s(kN);
  for (auto& v : s) v = rng.normal();
  const auto fit_s = fit_linear_compositional(table.compositions, s, table.element_order);
  const auto dev_s = deviations(s, fit_s, table.compositions);
  std::vector<double> bumped(kN);
  double mean_abs = 0.0;
  for (std::size_t i = 0; i < kN; ++i) {
    bumped[i] = table.e_true[i] + dev_s[i];
    mean_abs += std::fabs(dev_s[i]);
  }
  mean_abs /= static_cast<double>(kN);
  table.model_energies = {shifted, bumped};
  const double shift_mae = energy_regression_mae(table, "shifted");
  const double ortho_dev = std::fabs(energy_regression_mae(table, "bumped") - mean_abs);
  Result res;
  res.pass = shift_mae <= 1e-8 && ortho_dev <= 1e-8;
  res.detail = "shift mae " + fmt(shift_mae) + " <= 1e-8, |mae - mean|s|| " + fmt(ortho_dev) +
               " <= 1e-8";
  return res;
}

// -------------------------------------------------------------- criterion 10

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + REPALIGN_CLI_PATH + "\" " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

Result pipeline_determinism() {
  const auto start = steady::now();
  const auto root = std::filesystem::temp_directory_path() /
                    ("repalign-acceptance-" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  const unsigned thread_counts[5] = {1, 1, 1, 4, 8};
  const char* files[] = {"view-0.emb", "view-4.emb", "baseline-0.emb", "manifest.json",
                         "groups.csv",  "matrix.csv", "condensed.csv",  "tree.nwk"};
  bool all_zero = true, identical = true;
  for (std::size_t r = 0; r < 5; ++r) {
    const auto dir = root / ("run-" + std::to_string(r));
    std::filesystem::create_directories(dir);
    const std::string t = " --threads " + std::to_string(thread_counts[r]);
    const std::string d = dir.string();
    if (run_cli("synth --models 5 --baselines 1 --n 2000 --dim 64 --seed 77 --out-dir \"" + d + "\"" + t) != 0)
      all_zero = false;
    if (run_cli("pairwise --manifest \"" + d + "/manifest.json\" --metric cknna --k 25 --out \"" + d +
                "/matrix.csv\"" + t) != 0)
      all_zero = false;
    if (run_cli("condense --matrix \"" + d + "/matrix.csv\" --groups \"" + d + "/groups.csv\" --out \"" +
                d + "/condensed.csv\"" + t) != 0)
      all_zero = false;
    if (run_cli("tree --matrix \"" + d + "/matrix.csv\" --out \"" + d + "/tree.nwk\"" + t) != 0)
      all_zero = false;
  }
  for (const char* name : files) {
    const std::string reference = slurp(root / "run-0" / name);
    if (reference.empty()) identical = false;
    for (std::size_t r = 1; r < 5; ++r) {
      if (slurp(root / ("run-" + std::to_string(r)) / name) != reference) identical = false;
    }
  }
  std::filesystem::remove_all(root);
  const double elapsed = seconds_since(start);
  Result res;
  res.pass = all_zero && identical && elapsed < 120.0;
  res.detail = std::string("5 runs (threads 1,1,1,4,8) ") +
               (all_zero ? "exited 0" : "FAILED to run") + ", outputs " +
               (identical ? "byte-identical" : "DIFFER") + " (" + fmt(elapsed) + "s < 120s)";
  return res;
}

// -------------------------------------------------------------- criterion 11

std::size_t vm_hwm_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) return std::stoul(line.substr(6));
  }
  return 0;
}

Result scale_run() {
  const auto start = steady::now();
  std::vector<std::size_t> dims(10, 256);
  std::vector<double> noise(10);
  for (std::size_t v = 0; v < 10; ++v) noise[v] = 0.05 * static_cast<double>(v);
  const auto sets = shared_latent_family(20000, 16, dims, noise, Warp::linear, 99);
  MetricParams params;
  params.k = 25;
  const auto matrix = pairwise_matrix(sets, MetricKind::cknna, params);
  bool cells_ok = matrix.missing.empty();
  for (std::size_t i = 0; i < matrix.m && cells_ok; ++i) {
    for (std::size_t j = 0; j < matrix.m; ++j) {
      if (!std::isfinite(matrix.at(i, j))) cells_ok = false;
    }
    if (std::fabs(matrix.at(i, i) - 1.0) > 1e-10) cells_ok = false;
  }
  const double hwm_gb = static_cast<double>(vm_hwm_kb()) / (1024.0 * 1024.0);
  const double elapsed = seconds_since(start);
  Result res;
  res.pass = cells_ok && hwm_gb > 0.0 && hwm_gb <= 2.5;
  res.detail = "10 models, n=20000, d=256, k=25: matrix " +
               std::string(cells_ok ? "complete" : "INCOMPLETE") + ", peak rss " + fmt(hwm_gb) +
               " GB <= 2.5 GB (" + fmt(elapsed) + "s)";
  return res;
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    Result (*run)();
  };
  const Criterion criteria[] = {
      {"oracle equivalence", oracle_equivalence},
      {"self-alignment", self_alignment},
      {"null calibration", null_calibration},
      {"cknna k-monotonicity", k_monotonicity},
      {"intrinsic-dimension recovery", id_recovery},
      {"information-imbalance asymmetry", imbalance_asymmetry},
      {"neighbor-joining exactness", nj_exactness},
      {"jsd correctness", jsd_correctness},
      {"energy-mae invariance", energy_invariance},
      {"pipeline determinism", pipeline_determinism},
      {"scale within memory policy", scale_run},
  };
  int failures = 0;
  int index = 0;
  for (const auto& criterion : criteria) {
    ++index;
    Result res;
    try {
      res = criterion.run();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail = std::string("exception: ") + e.what();
    }
    if (!res.pass) ++failures;
    std::cout << (res.pass ? "[PASS] " : "[FAIL] ") << index << ". " << criterion.label << ": "
              << res.detail << "\n"
              << std::flush;
  }
  std::cout << (failures == 0 ? "acceptance: all criteria passed"
                              : "acceptance: " + std::to_string(failures) + " criteria failed")
            << "\n";
  return failures;
}
