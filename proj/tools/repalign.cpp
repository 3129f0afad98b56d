// Command-line front end: quantifies representational alignment between
// embedding sets and derives model-relationship summaries (matrices, trees,
// dimension estimates, energy baselines).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "repalign/aggregation.hpp"
#include "repalign/embedding.hpp"
#include "repalign/energy.hpp"
#include "repalign/errors.hpp"
#include "repalign/global_metrics.hpp"
#include "repalign/intrinsic_dim.hpp"
#include "repalign/kernel.hpp"
#include "repalign/manifest.hpp"
#include "repalign/parallel.hpp"
#include "repalign/phylo.hpp"
#include "repalign/synth.hpp"
#include "repalign/text_format.hpp"
#include "repalign/version.hpp"

namespace {

using namespace repalign;

constexpr std::size_t kDefaultSubsample = 50000;
constexpr std::size_t kDefaultQuadraticCap = 20000;

std::string provenance_line(const std::string& command, const nlohmann::json& params) {
  return "# repalign " + std::string(version()) + " " + command + " " + params.dump();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw data_error("write failed for '" + path.string() + "'");
}

EmbeddingFormat resolve_format(const std::string& format, const std::filesystem::path& path) {
  if (format == "auto") return embedding_format_for_path(path);
  return parse_embedding_format(format);
}

struct InputOptions {
  std::string manifest;
  std::vector<std::string> paths;
  std::string format = "auto";
  bool raw = false;
  std::size_t subsample = kDefaultSubsample;
  std::uint64_t seed = 0;
};

void add_input_options(CLI::App* cmd, InputOptions& in, bool with_normalize_policy = true) {
  cmd->add_option("--manifest", in.manifest, "JSON manifest listing model embedding files")
      ->check(CLI::ExistingFile);
  cmd->add_option("inputs", in.paths, "embedding files (CSV or EMB)")->check(CLI::ExistingFile);
  cmd->add_option("--format", in.format, "input format: auto, csv, or emb")
      ->check(CLI::IsMember({"auto", "csv", "emb"}));
  cmd->add_option("--subsample", in.subsample,
                  "item cap; larger inputs are row-subsampled with --seed (default 50000)");
  cmd->add_option("--seed", in.seed, "seed for any subsampling (default 0)");
  if (with_normalize_policy) {
    cmd->add_flag("--raw", in.raw, "skip the per-row max-abs normalization stage");
  }
}

std::vector<EmbeddingSet> load_inputs(const InputOptions& in, std::size_t min_models,
                                      std::size_t extra_cap, nlohmann::json& applied) {
  std::vector<EmbeddingSet> sets;
  if (!in.manifest.empty() && !in.paths.empty()) {
    throw std::invalid_argument("give either --manifest or positional inputs, not both");
  }
  if (!in.manifest.empty()) {
    for (const auto& entry : load_manifest(in.manifest)) {
      EmbeddingSet set = load_embeddings(entry.path, resolve_format(in.format, entry.path));
      set.model_name = entry.name;
      set.baseline = entry.baseline;
      sets.push_back(std::move(set));
    }
  } else {
    for (const auto& p : in.paths) {
      sets.push_back(load_embeddings(p, resolve_format(in.format, p)));
    }
  }
  if (sets.size() < min_models) {
    throw std::invalid_argument("need at least " + std::to_string(min_models) + " embedding inputs");
  }
  const std::size_t cap = std::min(in.subsample, extra_cap);
  bool subsampled = false;
  for (auto& set : sets) {
    if (set.n_items > cap) {
      set = subsample(set, cap, in.seed);
      subsampled = true;
    }
  }
  if (subsampled) {
    std::cerr << "repalign: note: inputs subsampled to " << cap << " items (seed " << in.seed << ")\n";
  }
  std::size_t zero_rows = 0;
  if (!in.raw) {
    for (auto& set : sets) {
      auto normalized = normalize_rows(std::move(set));
      zero_rows += normalized.zero_rows;
      set = std::move(normalized.set);
    }
    if (zero_rows > 0) {
      std::cerr << "repalign: warning: " << zero_rows << " all-zero rows passed through normalization\n";
    }
  }
  applied["subsample"] = cap;
  applied["seed"] = in.seed;
  applied["normalize"] = !in.raw;
  return sets;
}

std::string out_format_for(const std::string& requested, const std::filesystem::path& path) {
  if (requested != "auto") return requested;
  return path.extension() == ".json" ? "json" : "csv";
}

// ---------------------------------------------------------------- pairwise

struct PairwiseConfig {
  InputOptions in;
  std::string metric = "cknna";
  std::size_t k = 25;
  std::string centering = "scalar";
  std::string neighbor = "inner-product";
  std::string rank_distance = "euclidean";
  bool sqrt_dcor = false;
  bool shared_mask = false;
  std::size_t quadratic_cap = kDefaultQuadraticCap;
  bool no_quadratic_cap = false;
  std::string out;
  std::string out_format = "auto";
};

int run_pairwise(const PairwiseConfig& cfg) {
  const MetricKind kind = parse_metric_kind(cfg.metric);
  MetricParams params;
  params.k = cfg.k;
  params.centering = parse_centering(cfg.centering);
  params.neighbor = parse_neighbor_metric(cfg.neighbor);
  params.rank_distance = parse_rank_distance(cfg.rank_distance);
  params.sqrt_dcor = cfg.sqrt_dcor;
  params.shared_denominator_mask = cfg.shared_mask;
  // dcor and the imbalance scan cost O(N^2) per pair with no streaming
  // shortcut, so they get a tighter default item cap.
  std::size_t extra_cap = SIZE_MAX;
  if (!cfg.no_quadratic_cap && (kind == MetricKind::dcor || kind == MetricKind::ii_forward)) {
    extra_cap = cfg.quadratic_cap;
  }
  nlohmann::json applied;
  const auto sets = load_inputs(cfg.in, 2, extra_cap, applied);
  AlignmentMatrix matrix = pairwise_matrix(sets, kind, params);
  for (const auto& [key, value] : applied.items()) {
    matrix.params["input-" + key] = value.is_boolean() ? (value.get<bool>() ? "true" : "false")
                                                       : value.dump();
  }
  save_matrix(matrix, cfg.out, out_format_for(cfg.out_format, cfg.out));
  for (const auto& cell : matrix.missing) {
    std::cerr << "repalign: warning: cell (" << matrix.model_names[cell.i] << ", "
              << matrix.model_names[cell.j] << ") missing: " << cell.reason << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- condense

struct CondenseConfig {
  std::string matrix;
  std::string groups;
  std::string out;
  std::string out_format = "auto";
};

int run_condense(const CondenseConfig& cfg) {
  const AlignmentMatrix matrix = load_matrix(cfg.matrix);
  const GroupSpec groups = load_group_spec(cfg.groups);
  const AlignmentMatrix condensed = condense(matrix, groups);
  save_matrix(condensed, cfg.out, out_format_for(cfg.out_format, cfg.out));
  return 0;
}

// ---------------------------------------------------------------- tree

struct TreeConfig {
  std::string matrix;
  double alpha = 0.5;
  double epsilon = 1e-12;
  int precision = 6;
  std::string out;
};

int run_tree(const TreeConfig& cfg) {
  const AlignmentMatrix matrix = load_matrix(cfg.matrix);
  const DistanceMatrix dist = model_distance_matrix(matrix, cfg.alpha, cfg.epsilon);
  const PhyloTree tree = neighbor_joining(dist);
  const std::string newick = to_newick(tree, cfg.precision);
  nlohmann::json params;
  params["alpha"] = cfg.alpha;
  params["epsilon"] = cfg.epsilon;
  params["precision"] = cfg.precision;
  params["matrix"] = std::filesystem::path(cfg.matrix).filename().string();
  std::string text = "[repalign " + std::string(version()) + " tree " + params.dump() + "]\n";
  text += newick;
  text += "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.out, text);
  }
  return 0;
}

// ---------------------------------------------------------------- id

struct IdConfig {
  std::string input;
  std::string format = "auto";
  std::string method = "both";
  std::size_t k = 50;
  double discard = 0.1;
  std::size_t subsample = kDefaultSubsample;
  std::uint64_t seed = 0;
  bool normalize = false;
  std::string out;
};

nlohmann::json estimate_to_json(const IdEstimate& est) {
  nlohmann::json j;
  j["method"] = to_string(est.method);
  j["value"] = est.value;
  j["fit_r2"] = est.fit_r2;
  j["n_used"] = est.n_used;
  j["duplicates_removed"] = est.duplicates_removed;
  if (est.method == IdMethod::twonn) {
    j["discard"] = est.k_or_discard;
  } else {
    j["k"] = static_cast<std::size_t>(est.k_or_discard);
  }
  return j;
}

int run_id(const IdConfig& cfg) {
  EmbeddingSet set = load_embeddings(cfg.input, resolve_format(cfg.format, cfg.input));
  if (set.n_items > cfg.subsample) {
    set = subsample(set, cfg.subsample, cfg.seed);
    std::cerr << "repalign: note: input subsampled to " << cfg.subsample << " items (seed " << cfg.seed
              << ")\n";
  }
  if (cfg.normalize) set = normalize_rows(std::move(set)).set;
  nlohmann::json doc;
  doc["command"] = "id";
  doc["version"] = version();
  doc["model"] = set.model_name;
  doc["params"] = {{"method", cfg.method},     {"k", cfg.k},       {"discard", cfg.discard},
                   {"subsample", cfg.subsample}, {"seed", cfg.seed}, {"normalize", cfg.normalize}};
  nlohmann::json estimates = nlohmann::json::array();
  if (cfg.method == "twonn" || cfg.method == "both") {
    estimates.push_back(estimate_to_json(twonn_id(set, cfg.discard)));
  }
  if (cfg.method == "mle" || cfg.method == "both") {
    estimates.push_back(estimate_to_json(mle_id(set, cfg.k)));
  }
  doc["estimates"] = std::move(estimates);
  const std::string text = doc.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.out, text);
  }
  return 0;
}

// ---------------------------------------------------------------- imbalance

struct ImbalanceConfig {
  std::string input_f;
  std::string input_g;
  std::string format = "auto";
  std::vector<std::size_t> ks = {1};
  std::string rank_distance = "euclidean";
  std::size_t subsample = kDefaultQuadraticCap;
  std::uint64_t seed = 0;
  bool normalize = false;
  std::string out;
};

int run_imbalance(const ImbalanceConfig& cfg) {
  const RankDistance distance = parse_rank_distance(cfg.rank_distance);
  EmbeddingSet f = load_embeddings(cfg.input_f, resolve_format(cfg.format, cfg.input_f));
  EmbeddingSet g = load_embeddings(cfg.input_g, resolve_format(cfg.format, cfg.input_g));
  if (f.n_items > cfg.subsample || g.n_items > cfg.subsample) {
    f = subsample(f, std::min(f.n_items, cfg.subsample), cfg.seed);
    g = subsample(g, std::min(g.n_items, cfg.subsample), cfg.seed);
    std::cerr << "repalign: note: inputs subsampled to " << cfg.subsample << " items (seed " << cfg.seed
              << ")\n";
  }
  if (cfg.normalize) {
    f = normalize_rows(std::move(f)).set;
    g = normalize_rows(std::move(g)).set;
  }
  nlohmann::json params;
  params["k"] = cfg.ks;
  params["rank-distance"] = cfg.rank_distance;
  params["subsample"] = cfg.subsample;
  params["seed"] = cfg.seed;
  params["normalize"] = cfg.normalize;
  params["inputs"] = {f.model_name, g.model_name};
  std::string text = provenance_line("imbalance", params) + "\n";
  text += "k,forward,backward\n";
  for (const std::size_t k : cfg.ks) {
    const ImbalancePair pair = information_imbalance(f, g, k, distance);
    text += std::to_string(k) + "," + format_double(pair.forward) + "," + format_double(pair.backward) +
            "\n";
  }
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.out, text);
  }
  return 0;
}

// ---------------------------------------------------------------- convergence

struct ConvergenceConfig {
  std::string matrix;
  std::string performance;
  std::string reference;
  std::string out;
};

int run_convergence(const ConvergenceConfig& cfg) {
  const AlignmentMatrix matrix = load_matrix(cfg.matrix);
  const auto performance = load_performance(cfg.performance);
  const ConvergenceTable table = convergence_table(matrix, performance, cfg.reference);
  nlohmann::json params;
  params["reference"] = cfg.reference;
  params["matrix"] = std::filesystem::path(cfg.matrix).filename().string();
  if (table.spearman_vs_rank) {
    params["spearman"] = *table.spearman_vs_rank;
  } else {
    params["spearman"] = "missing";
  }
  std::string text = provenance_line("convergence", params) + "\n";
  text += "model,performance,size,alignment\n";
  for (const auto& row : table.rows) {
    text += row.model_name + "," + format_double(row.performance) + ",";
    if (row.size) text += format_double(*row.size);
    text += ",";
    if (!std::isnan(row.alignment)) text += format_double(row.alignment);
    text += "\n";
  }
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.out, text);
  }
  return 0;
}

// ---------------------------------------------------------------- energy-mae

struct EnergyConfig {
  std::string table;
  std::vector<std::string> models;
  std::size_t fit_n = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

int run_energy(const EnergyConfig& cfg) {
  EnergyTable table = load_energy_table(cfg.table);
  if (table.n() > cfg.fit_n) {
    const auto rows = subsample_indices(table.n(), cfg.fit_n, cfg.seed);
    table = table.subset(rows);
    std::cerr << "repalign: note: table subsampled to " << cfg.fit_n << " structures (seed " << cfg.seed
              << ")\n";
  }
  std::vector<std::string> models = cfg.models;
  if (models.empty()) models = table.model_names;
  nlohmann::json params;
  params["fit-n"] = cfg.fit_n;
  params["seed"] = cfg.seed;
  params["table"] = std::filesystem::path(cfg.table).filename().string();
  params["models"] = models;
  std::string text = provenance_line("energy-mae", params) + "\n";
  text += "model,mae,n\n";
  for (const auto& model : models) {
    const double mae = energy_regression_mae(table, model);
    text += model + "," + format_double(mae) + "," + std::to_string(table.n()) + "\n";
  }
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.out, text);
  }
  return 0;
}

// ---------------------------------------------------------------- synth

struct SynthConfig {
  std::size_t models = 5;
  std::size_t baselines = 1;
  std::size_t n = 2000;
  std::size_t d_latent = 8;
  std::size_t dim = 64;
  double noise = 0.05;
  double noise_step = 0.05;
  std::string warp = "linear";
  std::uint64_t seed = 0;
  std::string out_dir;
};

int run_synth(const SynthConfig& cfg) {
  if (cfg.models < 1) throw std::invalid_argument("need at least one latent view");
  const Warp warp = parse_warp(cfg.warp);
  std::vector<std::size_t> dims(cfg.models, cfg.dim);
  std::vector<double> noise(cfg.models);
  for (std::size_t v = 0; v < cfg.models; ++v) {
    noise[v] = cfg.noise + cfg.noise_step * static_cast<double>(v);
  }
  auto views = shared_latent_family(cfg.n, cfg.d_latent, dims, noise, warp, cfg.seed);
  const std::filesystem::path dir = cfg.out_dir;
  std::filesystem::create_directories(dir);
  std::vector<ManifestEntry> entries;
  std::string groups_csv = "model,group\n";
  for (std::size_t v = 0; v < views.size(); ++v) {
    const std::string filename = views[v].model_name + ".emb";
    save_embeddings(views[v], dir / filename, EmbeddingFormat::emb);
    entries.push_back({views[v].model_name, filename, false, "latent"});
    groups_csv += views[v].model_name + ",latent\n";
  }
  for (std::size_t b = 0; b < cfg.baselines; ++b) {
    EmbeddingSet baseline = random_baseline(cfg.n, cfg.dim, cfg.seed + 1 + b);
    baseline.model_name = "baseline-" + std::to_string(b);
    const std::string filename = baseline.model_name + ".emb";
    save_embeddings(baseline, dir / filename, EmbeddingFormat::emb);
    entries.push_back({baseline.model_name, filename, true, "baseline"});
    groups_csv += baseline.model_name + ",baseline\n";
  }
  std::map<std::string, std::string> provenance;
  provenance["command"] = "synth";
  provenance["version"] = version();
  provenance["models"] = std::to_string(cfg.models);
  provenance["baselines"] = std::to_string(cfg.baselines);
  provenance["n"] = std::to_string(cfg.n);
  provenance["d-latent"] = std::to_string(cfg.d_latent);
  provenance["dim"] = std::to_string(cfg.dim);
  provenance["noise"] = format_double(cfg.noise);
  provenance["noise-step"] = format_double(cfg.noise_step);
  provenance["warp"] = cfg.warp;
  provenance["seed"] = std::to_string(cfg.seed);
  save_manifest(entries, dir / "manifest.json", provenance);
  write_text(dir / "groups.csv", "# repalign " + std::string(version()) + " synth groups\n" + groups_csv);
  return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyConfig {
  std::size_t instances = 20;
  std::uint64_t seed = 7;
  double tolerance = 1e-10;
};

int run_verify(const VerifyConfig& cfg) {
  const std::size_t sizes[3] = {16, 64, 128};
  double worst_cknna = 0.0, worst_cka = 0.0, worst_dcor = 0.0, worst_ii = 0.0, worst_hsic = 0.0;
  bool ranks_ok = true;
  for (std::size_t inst = 0; inst < cfg.instances; ++inst) {
    const std::size_t n = sizes[inst % 3];
    SharedLatentSpec spec;
    spec.n = n;
    spec.d_latent = 4;
    spec.d1 = 8;
    spec.d2 = 12;
    spec.noise_sigma = 0.1;
    spec.warp = inst % 2 ? Warp::tanh_mixed : Warp::linear;
    spec.seed = cfg.seed + inst;
    auto [f_raw, g_raw] = shared_latent_pair(spec);
    const EmbeddingSet f = normalize_rows(std::move(f_raw)).set;
    const EmbeddingSet g = normalize_rows(std::move(g_raw)).set;
    const std::size_t k = std::min<std::size_t>(8, n - 1);

    CknnaOptions copts;
    copts.centering = inst % 4 < 2 ? Centering::scalar : Centering::doubly;
    worst_cknna = std::max(worst_cknna, std::fabs(cknna(f, g, k, copts) - oracle_cknna(f, g, k, copts)));
    worst_cka = std::max(worst_cka, std::fabs(cka(f, g, copts.centering) - oracle_cka(f, g, copts.centering)));
    worst_dcor = std::max(worst_dcor, std::fabs(dcor(f, g) - oracle_dcor(f, g)));
    const auto ii = information_imbalance(f, g, k);
    const auto oii = oracle_information_imbalance(f, g, k);
    worst_ii = std::max({worst_ii, std::fabs(ii.forward - oii.forward), std::fabs(ii.backward - oii.backward)});
    {
      const auto kc = center_kernel(inner_product_kernel(f), Centering::scalar);
      const auto lc = center_kernel(inner_product_kernel(g), Centering::scalar);
      worst_hsic = std::max(worst_hsic, std::fabs(hsic(kc, lc) - oracle_hsic(kc, lc)));
    }
    {
      const auto table = rank_table(f);
      const auto oracle = oracle_ranks(f);
      for (std::size_t i = 0; i < n && ranks_ok; ++i) {
        for (std::size_t p = 0; p < n - 1; ++p) {
          if (table.row_order(i)[p] != oracle[i][p]) {
            ranks_ok = false;
            break;
          }
        }
      }
    }
  }
  const struct {
    const char* name;
    double worst;
  } rows[] = {{"cknna", worst_cknna}, {"cka", worst_cka}, {"dcor", worst_dcor},
              {"imbalance", worst_ii}, {"hsic", worst_hsic}};
  bool all_ok = ranks_ok;
  std::cout << "repalign verify: " << cfg.instances << " instances, seed " << cfg.seed << ", tolerance "
            << format_double(cfg.tolerance) << "\n";
  for (const auto& row : rows) {
    const bool ok = row.worst <= cfg.tolerance;
    all_ok = all_ok && ok;
    std::cout << row.name << ": max deviation " << format_double(row.worst) << " "
              << (ok ? "PASS" : "FAIL") << "\n";
  }
  std::cout << "ranks: " << (ranks_ok ? "exact PASS" : "mismatch FAIL") << "\n";
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"representational alignment toolkit"};
  app.set_version_flag("--version", std::string("repalign ") + version());
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads,
                 "worker thread cap (0 = REPALIGN_THREADS env or hardware); results are identical "
                 "for every value");

  PairwiseConfig pairwise_cfg;
  auto* pairwise_cmd = app.add_subcommand("pairwise", "all-pairs alignment matrix over embedding sets");
  add_input_options(pairwise_cmd, pairwise_cfg.in);
  pairwise_cmd->add_option("--metric", pairwise_cfg.metric, "cknna, cka, dcor, or ii-forward")
      ->check(CLI::IsMember({"cknna", "cka", "dcor", "ii-forward"}));
  pairwise_cmd->add_option("--k", pairwise_cfg.k, "neighbor count (cknna, ii-forward; default 25)");
  pairwise_cmd->add_option("--centering", pairwise_cfg.centering, "kernel centering: scalar or double")
      ->check(CLI::IsMember({"scalar", "double"}));
  pairwise_cmd->add_option("--neighbor", pairwise_cfg.neighbor, "cknna neighbor similarity")
      ->check(CLI::IsMember({"inner-product", "euclidean"}));
  pairwise_cmd->add_option("--rank-distance", pairwise_cfg.rank_distance, "imbalance ranking distance")
      ->check(CLI::IsMember({"euclidean", "inner-product"}));
  pairwise_cmd->add_flag("--sqrt-dcor", pairwise_cfg.sqrt_dcor, "report sqrt of the dcor ratio");
  pairwise_cmd->add_flag("--shared-denominator-mask", pairwise_cfg.shared_mask,
                         "cknna denominators reuse the cross-space mask");
  pairwise_cmd->add_option("--quadratic-cap", pairwise_cfg.quadratic_cap,
                           "item cap for dcor/ii-forward (default 20000)");
  pairwise_cmd->add_flag("--no-quadratic-cap", pairwise_cfg.no_quadratic_cap,
                         "disable the dcor/ii-forward item cap");
  pairwise_cmd->add_option("--out", pairwise_cfg.out, "output matrix file")->required();
  pairwise_cmd->add_option("--output-format", pairwise_cfg.out_format, "csv, json, or auto")
      ->check(CLI::IsMember({"auto", "csv", "json"}));

  CondenseConfig condense_cfg;
  auto* condense_cmd = app.add_subcommand("condense", "average matrix cells into group blocks");
  condense_cmd->add_option("--matrix", condense_cfg.matrix, "alignment matrix file")
      ->required()
      ->check(CLI::ExistingFile);
  condense_cmd->add_option("--groups", condense_cfg.groups, "model,group CSV")
      ->required()
      ->check(CLI::ExistingFile);
  condense_cmd->add_option("--out", condense_cfg.out, "output matrix file")->required();
  condense_cmd->add_option("--output-format", condense_cfg.out_format, "csv, json, or auto")
      ->check(CLI::IsMember({"auto", "csv", "json"}));

  TreeConfig tree_cfg;
  auto* tree_cmd = app.add_subcommand("tree", "neighbor-joining tree from an alignment matrix");
  tree_cmd->add_option("--matrix", tree_cfg.matrix, "alignment matrix (full or condensed)")
      ->required()
      ->check(CLI::ExistingFile);
  tree_cmd->add_option("--alpha", tree_cfg.alpha, "row/column profile blend in [0, 1] (default 0.5)");
  tree_cmd->add_option("--epsilon", tree_cfg.epsilon, "profile smoothing (default 1e-12)");
  tree_cmd->add_option("--precision", tree_cfg.precision, "branch length digits (default 6)");
  tree_cmd->add_option("--out", tree_cfg.out, "output Newick file (default stdout)");

  IdConfig id_cfg;
  auto* id_cmd = app.add_subcommand("id", "intrinsic dimension of one embedding set");
  id_cmd->add_option("input", id_cfg.input, "embedding file")->required()->check(CLI::ExistingFile);
  id_cmd->add_option("--format", id_cfg.format, "auto, csv, or emb")
      ->check(CLI::IsMember({"auto", "csv", "emb"}));
  id_cmd->add_option("--method", id_cfg.method, "twonn, mle, or both")
      ->check(CLI::IsMember({"twonn", "mle", "both"}));
  id_cmd->add_option("--k", id_cfg.k, "MLE neighbor count (default 50)");
  id_cmd->add_option("--discard", id_cfg.discard, "TwoNN top-ratio discard fraction (default 0.1)");
  id_cmd->add_option("--subsample", id_cfg.subsample, "item cap (default 50000)");
  id_cmd->add_option("--seed", id_cfg.seed, "subsampling seed");
  id_cmd->add_flag("--normalize", id_cfg.normalize, "apply max-abs row normalization first");
  id_cmd->add_option("--out", id_cfg.out, "output JSON file (default stdout)");

  ImbalanceConfig imb_cfg;
  auto* imb_cmd = app.add_subcommand("imbalance", "rank-based information imbalance between two sets");
  imb_cmd->add_option("f", imb_cfg.input_f, "first embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  imb_cmd->add_option("g", imb_cfg.input_g, "second embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  imb_cmd->add_option("--format", imb_cfg.format, "auto, csv, or emb")
      ->check(CLI::IsMember({"auto", "csv", "emb"}));
  imb_cmd->add_option("--k", imb_cfg.ks, "neighbor counts to evaluate (default 1)");
  imb_cmd->add_option("--rank-distance", imb_cfg.rank_distance, "euclidean or inner-product");
  imb_cmd->add_option("--subsample", imb_cfg.subsample, "item cap (default 20000)");
  imb_cmd->add_option("--seed", imb_cfg.seed, "subsampling seed");
  imb_cmd->add_flag("--normalize", imb_cfg.normalize, "apply max-abs row normalization first");
  imb_cmd->add_option("--out", imb_cfg.out, "output CSV file (default stdout)");

  ConvergenceConfig conv_cfg;
  auto* conv_cmd = app.add_subcommand("convergence", "alignment-vs-performance table and rank correlation");
  conv_cmd->add_option("--matrix", conv_cfg.matrix, "alignment matrix file")
      ->required()
      ->check(CLI::ExistingFile);
  conv_cmd->add_option("--performance", conv_cfg.performance, "model,performance[,size] CSV")
      ->required()
      ->check(CLI::ExistingFile);
  conv_cmd->add_option("--reference", conv_cfg.reference, "reference model name")->required();
  conv_cmd->add_option("--out", conv_cfg.out, "output CSV file (default stdout)");

  EnergyConfig energy_cfg;
  auto* energy_cmd = app.add_subcommand("energy-mae", "compositional-baseline energy regression error");
  energy_cmd->add_option("--table", energy_cfg.table, "id,composition,e_true,<models...> CSV")
      ->required()
      ->check(CLI::ExistingFile);
  energy_cmd->add_option("--model", energy_cfg.models, "model column(s); default: all");
  energy_cmd->add_option("--fit-n", energy_cfg.fit_n, "structures used for fits (default 1000)");
  energy_cmd->add_option("--seed", energy_cfg.seed, "structure subsampling seed");
  energy_cmd->add_option("--out", energy_cfg.out, "output CSV file (default stdout)");

  SynthConfig synth_cfg;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic shared-latent model bundle");
  synth_cmd->add_option("--models", synth_cfg.models, "latent view count (default 5)");
  synth_cmd->add_option("--baselines", synth_cfg.baselines, "random baseline count (default 1)");
  synth_cmd->add_option("--n", synth_cfg.n, "items per model (default 2000)");
  synth_cmd->add_option("--d-latent", synth_cfg.d_latent, "latent dimension (default 8)");
  synth_cmd->add_option("--dim", synth_cfg.dim, "ambient dimension (default 64)");
  synth_cmd->add_option("--noise", synth_cfg.noise, "noise sigma for the first view (default 0.05)");
  synth_cmd->add_option("--noise-step", synth_cfg.noise_step, "per-view noise increment (default 0.05)");
  synth_cmd->add_option("--warp", synth_cfg.warp, "linear or tanh-mixed")
      ->check(CLI::IsMember({"linear", "tanh-mixed"}));
  synth_cmd->add_option("--seed", synth_cfg.seed, "generation seed");
  synth_cmd->add_option("--out-dir", synth_cfg.out_dir, "output directory")->required();

  VerifyConfig verify_cfg;
  auto* verify_cmd = app.add_subcommand("verify", "check streaming metrics against bundled oracles");
  verify_cmd->add_option("--instances", verify_cfg.instances, "random instances (default 20)");
  verify_cmd->add_option("--seed", verify_cfg.seed, "instance seed (default 7)");
  verify_cmd->add_option("--tolerance", verify_cfg.tolerance, "max allowed deviation (default 1e-10)");

  // Global flags (--threads) remain usable after the subcommand name.
  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
    set_thread_limit(threads);
    if (pairwise_cmd->parsed()) return run_pairwise(pairwise_cfg);
    if (condense_cmd->parsed()) return run_condense(condense_cfg);
    if (tree_cmd->parsed()) return run_tree(tree_cfg);
    if (id_cmd->parsed()) return run_id(id_cfg);
    if (imb_cmd->parsed()) return run_imbalance(imb_cfg);
    if (conv_cmd->parsed()) return run_convergence(conv_cfg);
    if (energy_cmd->parsed()) return run_energy(energy_cfg);
    if (synth_cmd->parsed()) return run_synth(synth_cfg);
    if (verify_cmd->parsed()) return run_verify(verify_cfg);
    throw std::invalid_argument("no subcommand selected");
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const data_error& e) {
    std::cerr << "repalign: error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "repalign: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "repalign: error: " << e.what() << "\n";
    return 1;
  }
}
