#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

#include "repalign/aggregation.hpp"
#include "repalign/manifest.hpp"
#include "repalign/phylo.hpp"
#include "test_util.hpp"

#ifndef REPALIGN_CLI_PATH
#error "REPALIGN_CLI_PATH must point at the repalign binary"
#endif
#ifndef REPALIGN_GOLDEN_DIR
#error "REPALIGN_GOLDEN_DIR must point at tests/golden"
#endif

using namespace repalign;
using test_util::TempDir;
using test_util::read_file;
using test_util::write_file;

namespace {

const std::filesystem::path kGolden = REPALIGN_GOLDEN_DIR;

int run_cli(const std::string& args, const std::filesystem::path& capture = {}) {
  std::string cmd = std::string("\"") + REPALIGN_CLI_PATH + "\" " + args;
  if (capture.empty()) {
    cmd += " >/dev/null 2>/dev/null";
  } else {
    cmd += " >\"" + capture.string() + "\" 2>&1";
  }
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string golden(const std::string& name) { return read_file(kGolden / "expected" / name); }

// Regenerates the pairwise matrix the downstream goldens were derived from.
void make_matrix(const TempDir& dir) {
  const int rc = run_cli("pairwise --manifest \"" + (kGolden / "manifest.json").string() +
                         "\" --metric cknna --k 3 --out \"" + dir.file("matrix.csv").string() + "\"");
  REQUIRE(rc == 0);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("pairwise reproduces the golden matrix byte for byte") {
  TempDir dir("cli-pairwise");
  make_matrix(dir);
  CHECK(read_file(dir.file("matrix.csv")) == golden("matrix.csv"));
  // A second run is byte-identical.
  const int rc = run_cli("pairwise --manifest \"" + (kGolden / "manifest.json").string() +
                         "\" --metric cknna --k 3 --out \"" + dir.file("again.csv").string() + "\"");
  REQUIRE(rc == 0);
  CHECK(read_file(dir.file("again.csv")) == golden("matrix.csv"));
}

TEST_CASE("pairwise json output loads back losslessly") {
  TempDir dir("cli-json");
  const int rc = run_cli("pairwise --manifest \"" + (kGolden / "manifest.json").string() +
                         "\" --metric cknna --k 3 --output-format json --out \"" +
                         dir.file("matrix.json").string() + "\"");
  REQUIRE(rc == 0);
  const auto from_json = load_matrix(dir.file("matrix.json"));
  const auto from_csv = load_matrix(kGolden / "expected" / "matrix.csv");
  REQUIRE(from_json.m == from_csv.m);
  CHECK(from_json.model_names == from_csv.model_names);
  CHECK(from_json.baselines == from_csv.baselines);
  CHECK(from_json.params == from_csv.params);
  for (std::size_t i = 0; i < from_json.values.size(); ++i) {
    CHECK(from_json.values[i] == from_csv.values[i]);
  }
}

TEST_CASE("condense reproduces the golden group matrix") {
  TempDir dir("cli-condense");
  make_matrix(dir);
  const int rc = run_cli("condense --matrix \"" + dir.file("matrix.csv").string() + "\" --groups \"" +
                         (kGolden / "groups.csv").string() + "\" --out \"" +
                         dir.file("condensed.csv").string() + "\"");
  REQUIRE(rc == 0);
  CHECK(read_file(dir.file("condensed.csv")) == golden("condensed.csv"));
}

TEST_CASE("tree reproduces the golden newick and drops the baseline") {
  TempDir dir("cli-tree");
  make_matrix(dir);
  const int rc = run_cli("tree --matrix \"" + dir.file("matrix.csv").string() + "\" --out \"" +
                         dir.file("tree.nwk").string() + "\"");
  REQUIRE(rc == 0);
  const std::string text = read_file(dir.file("tree.nwk"));
  CHECK(text == golden("tree.nwk"));
  const auto tree = parse_newick(text);  // provenance comment is skipped
  auto names = tree.leaf_names;
  std::sort(names.begin(), names.end());
  CHECK(names == std::vector<std::string>{"model-a", "model-b", "model-c"});

  // Without --out the same bytes go to stdout.
  const int rc2 = run_cli("tree --matrix \"" + dir.file("matrix.csv").string() + "\"",
                          dir.file("stdout.txt"));
  REQUIRE(rc2 == 0);
  CHECK(read_file(dir.file("stdout.txt")) == golden("tree.nwk"));
}

TEST_CASE("imbalance reproduces the golden sweep") {
  TempDir dir("cli-imbalance");
  const int rc = run_cli("imbalance \"" + (kGolden / "model-a.csv").string() + "\" \"" +
                         (kGolden / "model-b.csv").string() + "\" --k 1 --k 2 --out \"" +
                         dir.file("ii.csv").string() + "\"");
  REQUIRE(rc == 0);
  CHECK(read_file(dir.file("ii.csv")) == golden("imbalance.csv"));
}

TEST_CASE("energy-mae reproduces the golden table") {
  TempDir dir("cli-energy");
  const int rc = run_cli("energy-mae --table \"" + (kGolden / "energy.csv").string() + "\" --out \"" +
                         dir.file("energy.csv").string() + "\"");
  REQUIRE(rc == 0);
  CHECK(read_file(dir.file("energy.csv")) == golden("energy.csv"));
}

TEST_CASE("convergence reproduces the golden table") {
  TempDir dir("cli-convergence");
  make_matrix(dir);
  const int rc = run_cli("convergence --matrix \"" + dir.file("matrix.csv").string() +
                         "\" --performance \"" + (kGolden / "perf.csv").string() +
                         "\" --reference model-a --out \"" + dir.file("conv.csv").string() + "\"");
  REQUIRE(rc == 0);
  CHECK(read_file(dir.file("conv.csv")) == golden("convergence.csv"));
}

TEST_CASE("id reports positive finite estimates as json") {
  TempDir dir("cli-id");
  REQUIRE(run_cli("synth --models 1 --baselines 0 --n 400 --dim 24 --d-latent 5 --seed 3 --out-dir \"" +
                  dir.path.string() + "\"") == 0);
  const int rc = run_cli("id \"" + dir.file("view-0.emb").string() + "\" --k 20 --out \"" +
                         dir.file("id.json").string() + "\"");
  REQUIRE(rc == 0);
  const auto doc = nlohmann::json::parse(read_file(dir.file("id.json")));
  CHECK(doc.at("command") == "id");
  CHECK(doc.at("model") == "view-0");
  CHECK(doc.at("version").get<std::string>().find('.') != std::string::npos);
  REQUIRE(doc.at("estimates").size() == 2);
  for (const auto& est : doc.at("estimates")) {
    const double value = est.at("value").get<double>();
    CHECK(value > 0.0);
    CHECK(value < 24.0);
    CHECK((est.at("method") == "twonn" || est.at("method") == "mle"));
  }
}

TEST_CASE("synth bundles are reproducible and seed-sensitive") {
  TempDir one("cli-synth-1");
  TempDir two("cli-synth-2");
  TempDir other("cli-synth-3");
  const std::string spec = "synth --models 2 --baselines 1 --n 80 --dim 12 --out-dir ";
  REQUIRE(run_cli(spec + "\"" + one.path.string() + "\" --seed 11") == 0);
  REQUIRE(run_cli(spec + "\"" + two.path.string() + "\" --seed 11") == 0);
  REQUIRE(run_cli(spec + "\"" + other.path.string() + "\" --seed 12") == 0);
  for (const std::string name : {"view-0.emb", "view-1.emb", "baseline-0.emb", "groups.csv"}) {
    CHECK(read_file(one.file(name)) == read_file(two.file(name)));
  }
  CHECK(read_file(one.file("view-0.emb")) != read_file(other.file("view-0.emb")));
  // The bundle's manifest drives pairwise directly.
  const auto entries = load_manifest(one.file("manifest.json"));
  REQUIRE(entries.size() == 3);
  CHECK(entries[2].baseline);
  const int rc = run_cli("pairwise --manifest \"" + one.file("manifest.json").string() +
                         "\" --k 10 --out \"" + one.file("m.csv").string() + "\"");
  CHECK(rc == 0);
}

TEST_CASE("argument problems exit 2") {
  TempDir dir("cli-exit2");
  CHECK(run_cli("") == 2);                                             // missing subcommand
  CHECK(run_cli("pairwise --nope x --out \"" + dir.file("o").string() + "\"") == 2);
  CHECK(run_cli("pairwise --manifest /does/not/exist.json --out \"" + dir.file("o").string() + "\"") ==
        2);
  CHECK(run_cli("tree --matrix /does/not/exist.csv") == 2);
  CHECK(run_cli("pairwise --metric rsa --manifest \"" + (kGolden / "manifest.json").string() +
                "\" --out \"" + dir.file("o").string() + "\"") == 2);
  // k beyond N-1 for the 8-row fixtures is an argument-range problem.
  CHECK(run_cli("pairwise --manifest \"" + (kGolden / "manifest.json").string() +
                "\" --k 100 --out \"" + dir.file("o").string() + "\"") == 2);
}

TEST_CASE("data problems exit 3") {
  TempDir dir("cli-exit3");
  write_file(dir.file("ragged.csv"), "1,2,3\n4,5\n");
  write_file(dir.file("other.csv"), "1,2,3\n4,5,6\n");
  CHECK(run_cli("imbalance \"" + dir.file("ragged.csv").string() + "\" \"" +
                dir.file("other.csv").string() + "\" --out \"" + dir.file("o").string() + "\"") == 3);
  write_file(dir.file("bad-manifest.json"), "{\"models\": \"oops\"}");
  CHECK(run_cli("pairwise --manifest \"" + dir.file("bad-manifest.json").string() + "\" --out \"" +
                dir.file("o").string() + "\"") == 3);
}

TEST_CASE("version flag prints the tool version") {
  TempDir dir("cli-version");
  REQUIRE(run_cli("--version", dir.file("v.txt")) == 0);
  const auto text = read_file(dir.file("v.txt"));
  CHECK(text.find("repalign") != std::string::npos);
  CHECK(text.find("0.1.0") != std::string::npos);
}

TEST_CASE("verify passes against the bundled oracles") {
  TempDir dir("cli-verify");
  REQUIRE(run_cli("verify --instances 4", dir.file("verify.txt")) == 0);
  const auto text = read_file(dir.file("verify.txt"));
  CHECK(text.find("PASS") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);
}

}  // TEST_SUITE
