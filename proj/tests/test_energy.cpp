#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "repalign/energy.hpp"
#include "repalign/errors.hpp"
#include "repalign/rng.hpp"
#include "test_util.hpp"

using namespace repalign;
using test_util::TempDir;
using test_util::write_file;

namespace {

Composition comp_of(std::initializer_list<std::pair<const char*, double>> entries) {
  Composition c;
  for (const auto& [name, count] : entries) c.entries.push_back({name, count});
  return c;
}

// Random integer-count compositions over {al, mg, si} plus a linear energy.
struct FitProblem {
  std::vector<Composition> comps;
  std::vector<double> energies;
  std::vector<std::vector<double>> counts;  // dense rows, 3 columns
};

FitProblem random_problem(std::size_t n, std::uint64_t seed, double noise) {
  Xoshiro256StarStar rng(seed);
  FitProblem p;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = static_cast<double>(rng.below(9));
    const double b = static_cast<double>(rng.below(9));
    const double c = static_cast<double>(1 + rng.below(8));
    p.counts.push_back({a, b, c});
    p.comps.push_back(comp_of({{"al", a}, {"mg", b}, {"si", c}}));
    p.energies.push_back(1.2 * a - 3.4 * b + 0.7 * c + 5.0 + noise * rng.normal());
  }
  return p;
}

// Normal-equations solve (4x4 Gaussian elimination with partial pivoting),
// independent of the library's QR path.
std::vector<double> normal_equations(const FitProblem& p) {
  constexpr std::size_t kCols = 4;  // al, mg, si, intercept
  double ata[kCols][kCols] = {};
  double atb[kCols] = {};
  for (std::size_t i = 0; i < p.comps.size(); ++i) {
    const double row[kCols] = {p.counts[i][0], p.counts[i][1], p.counts[i][2], 1.0};
    for (std::size_t r = 0; r < kCols; ++r) {
      for (std::size_t c = 0; c < kCols; ++c) ata[r][c] += row[r] * row[c];
      atb[r] += row[r] * p.energies[i];
    }
  }
  std::vector<std::size_t> order(kCols);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t col = 0; col < kCols; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < kCols; ++r) {
      if (std::fabs(ata[r][col]) > std::fabs(ata[pivot][col])) pivot = r;
    }
    std::swap(ata[col], ata[pivot]);
    std::swap(atb[col], atb[pivot]);
    for (std::size_t r = col + 1; r < kCols; ++r) {
      const double factor = ata[r][col] / ata[col][col];
      for (std::size_t c = col; c < kCols; ++c) ata[r][c] -= factor * ata[col][c];
      atb[r] -= factor * atb[col];
    }
  }
  std::vector<double> theta(kCols, 0.0);
  for (std::size_t r = kCols; r-- > 0;) {
    double acc = atb[r];
    for (std::size_t c = r + 1; c < kCols; ++c) acc -= ata[r][c] * theta[c];
    theta[r] = acc / ata[r][r];
  }
  return theta;
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("compositions parse with summed repeats and flexible spacing") {
  const auto c = parse_composition("Fe:2,O:3");
  REQUIRE(c.entries.size() == 2);
  CHECK(c.entries[0].first == "Fe");
  CHECK(c.entries[0].second == 2.0);
  CHECK(c.entries[1].first == "O");
  CHECK(c.entries[1].second == 3.0);
  CHECK(c.total_atoms() == 5.0);

  const auto repeated = parse_composition("H:1, O:1, H:2");
  REQUIRE(repeated.entries.size() == 2);
  CHECK(repeated.entries[0].first == "H");
  CHECK(repeated.entries[0].second == 3.0);

  CHECK(parse_composition("Si:0.5").total_atoms() == 0.5);
  CHECK_THROWS_AS(parse_composition(""), data_error);
  CHECK_THROWS_AS(parse_composition("Fe"), data_error);
  CHECK_THROWS_AS(parse_composition("Fe:abc"), data_error);
  CHECK_THROWS_AS(parse_composition("Fe:-1"), data_error);
  CHECK_THROWS_AS(parse_composition(":2"), data_error);
  CHECK_THROWS_AS(parse_composition("Fe:1,,O:2"), data_error);
}

TEST_CASE("energy tables load from quoted csv") {
  TempDir dir("energy-load");
  write_file(dir.file("t.csv"),
             "# predicted energies\n"
             "id,composition,e_true,model-a,model-b\n"
             "s1,\"Fe:2,O:3\",-1.5,-1.4,-1.6\n"
             "s2,O:1,0.25,0.5,0.0\n");
  const auto table = load_energy_table(dir.file("t.csv"));
  REQUIRE(table.n() == 2);
  CHECK(table.ids == std::vector<std::string>{"s1", "s2"});
  CHECK(table.model_names == std::vector<std::string>{"model-a", "model-b"});
  CHECK(table.element_order == std::vector<std::string>{"Fe", "O"});
  CHECK(table.e_true[0] == -1.5);
  CHECK(table.model_energies[1][1] == 0.0);
  CHECK(table.model_index("model-b") == 1);
  CHECK_THROWS_AS(table.model_index("nope"), std::invalid_argument);

  write_file(dir.file("bad-header.csv"), "structure,comp,e\nx,O:1,1\n");
  CHECK_THROWS_AS(load_energy_table(dir.file("bad-header.csv")), data_error);
  write_file(dir.file("short-row.csv"), "id,composition,e_true,m\ns1,O:1,1\n");
  CHECK_THROWS_AS(load_energy_table(dir.file("short-row.csv")), data_error);
  write_file(dir.file("dup-model.csv"), "id,composition,e_true,m,m\ns1,O:1,1,2,3\n");
  CHECK_THROWS_AS(load_energy_table(dir.file("dup-model.csv")), data_error);
  write_file(dir.file("no-rows.csv"), "id,composition,e_true,m\n");
  CHECK_THROWS_AS(load_energy_table(dir.file("no-rows.csv")), data_error);
  write_file(dir.file("nan.csv"), "id,composition,e_true,m\ns1,O:1,nan,1\n");
  CHECK_THROWS_AS(load_energy_table(dir.file("nan.csv")), data_error);
}

TEST_CASE("table subsets keep rows in the requested order") {
  TempDir dir("energy-subset");
  write_file(dir.file("t.csv"),
             "id,composition,e_true,m\n"
             "s1,O:1,1,10\n"
             "s2,O:2,2,20\n"
             "s3,O:3,3,30\n");
  const auto table = load_energy_table(dir.file("t.csv"));
  const std::vector<std::size_t> rows{2, 0};
  const auto sub = table.subset(rows);
  CHECK(sub.ids == std::vector<std::string>{"s3", "s1"});
  CHECK(sub.e_true == std::vector<double>{3.0, 1.0});
  CHECK(sub.model_energies[0] == std::vector<double>{30.0, 10.0});
  CHECK(sub.element_order == table.element_order);
  const std::vector<std::size_t> oob{5};
  CHECK_THROWS_AS(table.subset(oob), std::invalid_argument);
}

TEST_CASE("a noise-free linear law is recovered exactly") {
  const auto p = random_problem(40, 31, 0.0);
  const auto fit = fit_linear_compositional(p.comps, p.energies);
  REQUIRE(fit.element_order == std::vector<std::string>{"al", "mg", "si"});
  CHECK(fit.weights[0] == doctest::Approx(1.2).epsilon(1e-10));
  CHECK(fit.weights[1] == doctest::Approx(-3.4).epsilon(1e-10));
  CHECK(fit.weights[2] == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(fit.residual_rms <= 1e-10);
  CHECK(fit.dropped.empty());
  CHECK_FALSE(fit.intercept_dropped);
  CHECK(fit.n_fit == 40);
  const auto dev = deviations(p.energies, fit, p.comps);
  for (const double d : dev) CHECK(std::fabs(d) <= 1e-9);
}

TEST_CASE("a single-element law fits weight 2 intercept 0") {
  const std::vector<Composition> comps{comp_of({{"A", 1.0}}), comp_of({{"A", 2.0}}),
                                       comp_of({{"A", 3.0}})};
  const std::vector<double> energies{2.0, 4.0, 6.0};
  const auto fit = fit_linear_compositional(comps, energies);
  CHECK(fit.weights[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("the qr fit agrees with a normal-equations oracle") {
  for (const std::uint64_t seed : {41u, 42u, 43u}) {
    const auto p = random_problem(60, seed, 0.3);
    const auto fit = fit_linear_compositional(p.comps, p.energies);
    const auto theta = normal_equations(p);
    CHECK(fit.weights[0] == doctest::Approx(theta[0]).epsilon(1e-8));
    CHECK(fit.weights[1] == doctest::Approx(theta[1]).epsilon(1e-8));
    CHECK(fit.weights[2] == doctest::Approx(theta[2]).epsilon(1e-8));
    CHECK(fit.intercept == doctest::Approx(theta[3]).epsilon(1e-8));
  }
}

TEST_CASE("collinear element columns are dropped by pivoted qr") {
  // Count of B is always exactly twice the count of A, so only one of the two
  // directions is identifiable; pivoting keeps the larger column.
  std::vector<Composition> comps;
  std::vector<double> energies;
  for (double a = 1.0; a <= 4.0; a += 1.0) {
    comps.push_back(comp_of({{"A", a}, {"B", 2.0 * a}}));
    energies.push_back(3.0 * a + 1.0);
  }
  const auto fit = fit_linear_compositional(comps, energies);
  REQUIRE(fit.element_order == std::vector<std::string>{"A", "B"});
  CHECK(fit.dropped == std::vector<std::string>{"A"});
  CHECK(fit.weights[0] == 0.0);
  CHECK(fit.weights[1] == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fit.residual_rms <= 1e-10);
  const auto dev = deviations(energies, fit, comps);
  for (const double d : dev) CHECK(std::fabs(d) <= 1e-9);
}

TEST_CASE("an underdetermined fit succeeds with dropped columns") {
  const std::vector<Composition> comps{comp_of({{"A", 2.0}, {"B", 1.0}})};
  const std::vector<double> energies{7.0};
  const auto fit = fit_linear_compositional(comps, energies);
  CHECK(fit.dropped.size() == 2);
  CHECK(fit.residual_rms <= 1e-12);
  CHECK_THROWS_AS(
      fit_linear_compositional(std::vector<Composition>{}, std::vector<double>{}),
      std::invalid_argument);
  CHECK_THROWS_AS(fit_linear_compositional(comps, std::vector<double>{1.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("deviations reject unknown elements and length mismatches") {
  const auto p = random_problem(10, 51, 0.1);
  const auto fit = fit_linear_compositional(p.comps, p.energies);
  const std::vector<Composition> alien{comp_of({{"Xx", 1.0}})};
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(deviations(one, fit, alien), std::invalid_argument);
  CHECK_THROWS_AS(deviations(p.energies, fit, alien), std::invalid_argument);
}

TEST_CASE("deviation mae ignores any compositional shift of the predictions") {
  const auto p = random_problem(50, 61, 0.5);
  EnergyTable table;
  table.ids.resize(50, "s");
  table.compositions = p.comps;
  table.e_true = p.energies;
  table.model_names = {"shifted", "constant"};
  table.element_order = {"al", "mg", "si"};
  std::vector<double> shifted(50), constant(50, -4.25);
  for (std::size_t i = 0; i < 50; ++i) {
    shifted[i] = p.energies[i] + 2.0 * p.counts[i][0] - 1.5 * p.counts[i][1] + 7.0;
  }
  table.model_energies = {shifted, constant};

  // The shifted model differs from the truth only by a term the baseline
  // absorbs, so its deviation profile matches exactly.
  CHECK(energy_regression_mae(table, "shifted") <= 1e-8);

  // A constant predictor has zero deviations; the MAE collapses to the mean
  // absolute deviation of the true energies.
  const auto fit_true = fit_linear_compositional(p.comps, p.energies, table.element_order);
  const auto dev_true = deviations(p.energies, fit_true, p.comps);
  double expected = 0.0;
  for (const double d : dev_true) expected += std::fabs(d);
  expected /= 50.0;
  CHECK(energy_regression_mae(table, "constant") == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("mae equals the mean of an orthogonal disturbance") {
  const auto p = random_problem(40, 71, 1.0);
  Xoshiro256StarStar rng(72);
  std::vector<double> s(40);
  for (auto& x : s) x = rng.normal();
  const auto fit_s = fit_linear_compositional(p.comps, s, {"al", "mg", "si"});
  const auto dev_s = deviations(s, fit_s, p.comps);  // orthogonal part of s

  EnergyTable table;
  table.ids.resize(40, "s");
  table.compositions = p.comps;
  table.e_true = p.energies;
  table.model_names = {"bumped"};
  table.element_order = {"al", "mg", "si"};
  std::vector<double> bumped(40);
  for (std::size_t i = 0; i < 40; ++i) bumped[i] = p.energies[i] + dev_s[i];
  table.model_energies = {bumped};

  double expected = 0.0;
  for (const double d : dev_s) expected += std::fabs(d);
  expected /= 40.0;
  CHECK(energy_regression_mae(table, "bumped") == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("mae is invariant under row permutation") {
  TempDir dir("energy-perm");
  std::string csv = "id,composition,e_true,m\n";
  Xoshiro256StarStar rng(81);
  for (int i = 0; i < 20; ++i) {
    csv += "s" + std::to_string(i) + ",\"A:" + std::to_string(1 + static_cast<int>(rng.below(5))) +
           ",B:" + std::to_string(1 + static_cast<int>(rng.below(5))) + "\"," +
           std::to_string(rng.normal()) + "," + std::to_string(rng.normal()) + "\n";
  }
  write_file(dir.file("t.csv"), csv);
  const auto table = load_energy_table(dir.file("t.csv"));
  const double direct = energy_regression_mae(table, "m");
  std::vector<std::size_t> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[11]);
  const double permuted = energy_regression_mae(table.subset(perm), "m");
  CHECK(permuted == doctest::Approx(direct).epsilon(1e-9));
}

}  // TEST_SUITE
