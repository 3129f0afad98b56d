#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace repalign {

// Element counts parsed from a field like "Fe:2,O:3". Repeated elements sum.
struct Composition {
  std::vector<std::pair<std::string, double>> entries;

  double total_atoms() const;
};
Composition parse_composition(std::string_view text);

// CSV with header id,composition,e_true,<model>... giving per-structure
// reference and per-model predicted energies.
struct EnergyTable {
  std::vector<std::string> ids;
  std::vector<Composition> compositions;
  std::vector<double> e_true;
  std::vector<std::string> model_names;
  std::vector<std::vector<double>> model_energies;  // [model][structure]
  std::vector<std::string> element_order;           // sorted union over structures

  std::size_t n() const { return ids.size(); }
  std::size_t model_index(std::string_view model) const;  // throws if absent
  EnergyTable subset(std::span<const std::size_t> rows) const;
};
EnergyTable load_energy_table(const std::filesystem::path& path);

// Least-squares fit of E ~ w . counts + b by Householder QR with column
// pivoting. Rank-deficient columns are dropped (weight 0) and named.
struct LinearCompositionalFit {
  std::vector<std::string> element_order;
  std::vector<double> weights;  // one per element; 0 when dropped
  double intercept = 0.0;
  bool intercept_dropped = false;
  double residual_rms = 0.0;
  std::size_t n_fit = 0;
  std::vector<std::string> dropped;  // element symbols, or "intercept"
};
LinearCompositionalFit fit_linear_compositional(std::span<const Composition> compositions,
                                                std::span<const double> energies,
                                                const std::vector<std::string>& element_order);
LinearCompositionalFit fit_linear_compositional(std::span<const Composition> compositions,
                                                std::span<const double> energies);

// Per-structure deviation from the compositional baseline: E - (w . c + b).
std::vector<double> deviations(std::span<const double> energies, const LinearCompositionalFit& fit,
                               std::span<const Composition> compositions);

// Mean |deviation_true - deviation_model| with both baselines fitted
// independently on the same structures.
double energy_regression_mae(const EnergyTable& table, const std::string& model);

}  // namespace repalign
