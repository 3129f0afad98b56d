#include "repalign/energy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "csv_util.hpp"
#include "repalign/errors.hpp"
#include "repalign/text_format.hpp"
#include "warn.hpp"

namespace repalign {

double Composition::total_atoms() const {
  double total = 0.0;
  for (const auto& [element, count] : entries) total += count;
  return total;
}

Composition parse_composition(std::string_view text) {
  Composition comp;
  std::map<std::string, double> counts;
  std::vector<std::string> order;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view part = text.substr(pos, comma - pos);
    pos = comma + 1;
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    if (part.empty()) {
      if (pos > text.size()) break;
      throw data_error("composition '" + std::string(text) + "': empty element entry");
    }
    const std::size_t colon = part.find(':');
    if (colon == std::string_view::npos || colon == 0) {
      throw data_error("composition '" + std::string(text) + "': expected element:count in '" +
                       std::string(part) + "'");
    }
    const std::string element(part.substr(0, colon));
    double count = 0.0;
    try {
      count = parse_double(part.substr(colon + 1));
    } catch (const std::invalid_argument&) {
      throw data_error("composition '" + std::string(text) + "': bad count in '" + std::string(part) + "'");
    }
    if (count < 0.0) {
      throw data_error("composition '" + std::string(text) + "': negative count for " + element);
    }
    if (!counts.count(element)) order.push_back(element);
    counts[element] += count;
    if (pos > text.size()) break;
  }
  for (const auto& element : order) comp.entries.push_back({element, counts[element]});
  if (comp.entries.empty()) throw data_error("composition '" + std::string(text) + "' is empty");
  return comp;
}

std::size_t EnergyTable::model_index(std::string_view model) const {
  for (std::size_t i = 0; i < model_names.size(); ++i) {
    if (model_names[i] == model) return i;
  }
  throw std::invalid_argument("model '" + std::string(model) + "' is not in the energy table");
}

EnergyTable EnergyTable::subset(std::span<const std::size_t> rows) const {
  EnergyTable out;
  out.model_names = model_names;
  out.element_order = element_order;
  out.model_energies.resize(model_names.size());
  for (const std::size_t r : rows) {
    if (r >= n()) throw std::invalid_argument("subset row out of range");
    out.ids.push_back(ids[r]);
    out.compositions.push_back(compositions[r]);
    out.e_true.push_back(e_true[r]);
    for (std::size_t m = 0; m < model_names.size(); ++m) {
      out.model_energies[m].push_back(model_energies[m][r]);
    }
  }
  return out;
}

EnergyTable load_energy_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = std::move(buf).str();
  const auto lines = detail::split_lines(text);
  EnergyTable table;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::set<std::string> elements;
  for (const auto line : lines) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::csv_split(line, line_no, path.string());
    if (!header_seen) {
      if (fields.size() < 3 || fields[0] != "id" || fields[1] != "composition" || fields[2] != "e_true") {
        throw data_error(path.string() + ": expected an 'id,composition,e_true,<models...>' header");
      }
      table.model_names.assign(fields.begin() + 3, fields.end());
      {
        std::set<std::string> seen(table.model_names.begin(), table.model_names.end());
        if (seen.size() != table.model_names.size()) {
          throw data_error(path.string() + ": duplicate model column");
        }
      }
      table.model_energies.resize(table.model_names.size());
      header_seen = true;
      continue;
    }
    if (fields.size() != table.model_names.size() + 3) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.model_names.size() + 3) + " fields, got " +
                       std::to_string(fields.size()));
    }
    table.ids.push_back(fields[0]);
    Composition comp;
    try {
      comp = parse_composition(fields[1]);
    } catch (const data_error& e) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (comp.total_atoms() <= 0.0) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": composition has no atoms");
    }
    for (const auto& [element, count] : comp.entries) elements.insert(element);
    table.compositions.push_back(std::move(comp));
    try {
      table.e_true.push_back(parse_double(fields[2]));
      for (std::size_t m = 0; m < table.model_names.size(); ++m) {
        table.model_energies[m].push_back(parse_double(fields[m + 3]));
      }
    } catch (const std::invalid_argument& e) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!std::isfinite(table.e_true.back())) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": non-finite energy");
    }
    for (const auto& column : table.model_energies) {
      if (!std::isfinite(column.back())) {
        throw data_error(path.string() + ":" + std::to_string(line_no) + ": non-finite energy");
      }
    }
  }
  if (!header_seen) throw data_error(path.string() + ": no header row");
  if (table.ids.empty()) throw data_error(path.string() + ": no structure rows");
  table.element_order.assign(elements.begin(), elements.end());
  return table;
}

namespace {

std::vector<double> densify(const Composition& comp, const std::vector<std::string>& element_order) {
  std::vector<double> row(element_order.size(), 0.0);
  for (const auto& [element, count] : comp.entries) {
    const auto it = std::find(element_order.begin(), element_order.end(), element);
    if (it == element_order.end()) {
      throw std::invalid_argument("element '" + element + "' is not in the fit's element set");
    }
    row[static_cast<std::size_t>(it - element_order.begin())] += count;
  }
  return row;
}

}  // namespace

LinearCompositionalFit fit_linear_compositional(std::span<const Composition> compositions,
                                                std::span<const double> energies,
                                                const std::vector<std::string>& element_order) {
  const std::size_t n = compositions.size();
  if (n == 0 || n != energies.size()) {
    throw std::invalid_argument("fit needs matching, non-empty compositions and energies");
  }
  const std::size_t n_elem = element_order.size();
  const std::size_t n_col = n_elem + 1;  // intercept last
  // Column-major design matrix for cheap column swaps during pivoting.
  std::vector<std::vector<double>> cols(n_col, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = densify(compositions[i], element_order);
    for (std::size_t e = 0; e < n_elem; ++e) cols[e][i] = row[e];
    cols[n_elem][i] = 1.0;
  }
  std::vector<double> rhs(energies.begin(), energies.end());
  std::vector<std::size_t> perm(n_col);
  for (std::size_t c = 0; c < n_col; ++c) perm[c] = c;

  // Householder QR with column pivoting; R overwrites the column array.
  double max_initial_norm = 0.0;
  for (std::size_t c = 0; c < n_col; ++c) {
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm_sq += cols[c][i] * cols[c][i];
    max_initial_norm = std::max(max_initial_norm, std::sqrt(norm_sq));
  }
  const double rank_tol = max_initial_norm * static_cast<double>(std::max(n, n_col)) * 1e-14;
  const std::size_t steps = std::min(n, n_col);
  std::size_t rank = 0;
  for (std::size_t step = 0; step < steps; ++step) {
    // Pivot: bring the column with the largest remaining norm forward.
    std::size_t best = step;
    double best_norm = -1.0;
    for (std::size_t c = step; c < n_col; ++c) {
      double norm_sq = 0.0;
      for (std::size_t i = step; i < n; ++i) norm_sq += cols[c][i] * cols[c][i];
      if (norm_sq > best_norm) {
        best_norm = norm_sq;
        best = c;
      }
    }
    if (best != step) {
      std::swap(cols[best], cols[step]);
      std::swap(perm[best], perm[step]);
    }
    const double col_norm = std::sqrt(std::max(best_norm, 0.0));
    if (col_norm <= rank_tol) break;
    ++rank;
    // Householder vector for the current column.
    std::vector<double>& pivot_col = cols[step];
    const double alpha = pivot_col[step] >= 0.0 ? -col_norm : col_norm;
    std::vector<double> v(n, 0.0);
    for (std::size_t i = step; i < n; ++i) v[i] = pivot_col[i];
    v[step] -= alpha;
    double v_norm_sq = 0.0;
    for (std::size_t i = step; i < n; ++i) v_norm_sq += v[i] * v[i];
    if (v_norm_sq > 0.0) {
      for (std::size_t c = step; c < n_col; ++c) {
        double proj = 0.0;
        for (std::size_t i = step; i < n; ++i) proj += v[i] * cols[c][i];
        const double scale = 2.0 * proj / v_norm_sq;
        for (std::size_t i = step; i < n; ++i) cols[c][i] -= scale * v[i];
      }
      double proj = 0.0;
      for (std::size_t i = step; i < n; ++i) proj += v[i] * rhs[i];
      const double scale = 2.0 * proj / v_norm_sq;
      for (std::size_t i = step; i < n; ++i) rhs[i] -= scale * v[i];
    }
    pivot_col[step] = alpha;
    for (std::size_t i = step + 1; i < n; ++i) pivot_col[i] = 0.0;
  }

  // Back-substitution on the leading rank x rank triangle.
  std::vector<double> solution(n_col, 0.0);
  for (std::size_t r = rank; r-- > 0;) {
    double acc = rhs[r];
    for (std::size_t c = r + 1; c < rank; ++c) acc -= cols[c][r] * solution[c];
    solution[r] = acc / cols[r][r];
  }

  LinearCompositionalFit fit;
  fit.element_order = element_order;
  fit.weights.assign(n_elem, 0.0);
  fit.n_fit = n;
  for (std::size_t r = 0; r < rank; ++r) {
    if (perm[r] == n_elem) {
      fit.intercept = solution[r];
    } else {
      fit.weights[perm[r]] = solution[r];
    }
  }
  for (std::size_t r = rank; r < n_col; ++r) {
    if (perm[r] == n_elem) {
      fit.intercept_dropped = true;
      fit.dropped.push_back("intercept");
    } else {
      fit.dropped.push_back(element_order[perm[r]]);
    }
  }
  std::sort(fit.dropped.begin(), fit.dropped.end());
  if (rank == 0) throw data_error("design matrix has rank 0; nothing to fit");
  if (!fit.dropped.empty()) {
    std::string names;
    for (const auto& name : fit.dropped) {
      if (!names.empty()) names += ", ";
      names += name;
    }
    detail::warn("compositional fit dropped rank-deficient columns: " + names);
  }
  // Residuals against the original design.
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = densify(compositions[i], element_order);
    double pred = fit.intercept;
    for (std::size_t e = 0; e < n_elem; ++e) pred += fit.weights[e] * row[e];
    const double resid = energies[i] - pred;
    ss += resid * resid;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

LinearCompositionalFit fit_linear_compositional(std::span<const Composition> compositions,
                                                std::span<const double> energies) {
  std::set<std::string> elements;
  for (const auto& comp : compositions) {
    for (const auto& [element, count] : comp.entries) elements.insert(element);
  }
  return fit_linear_compositional(compositions, energies,
                                  std::vector<std::string>(elements.begin(), elements.end()));
}

std::vector<double> deviations(std::span<const double> energies, const LinearCompositionalFit& fit,
                               std::span<const Composition> compositions) {
  if (energies.size() != compositions.size()) {
    throw std::invalid_argument("deviations: energies and compositions must match");
  }
  std::vector<double> out(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const auto row = densify(compositions[i], fit.element_order);
    double pred = fit.intercept;
    for (std::size_t e = 0; e < row.size(); ++e) pred += fit.weights[e] * row[e];
    out[i] = energies[i] - pred;
  }
  return out;
}

double energy_regression_mae(const EnergyTable& table, const std::string& model) {
  const std::size_t m = table.model_index(model);
  const auto fit_true = fit_linear_compositional(table.compositions, table.e_true, table.element_order);
  const auto fit_model =
      fit_linear_compositional(table.compositions, table.model_energies[m], table.element_order);
  const auto dev_true = deviations(table.e_true, fit_true, table.compositions);
  const auto dev_model = deviations(table.model_energies[m], fit_model, table.compositions);
  double acc = 0.0;
  for (std::size_t i = 0; i < dev_true.size(); ++i) acc += std::fabs(dev_true[i] - dev_model[i]);
  return acc / static_cast<double>(dev_true.size());
}

}  // namespace repalign
