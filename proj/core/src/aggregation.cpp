#include "repalign/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "csv_util.hpp"
#include "repalign/errors.hpp"
#include "repalign/text_format.hpp"

namespace repalign {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

}  // namespace

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::cknna: return "cknna";
    case MetricKind::cka: return "cka";
    case MetricKind::dcor: return "dcor";
    case MetricKind::ii_forward: return "ii-forward";
  }
  return "?";
}

MetricKind parse_metric_kind(std::string_view name) {
  if (name == "cknna") return MetricKind::cknna;
  if (name == "cka") return MetricKind::cka;
  if (name == "dcor") return MetricKind::dcor;
  if (name == "ii-forward") return MetricKind::ii_forward;
  throw std::invalid_argument("unknown metric '" + std::string(name) +
                              "' (expected cknna, cka, dcor, or ii-forward)");
}

std::map<std::string, std::string> MetricParams::describe(MetricKind kind) const {
  std::map<std::string, std::string> out;
  switch (kind) {
    case MetricKind::cknna:
      out["k"] = std::to_string(k);
      out["centering"] = to_string(centering);
      out["neighbor"] = to_string(neighbor);
      out["denominator-mask"] = shared_denominator_mask ? "shared" : "own";
      break;
    case MetricKind::cka:
      out["centering"] = to_string(centering);
      break;
    case MetricKind::dcor:
      out["output"] = sqrt_dcor ? "sqrt" : "ratio";
      break;
    case MetricKind::ii_forward:
      out["k"] = std::to_string(k);
      out["rank-distance"] = to_string(rank_distance);
      break;
  }
  return out;
}

bool AlignmentMatrix::is_missing(std::size_t i, std::size_t j) const { return std::isnan(at(i, j)); }

std::optional<std::size_t> AlignmentMatrix::index_of(std::string_view model) const {
  for (std::size_t i = 0; i < model_names.size(); ++i) {
    if (model_names[i] == model) return i;
  }
  return std::nullopt;
}

namespace {

void mark_missing(AlignmentMatrix& out, std::size_t i, std::size_t j, const std::string& reason) {
  out.at(i, j) = kNaN;
  out.missing.push_back({i, j, reason});
}

template <class State, class Prepare, class Pair>
void fill_symmetric(AlignmentMatrix& out, std::size_t m, Prepare&& prepare, Pair&& pair) {
  std::vector<std::optional<State>> states(m);
  std::vector<std::string> bad(m);
  for (std::size_t i = 0; i < m; ++i) {
    try {
      states[i] = prepare(i);
    } catch (const degenerate_input_error& e) {
      bad[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const std::string* reason = nullptr;
      if (!bad[i].empty()) reason = &bad[i];
      else if (!bad[j].empty()) reason = &bad[j];
      if (reason) {
        mark_missing(out, i, j, *reason);
        if (i != j) mark_missing(out, j, i, *reason);
        continue;
      }
      try {
        const double v = pair(*states[i], *states[j]);
        out.at(i, j) = v;
        if (i != j) out.at(j, i) = v;
      } catch (const degenerate_input_error& e) {
        mark_missing(out, i, j, e.what());
        if (i != j) mark_missing(out, j, i, e.what());
      }
    }
  }
}

}  // namespace

AlignmentMatrix pairwise_matrix(std::span<const EmbeddingSet> sets, MetricKind metric,
                                const MetricParams& params) {
  if (sets.size() < 2) throw std::invalid_argument("pairwise matrix needs at least 2 models");
  const std::size_t m = sets.size();
  {
    std::set<std::string_view> seen;
    for (const auto& s : sets) {
      if (!seen.insert(s.model_name).second) {
        throw std::invalid_argument("duplicate model name '" + s.model_name + "'");
      }
    }
  }
  for (std::size_t i = 1; i < m; ++i) require_aligned(sets[0], sets[i]);

  AlignmentMatrix out;
  out.m = m;
  out.metric = to_string(metric);
  out.params = params.describe(metric);
  out.symmetric = metric != MetricKind::ii_forward;
  out.values.assign(m * m, kNaN);
  for (const auto& s : sets) {
    out.model_names.push_back(s.model_name);
    if (s.baseline) out.baselines.push_back(s.model_name);
  }

  if (metric == MetricKind::cknna || metric == MetricKind::cka) {
    // Kernel metrics run on normalized rows; keep owned copies alive for the
    // duration since model states point into them.
    std::vector<EmbeddingSet> owned;
    owned.reserve(m);
    std::vector<const EmbeddingSet*> view(m);
    for (std::size_t i = 0; i < m; ++i) {
      if (sets[i].normalized) {
        view[i] = &sets[i];
      } else {
        owned.push_back(normalize_rows(sets[i]).set);
        view[i] = &owned.back();
      }
    }
    if (metric == MetricKind::cknna) {
      CknnaOptions opts{params.centering, params.neighbor, params.shared_denominator_mask};
      fill_symmetric<CknnaModelState>(
          out, m, [&](std::size_t i) { return cknna_prepare(*view[i], params.k, opts); },
          [&](const CknnaModelState& a, const CknnaModelState& b) { return cknna_pair(a, b, opts); });
    } else {
      fill_symmetric<CkaModelState>(
          out, m, [&](std::size_t i) { return cka_prepare(*view[i], params.centering); },
          [&](const CkaModelState& a, const CkaModelState& b) { return cka_pair(a, b); });
    }
  } else if (metric == MetricKind::dcor) {
    DcorOptions opts{params.sqrt_dcor};
    fill_symmetric<DcorPrep>(
        out, m, [&](std::size_t i) { return dcor_prepare(sets[i]); },
        [&](const DcorPrep& a, const DcorPrep& b) { return dcor_pair(a, b, opts); });
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j) {
        try {
          const auto pair = information_imbalance(sets[i], sets[j], params.k, params.rank_distance);
          out.at(i, j) = pair.forward;
          out.at(j, i) = i == j ? pair.forward : pair.backward;
        } catch (const degenerate_input_error& e) {
          mark_missing(out, i, j, e.what());
          if (i != j) mark_missing(out, j, i, e.what());
        }
      }
    }
  }

  bool any_valid = false;
  for (const double v : out.values) {
    if (!std::isnan(v)) {
      any_valid = true;
      break;
    }
  }
  if (!any_valid) throw data_error("every matrix cell is missing; no model survived preparation");
  return out;
}

GroupSpec load_group_spec(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto lines = detail::split_lines(text);
  GroupSpec spec;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (const auto line : lines) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::csv_split(line, line_no, path.string());
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "model" || fields[1] != "group") {
        throw data_error(path.string() + ": expected a 'model,group' header");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": expected 2 fields");
    }
    const std::string& model = fields[0];
    const std::string& group = fields[1];
    if (model.empty() || group.empty()) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": empty model or group");
    }
    if (spec.model_to_group.count(model)) {
      throw data_error(path.string() + ": model '" + model + "' listed twice");
    }
    spec.model_to_group[model] = group;
    if (std::find(spec.group_order.begin(), spec.group_order.end(), group) == spec.group_order.end()) {
      spec.group_order.push_back(group);
    }
  }
  if (spec.model_to_group.empty()) throw data_error(path.string() + ": no group assignments");
  return spec;
}

AlignmentMatrix condense(const AlignmentMatrix& matrix, const GroupSpec& groups) {
  for (const auto& name : matrix.model_names) {
    if (!groups.model_to_group.count(name)) {
      throw std::invalid_argument("model '" + name + "' has no group assignment");
    }
  }
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> members;
  for (const auto& group : groups.group_order) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < matrix.m; ++i) {
      if (groups.model_to_group.at(matrix.model_names[i]) == group) idx.push_back(i);
    }
    if (!idx.empty()) {
      labels.push_back(group);
      members.push_back(std::move(idx));
    }
  }
  AlignmentMatrix out;
  out.model_names = labels;
  out.m = labels.size();
  out.metric = matrix.metric;
  out.params = matrix.params;
  out.params["condensed"] = "true";
  out.symmetric = matrix.symmetric;
  out.values.assign(out.m * out.m, kNaN);
  for (std::size_t gi = 0; gi < out.m; ++gi) {
    for (std::size_t gj = 0; gj < out.m; ++gj) {
      double acc = 0.0;
      std::size_t count = 0;
      for (const std::size_t i : members[gi]) {
        for (const std::size_t j : members[gj]) {
          const double v = matrix.at(i, j);
          if (!std::isnan(v)) {
            acc += v;
            ++count;
          }
        }
      }
      if (count == 0) {
        mark_missing(out, gi, gj, "no valid cells in block (" + labels[gi] + ", " + labels[gj] + ")");
      } else {
        out.at(gi, gj) = acc / static_cast<double>(count);
      }
    }
  }
  // A group counts as baseline only if every member is one.
  for (std::size_t gi = 0; gi < out.m; ++gi) {
    bool all_baseline = true;
    for (const std::size_t i : members[gi]) {
      if (std::find(matrix.baselines.begin(), matrix.baselines.end(), matrix.model_names[i]) ==
          matrix.baselines.end()) {
        all_baseline = false;
        break;
      }
    }
    if (all_baseline) out.baselines.push_back(labels[gi]);
  }
  return out;
}

std::map<std::string, PerformanceEntry> load_performance(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto lines = detail::split_lines(text);
  std::map<std::string, PerformanceEntry> out;
  bool header_seen = false;
  bool has_size = false;
  std::size_t line_no = 0;
  for (const auto line : lines) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::csv_split(line, line_no, path.string());
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "model" || fields[1] != "performance") {
        throw data_error(path.string() + ": expected a 'model,performance[,size]' header");
      }
      has_size = fields.size() >= 3 && fields[2] == "size";
      header_seen = true;
      continue;
    }
    if (fields.size() < 2) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": expected at least 2 fields");
    }
    PerformanceEntry entry;
    try {
      entry.performance = parse_double(fields[1]);
      if (has_size && fields.size() >= 3 && !fields[2].empty()) entry.size = parse_double(fields[2]);
    } catch (const std::invalid_argument& e) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (out.count(fields[0])) {
      throw data_error(path.string() + ": model '" + fields[0] + "' listed twice");
    }
    out[fields[0]] = entry;
  }
  if (out.empty()) throw data_error(path.string() + ": no performance rows");
  return out;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  auto average_ranks = [n](std::span<const double> v) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&v](std::size_t a, std::size_t b) {
      if (v[a] != v[b]) return v[a] < v[b];
      return a < b;
    });
    std::vector<double> ranks(n);
    std::size_t p = 0;
    while (p < n) {
      std::size_t q = p;
      while (q + 1 < n && v[idx[q + 1]] == v[idx[p]]) ++q;
      const double avg = (static_cast<double>(p) + static_cast<double>(q)) / 2.0 + 1.0;
      for (std::size_t r = p; r <= q; ++r) ranks[idx[r]] = avg;
      p = q + 1;
    }
    return ranks;
  };
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mx, dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

ConvergenceTable convergence_table(const AlignmentMatrix& matrix,
                                   const std::map<std::string, PerformanceEntry>& performance,
                                   const std::string& reference) {
  const auto ref_idx = matrix.index_of(reference);
  if (!ref_idx) throw std::invalid_argument("reference model '" + reference + "' is not in the matrix");
  ConvergenceTable table;
  table.reference = reference;
  std::vector<double> perf_valid, align_valid;
  for (std::size_t i = 0; i < matrix.m; ++i) {
    if (i == *ref_idx) continue;
    const std::string& name = matrix.model_names[i];
    const auto it = performance.find(name);
    if (it == performance.end()) {
      throw std::invalid_argument("no performance value for model '" + name + "'");
    }
    ConvergenceRow row;
    row.model_name = name;
    row.performance = it->second.performance;
    row.size = it->second.size;
    row.alignment = matrix.at(i, *ref_idx);
    if (!std::isnan(row.alignment)) {
      perf_valid.push_back(row.performance);
      align_valid.push_back(row.alignment);
    }
    table.rows.push_back(std::move(row));
  }
  table.spearman_vs_rank = spearman(align_valid, perf_valid);
  return table;
}

}  // namespace repalign
