#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "csv_util.hpp"
#include "repalign/aggregation.hpp"
#include "repalign/errors.hpp"
#include "repalign/text_format.hpp"
#include "repalign/version.hpp"

namespace repalign {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json meta_json(const AlignmentMatrix& m) {
  nlohmann::json meta;
  meta["metric"] = m.metric;
  meta["params"] = m.params;
  meta["symmetric"] = m.symmetric;
  meta["baselines"] = m.baselines;
  nlohmann::json missing = nlohmann::json::array();
  for (const auto& cell : m.missing) {
    missing.push_back({{"i", cell.i}, {"j", cell.j}, {"reason", cell.reason}});
  }
  meta["missing"] = missing;
  return meta;
}

void apply_meta(AlignmentMatrix& m, const nlohmann::json& meta) {
  if (meta.contains("metric")) m.metric = meta["metric"].get<std::string>();
  if (meta.contains("params")) {
    for (const auto& [key, value] : meta["params"].items()) m.params[key] = value.get<std::string>();
  }
  if (meta.contains("symmetric")) m.symmetric = meta["symmetric"].get<bool>();
  if (meta.contains("baselines")) {
    m.baselines = meta["baselines"].get<std::vector<std::string>>();
  }
  if (meta.contains("missing")) {
    m.missing.clear();
    for (const auto& cell : meta["missing"]) {
      m.missing.push_back({cell.at("i").get<std::size_t>(), cell.at("j").get<std::size_t>(),
                           cell.at("reason").get<std::string>()});
    }
  }
}

void save_csv(const AlignmentMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out << "# repalign " << version() << " alignment-matrix " << meta_json(m).dump() << "\n";
  out << "model";
  for (const auto& name : m.model_names) out << ',' << detail::csv_escape(name);
  out << "\n";
  for (std::size_t i = 0; i < m.m; ++i) {
    out << detail::csv_escape(m.model_names[i]);
    for (std::size_t j = 0; j < m.m; ++j) {
      out << ',';
      if (!m.is_missing(i, j)) out << format_double(m.at(i, j));
    }
    out << "\n";
  }
  if (!out) throw data_error("write failed for '" + path.string() + "'");
}

void save_json(const AlignmentMatrix& m, const std::filesystem::path& path) {
  nlohmann::json doc = meta_json(m);
  doc["schema"] = "repalign-alignment-matrix";
  doc["version"] = version();
  doc["models"] = m.model_names;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.m; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.m; ++j) {
      if (m.is_missing(i, j)) {
        row.push_back(nullptr);
      } else {
        row.push_back(m.at(i, j));
      }
    }
    rows.push_back(std::move(row));
  }
  doc["values"] = std::move(rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << "\n";
  if (!out) throw data_error("write failed for '" + path.string() + "'");
}

AlignmentMatrix load_csv_matrix(const std::string& text, const std::string& origin) {
  const auto lines = detail::split_lines(text);
  AlignmentMatrix m;
  bool header_seen = false;
  bool meta_seen = false;
  std::size_t row = 0;
  std::size_t line_no = 0;
  for (const auto line : lines) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto brace = line.find('{');
      if (!meta_seen && line.find("alignment-matrix") != std::string_view::npos &&
          brace != std::string_view::npos) {
        try {
          apply_meta(m, nlohmann::json::parse(line.substr(brace)));
          meta_seen = true;
        } catch (const nlohmann::json::exception& e) {
          throw data_error(origin + ":" + std::to_string(line_no) + ": bad metadata: " + e.what());
        }
      }
      continue;
    }
    auto fields = detail::csv_split(line, line_no, origin);
    if (!header_seen) {
      if (fields.empty() || fields[0] != "model") {
        throw data_error(origin + ": expected a 'model,<names...>' header");
      }
      m.model_names.assign(fields.begin() + 1, fields.end());
      m.m = m.model_names.size();
      if (m.m == 0) throw data_error(origin + ": header lists no models");
      m.values.assign(m.m * m.m, kNaN);
      header_seen = true;
      continue;
    }
    if (row >= m.m) throw data_error(origin + ": more rows than models in the header");
    if (fields.size() != m.m + 1) {
      throw data_error(origin + ":" + std::to_string(line_no) + ": expected " + std::to_string(m.m + 1) +
                       " fields, got " + std::to_string(fields.size()));
    }
    if (fields[0] != m.model_names[row]) {
      throw data_error(origin + ":" + std::to_string(line_no) + ": row label '" + fields[0] +
                       "' does not match header order ('" + m.model_names[row] + "')");
    }
    for (std::size_t j = 0; j < m.m; ++j) {
      const std::string& cell = fields[j + 1];
      if (cell.empty()) continue;
      try {
        m.at(row, j) = parse_double(cell);
      } catch (const std::invalid_argument&) {
        throw data_error(origin + ":" + std::to_string(line_no) + ": unparseable cell '" + cell + "'");
      }
    }
    ++row;
  }
  if (!header_seen) throw data_error(origin + ": no matrix header found");
  if (row != m.m) {
    throw data_error(origin + ": expected " + std::to_string(m.m) + " rows, got " + std::to_string(row));
  }
  if (!meta_seen) {
    for (std::size_t i = 0; i < m.m; ++i) {
      for (std::size_t j = 0; j < m.m; ++j) {
        if (m.is_missing(i, j)) m.missing.push_back({i, j, "missing value in file"});
      }
    }
  }
  return m;
}

AlignmentMatrix load_json_matrix(const std::string& text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(origin + ": invalid JSON: " + e.what());
  }
  AlignmentMatrix m;
  try {
    m.model_names = doc.at("models").get<std::vector<std::string>>();
    m.m = m.model_names.size();
    if (m.m == 0) throw data_error(origin + ": empty model list");
    m.values.assign(m.m * m.m, kNaN);
    const auto& rows = doc.at("values");
    if (rows.size() != m.m) throw data_error(origin + ": value row count mismatch");
    for (std::size_t i = 0; i < m.m; ++i) {
      if (rows[i].size() != m.m) throw data_error(origin + ": value column count mismatch");
      for (std::size_t j = 0; j < m.m; ++j) {
        if (!rows[i][j].is_null()) m.at(i, j) = rows[i][j].get<double>();
      }
    }
    apply_meta(m, doc);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(origin + ": bad matrix document: " + e.what());
  }
  return m;
}

}  // namespace

void save_matrix(const AlignmentMatrix& matrix, const std::filesystem::path& path,
                 std::string_view format) {
  if (matrix.m == 0 || matrix.model_names.size() != matrix.m ||
      matrix.values.size() != matrix.m * matrix.m) {
    throw std::invalid_argument("refusing to save a malformed matrix");
  }
  if (format == "csv") {
    save_csv(matrix, path);
  } else if (format == "json") {
    save_json(matrix, path);
  } else {
    throw std::invalid_argument("unknown matrix format '" + std::string(format) +
                                "' (expected csv or json)");
  }
}

AlignmentMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = std::move(buf).str();
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw data_error(path.string() + ": empty file");
  if (text[first] == '{') return load_json_matrix(text, path.string());
  return load_csv_matrix(text, path.string());
}

}  // namespace repalign
