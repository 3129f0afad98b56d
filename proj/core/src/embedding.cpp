#include "repalign/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "repalign/errors.hpp"
#include "repalign/rng.hpp"
#include "repalign/text_format.hpp"
#include "repalign/version.hpp"

static_assert(std::endian::native == std::endian::little, "EMB I/O assumes a little-endian host");

namespace repalign {

namespace {

void check_finite(const EmbeddingSet& set, const std::string& origin) {
  for (std::size_t i = 0; i < set.n_items; ++i) {
    const auto row = set.row(i);
    for (std::size_t j = 0; j < set.dim; ++j) {
      if (!std::isfinite(row[j])) {
        throw data_error(origin + ": non-finite value at row " + std::to_string(i) + ", column " +
                         std::to_string(j));
      }
    }
  }
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

EmbeddingSet load_csv(const std::filesystem::path& path) {
  const std::string text = read_file_bytes(path);
  std::vector<double> values;
  std::size_t dim = 0, n_rows = 0, line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (pos > text.size()) break;
      continue;
    }
    std::size_t fields = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      const std::string_view token =
          line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      try {
        values.push_back(parse_double(token));
      } catch (const std::invalid_argument&) {
        throw data_error(path.string() + ":" + std::to_string(line_no) + ": unparseable field '" +
                         std::string(token) + "'");
      }
      ++fields;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (n_rows == 0) {
      dim = fields;
    } else if (fields != dim) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": ragged row, expected " +
                       std::to_string(dim) + " fields, got " + std::to_string(fields));
    }
    ++n_rows;
    if (pos > text.size()) break;
  }
  if (n_rows == 0) throw data_error(path.string() + ": no data rows");
  EmbeddingSet set;
  set.model_name = path.stem().string();
  set.n_items = n_rows;
  set.dim = dim;
  set.values = std::move(values);
  check_finite(set, path.string());
  return set;
}

constexpr char kEmbMagic[4] = {'E', 'M', 'B', '1'};

EmbeddingSet load_emb(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kEmbMagic, 4) != 0) {
    throw data_error(path.string() + ": not an EMB1 file (bad magic)");
  }
  std::uint32_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 4, 4);
  if (bytes.size() < 8 + static_cast<std::size_t>(header_len)) {
    throw data_error(path.string() + ": truncated header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path.string() + ": invalid JSON header: " + e.what());
  }
  std::string name, dtype, order;
  std::uint64_t n = 0, d = 0;
  try {
    name = header.at("name").get<std::string>();
    n = header.at("n").get<std::uint64_t>();
    d = header.at("d").get<std::uint64_t>();
    dtype = header.at("dtype").get<std::string>();
    order = header.at("order").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path.string() + ": missing or mistyped header field: " + e.what());
  }
  if (order != "row-major") throw data_error(path.string() + ": unsupported order '" + order + "'");
  std::size_t value_size = 0;
  if (dtype == "f32") {
    value_size = 4;
  } else if (dtype == "f64") {
    value_size = 8;
  } else {
    throw data_error(path.string() + ": unsupported dtype '" + dtype + "'");
  }
  const std::size_t count = static_cast<std::size_t>(n) * static_cast<std::size_t>(d);
  const std::size_t expected = 8 + header_len + count * value_size;
  if (bytes.size() != expected) {
    throw data_error(path.string() + ": payload size mismatch, expected " + std::to_string(expected) +
                     " bytes, file has " + std::to_string(bytes.size()));
  }
  std::vector<double> values(count);
  const char* payload = bytes.data() + 8 + header_len;
  if (dtype == "f32") {
    for (std::size_t i = 0; i < count; ++i) {
      float v = 0.0f;
      std::memcpy(&v, payload + i * 4, 4);
      values[i] = static_cast<double>(v);
    }
  } else {
    std::memcpy(values.data(), payload, count * 8);
  }
  EmbeddingSet set;
  set.model_name = std::move(name);
  set.n_items = static_cast<std::size_t>(n);
  set.dim = static_cast<std::size_t>(d);
  if (set.n_items == 0 || set.dim == 0) throw data_error(path.string() + ": empty embedding set");
  set.values = std::move(values);
  check_finite(set, path.string());
  return set;
}

void save_csv(const EmbeddingSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out << "# repalign " << version() << " embeddings model=" << set.model_name << " n=" << set.n_items
      << " d=" << set.dim << "\n";
  std::string line;
  for (std::size_t i = 0; i < set.n_items; ++i) {
    line.clear();
    const auto row = set.row(i);
    for (std::size_t j = 0; j < set.dim; ++j) {
      if (j) line += ',';
      line += format_double(row[j]);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw data_error("write failed for '" + path.string() + "'");
}

void save_emb(const EmbeddingSet& set, const std::filesystem::path& path) {
  nlohmann::json header;
  header["name"] = set.model_name;
  header["n"] = set.n_items;
  header["d"] = set.dim;
  header["dtype"] = "f64";
  header["order"] = "row-major";
  header["tool"] = std::string("repalign ") + version();
  const std::string header_bytes = header.dump();
  if (header_bytes.size() > 0xFFFFFFFFull) throw std::invalid_argument("EMB header too large");
  const std::uint32_t header_len = static_cast<std::uint32_t>(header_bytes.size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out.write(kEmbMagic, 4);
  out.write(reinterpret_cast<const char*>(&header_len), 4);
  out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
  out.write(reinterpret_cast<const char*>(set.values.data()),
            static_cast<std::streamsize>(set.values.size() * sizeof(double)));
  if (!out) throw data_error("write failed for '" + path.string() + "'");
}

}  // namespace

EmbeddingSet make_embedding_set(std::string model_name, std::size_t n_items, std::size_t dim,
                                std::vector<double> values) {
  if (n_items == 0 || dim == 0) {
    throw std::invalid_argument("embedding set '" + model_name + "' must have n_items >= 1 and dim >= 1");
  }
  if (values.size() != n_items * dim) {
    throw std::invalid_argument("embedding set '" + model_name + "': expected " +
                                std::to_string(n_items * dim) + " values, got " +
                                std::to_string(values.size()));
  }
  EmbeddingSet set;
  set.model_name = std::move(model_name);
  set.n_items = n_items;
  set.dim = dim;
  set.values = std::move(values);
  check_finite(set, set.model_name);
  return set;
}

EmbeddingFormat parse_embedding_format(std::string_view name) {
  if (name == "csv") return EmbeddingFormat::csv;
  if (name == "emb") return EmbeddingFormat::emb;
  throw std::invalid_argument("unknown embedding format '" + std::string(name) + "' (expected csv or emb)");
}

EmbeddingFormat embedding_format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".emb" ? EmbeddingFormat::emb : EmbeddingFormat::csv;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  return format == EmbeddingFormat::emb ? load_emb(path) : load_csv(path);
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  return load_embeddings(path, embedding_format_for_path(path));
}

void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path, EmbeddingFormat format) {
  if (set.n_items == 0 || set.dim == 0) throw std::invalid_argument("refusing to save an empty embedding set");
  if (format == EmbeddingFormat::emb) {
    save_emb(set, path);
  } else {
    save_csv(set, path);
  }
}

NormalizeResult normalize_rows(EmbeddingSet set) {
  NormalizeResult out;
  for (std::size_t i = 0; i < set.n_items; ++i) {
    auto row = set.row(i);
    double max_abs = 0.0;
    for (const double v : row) max_abs = std::max(max_abs, std::fabs(v));
    if (max_abs == 0.0) {
      ++out.zero_rows;
      continue;
    }
    if (max_abs != 1.0) {
      for (double& v : row) v /= max_abs;
    }
  }
  set.normalized = true;
  out.set = std::move(set);
  return out;
}

std::vector<std::size_t> subsample_indices(std::size_t n_items, std::size_t n, std::uint64_t seed) {
  if (n > n_items) {
    throw std::invalid_argument("subsample size " + std::to_string(n) + " exceeds item count " +
                                std::to_string(n_items));
  }
  std::vector<std::size_t> perm(n_items);
  for (std::size_t i = 0; i < n_items; ++i) perm[i] = i;
  Xoshiro256StarStar rng(seed);
  // Partial Fisher-Yates: only the first n slots are needed.
  for (std::size_t i = 0; i + 1 < n_items && i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n_items - i));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(n);
  return perm;
}

EmbeddingSet subsample(const EmbeddingSet& set, std::size_t n, std::uint64_t seed) {
  const auto idx = subsample_indices(set.n_items, n, seed);
  EmbeddingSet out;
  out.model_name = set.model_name;
  out.n_items = n;
  out.dim = set.dim;
  out.normalized = set.normalized;
  out.baseline = set.baseline;
  out.values.resize(n * set.dim);
  for (std::size_t r = 0; r < n; ++r) {
    const auto src = set.row(idx[r]);
    std::copy(src.begin(), src.end(), out.values.begin() + static_cast<std::ptrdiff_t>(r * set.dim));
  }
  if (!set.item_ids.empty()) {
    out.item_ids.resize(n);
    for (std::size_t r = 0; r < n; ++r) out.item_ids[r] = set.item_ids[idx[r]];
  }
  return out;
}

void require_aligned(const EmbeddingSet& f, const EmbeddingSet& g) {
  if (f.n_items != g.n_items) {
    throw std::invalid_argument("item counts differ: '" + f.model_name + "' has " +
                                std::to_string(f.n_items) + ", '" + g.model_name + "' has " +
                                std::to_string(g.n_items));
  }
  if (!f.item_ids.empty() && !g.item_ids.empty()) {
    for (std::size_t i = 0; i < f.n_items; ++i) {
      if (f.item_ids[i] != g.item_ids[i]) {
        throw std::invalid_argument("item id mismatch at row " + std::to_string(i) + ": '" +
                                    f.item_ids[i] + "' vs '" + g.item_ids[i] + "'");
      }
    }
  }
}

}  // namespace repalign
