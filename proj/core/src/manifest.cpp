#include "repalign/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "repalign/errors.hpp"

namespace repalign {

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.contains("models") || !doc["models"].is_array()) {
    throw data_error(path.string() + ": expected a top-level 'models' array");
  }
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::vector<ManifestEntry> entries;
  for (const auto& item : doc["models"]) {
    ManifestEntry entry;
    try {
      entry.name = item.at("name").get<std::string>();
      std::filesystem::path p = item.at("path").get<std::string>();
      entry.path = p.is_absolute() ? p : base / p;
      if (item.contains("baseline")) entry.baseline = item["baseline"].get<bool>();
      if (item.contains("group")) entry.group = item["group"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw data_error(path.string() + ": bad manifest entry: " + e.what());
    }
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) throw data_error(path.string() + ": manifest lists no models");
  return entries;
}

void save_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path,
                   const std::map<std::string, std::string>& provenance) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& entry : entries) {
    nlohmann::json item;
    item["name"] = entry.name;
    item["path"] = entry.path.generic_string();
    if (entry.baseline) item["baseline"] = true;
    if (!entry.group.empty()) item["group"] = entry.group;
    models.push_back(std::move(item));
  }
  nlohmann::json doc;
  doc["models"] = std::move(models);
  if (!provenance.empty()) doc["provenance"] = provenance;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << "\n";
  if (!out) throw data_error("write failed for '" + path.string() + "'");
}

}  // namespace repalign
