#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace repalign {

struct ManifestEntry {
  std::string name;
  std::filesystem::path path;  // resolved against the manifest's directory
  bool baseline = false;
  std::string group;  // optional
};

// JSON: {"models": [{"name", "path", "baseline"?, "group"?}, ...],
//        "provenance"?: {...}}. Unknown keys are ignored on load.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
void save_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path,
                   const std::map<std::string, std::string>& provenance = {});

}  // namespace repalign
