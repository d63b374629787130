#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace terrasense {

struct TerrainEntry {
  std::string name;
  double equivalent_stiffness = 0.0;  // N/m
};

/// Named soil stiffness values. Lookup is case-insensitive.
class TerrainCatalog {
 public:
  TerrainCatalog() = default;
  explicit TerrainCatalog(std::vector<TerrainEntry> entries);

  /// Built-in table, identical to data/terrains.json.
  static TerrainCatalog builtin();
  /// Reads {"terrains": [{"name": ..., "equivalent_stiffness": ...}]} in N/m.
  static TerrainCatalog load(const std::filesystem::path& path);

  const TerrainEntry& find(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<TerrainEntry>& entries() const { return entries_; }

 private:
  std::vector<TerrainEntry> entries_;
};

}  // namespace terrasense
