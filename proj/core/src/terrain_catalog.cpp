#include "terrasense/terrain_catalog.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace terrasense {

namespace {

bool iequals(const std::string& a, const std::string& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

}  // namespace

TerrainCatalog::TerrainCatalog(std::vector<TerrainEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!(e.equivalent_stiffness > 0.0)) {
      throw std::invalid_argument("terrain '" + e.name + "' has non-positive stiffness");
    }
  }
}

TerrainCatalog TerrainCatalog::builtin() {
  return TerrainCatalog({
      {"Upland sandy loam", 218.1e3},
      {"LETE sand", 2283.0e3},
      {"Rubicon sandy loam", 272.1e3},
      {"North Gower clayey loam", 221.9e3},
      {"Graneville loam", 651.1e3},
      {"Lunar Regolith", 28.487e3},
  });
}

TerrainCatalog TerrainCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open terrain catalog " + path.string());
  const auto doc = nlohmann::json::parse(in);
  std::vector<TerrainEntry> entries;
  for (const auto& item : doc.at("terrains")) {
    entries.push_back({item.at("name").get<std::string>(),
                       item.at("equivalent_stiffness").get<double>()});
  }
  return TerrainCatalog(std::move(entries));
}

const TerrainEntry& TerrainCatalog::find(const std::string& name) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const TerrainEntry& e) { return iequals(e.name, name); });
  if (it == entries_.end()) throw std::out_of_range("unknown terrain '" + name + "'");
  return *it;
}

bool TerrainCatalog::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const TerrainEntry& e) { return iequals(e.name, name); });
}

}  // namespace terrasense
