#pragma once

#include "terrasense/observability.hpp"
#include "terrasense/simulation.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace terrasense::cli {

/// Invalid or unreadable configuration. `line` is 0 when no position applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string source, int line, std::string key);

  const std::string& source() const { return source_; }
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  std::string source_;
  int line_;
  std::string key_;
};

struct ObservabilitySettings {
  /// Empty means a representative moving state on the first path segment.
  Eigen::VectorXd state;
  double input = 0.0;
  /// Measured acceleration channels (indices into z). Empty optional = all.
  std::optional<std::vector<Eigen::Index>> measurement_rows;
  double tolerance = kDefaultRankTolerance;
};

struct SweepSettings {
  SweepAxis axis = SweepAxis::IsoClass;
  std::vector<std::string> values{"B", "D", "F"};
};

struct RunConfig {
  Scenario scenario;
  int runs = 100;
  int threads = 1;
  SweepSettings sweep;
  ObservabilitySettings observability;
  std::filesystem::path output_directory = ".";
  int precision = 9;
};

/// Parses a JSON document. Every key is optional and defaults to the off-road
/// reference scenario (Graneville loam, ISO D, 10 m/s, 10 s). `source` names the
/// document in error messages; relative paths inside it resolve against `base`.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>",
                       const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);

/// Observability state used when the config does not give one.
Eigen::VectorXd default_observability_state(const Scenario& scenario);

}  // namespace terrasense::cli
