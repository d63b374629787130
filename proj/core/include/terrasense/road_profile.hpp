#pragma once

#include "terrasense/terrain_catalog.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace terrasense {

/// ISO 8608 roughness class. `Custom` means the PSD level is given explicitly.
enum class IsoClass { A, B, C, D, E, F, G, Custom };

std::string to_string(IsoClass iso_class);
IsoClass iso_class_from_string(const std::string& name);

/// Displacement PSD at n0 = 0.1 cycles/m, class geometric mean (m^3).
double iso_reference_psd(IsoClass iso_class);

/// One-sided displacement PSD  G_d(n) = G_d(n0) (n / n0)^-w  over a spatial band.
struct ProfileSpec {
  IsoClass iso_class = IsoClass::D;
  double psd_reference = 1024e-6;   // m^3, at reference_frequency
  double reference_frequency = 0.1; // cycles/m
  double waviness_exponent = 2.0;
  double band_min = 0.01;           // cycles/m
  double band_max = 10.0;           // cycles/m
  int components = 2048;
  std::uint64_t seed = 0;

  static ProfileSpec iso(IsoClass iso_class, std::uint64_t seed = 0);

  double psd(double spatial_frequency) const;
  void validate() const;
};

/// Elevation h and its exact time derivative, sampled at t_k = k dt.
struct RoadProfile {
  double dt = 0.0;
  double velocity = 0.0;
  std::vector<double> h;
  std::vector<double> hdot;
  ProfileSpec spec;

  std::size_t size() const { return h.size(); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

/// Number of samples covering [0, duration] at step dt (both ends included).
std::size_t sample_count(double duration, double dt);

/// Sum of 2048 (by default) log-spaced cosines with seeded uniform phases.
/// h(t) = sum_j sqrt(2 G_d(n_j) dn_j) cos(2 pi n_j v t + phi_j); hdot is analytic.
RoadProfile generate_profile(const ProfileSpec& spec, double velocity, double duration, double dt);

struct TerrainSegment {
  TerrainEntry terrain;
  double duration = 0.0;  // s
};

struct TerrainPath {
  std::vector<TerrainSegment> segments;

  double duration() const;
  void validate() const;
};

struct ComposedPath {
  RoadProfile profile;
  std::vector<double> ks_truth;  // N/m, one per sample
  /// First sample index of every segment after the first.
  std::vector<std::size_t> transitions;
};

/// One continuous profile across all segments plus the piecewise-constant
/// true soil stiffness. Segment boundaries snap to the nearest sample.
ComposedPath compose_path(const TerrainPath& path, const ProfileSpec& spec, double velocity,
                          double dt);

/// CSV with header "t,h,hdot".
void write_profile_csv(std::ostream& out, const RoadProfile& profile, int precision = 9);
void write_profile_csv(const std::filesystem::path& path, const RoadProfile& profile,
                       int precision = 9);
/// Reads a "t,h,hdot" CSV. The ProfileSpec is marked Custom; velocity is supplied by the caller.
RoadProfile read_profile_csv(std::istream& in, double velocity = 0.0);
RoadProfile read_profile_csv(const std::filesystem::path& path, double velocity = 0.0);

}  // namespace terrasense
