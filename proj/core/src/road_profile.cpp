#include "terrasense/road_profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace terrasense {

namespace {

constexpr const char* kIsoNames[] = {"A", "B", "C", "D", "E", "F", "G", "custom"};

// Phasors are re-seeded from exact cos/sin this often to bound recurrence drift.
constexpr std::size_t kReanchorInterval = 256;

}  // namespace

std::string to_string(IsoClass iso_class) { return kIsoNames[static_cast<int>(iso_class)]; }

IsoClass iso_class_from_string(const std::string& name) {
  for (int i = 0; i < 8; ++i) {
    std::string candidate = kIsoNames[i];
    if (name == candidate) return static_cast<IsoClass>(i);
    if (name.size() == 1 && candidate.size() == 1 &&
        std::toupper(static_cast<unsigned char>(name[0])) == candidate[0]) {
      return static_cast<IsoClass>(i);
    }
  }
  throw std::invalid_argument("unknown ISO class '" + name + "'");
}

double iso_reference_psd(IsoClass iso_class) {
  if (iso_class == IsoClass::Custom) {
    throw std::invalid_argument("custom profile class has no reference PSD");
  }
  // 16e-6 m^3 for class A, x4 per class.
  return 16e-6 * std::pow(4.0, static_cast<int>(iso_class));
}

ProfileSpec ProfileSpec::iso(IsoClass iso_class, std::uint64_t seed) {
  ProfileSpec spec;
  spec.iso_class = iso_class;
  spec.psd_reference = iso_reference_psd(iso_class);
  spec.seed = seed;
  return spec;
}

double ProfileSpec::psd(double n) const {
  return psd_reference * std::pow(n / reference_frequency, -waviness_exponent);
}

void ProfileSpec::validate() const {
  if (!(psd_reference >= 0.0) || !std::isfinite(psd_reference)) {
    throw std::domain_error("psd_reference must be non-negative");
  }
  if (!(reference_frequency > 0.0)) throw std::domain_error("reference_frequency must be positive");
  if (!(band_min > 0.0) || !(band_min < band_max) || !std::isfinite(band_max)) {
    throw std::domain_error("spatial band must satisfy 0 < n_min < n_max");
  }
  if (components < 1) throw std::domain_error("components must be at least 1");
}

std::size_t sample_count(double duration, double dt) {
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
  if (!(duration >= dt * (1.0 - 1e-9))) throw std::domain_error("duration must be at least dt");
  return static_cast<std::size_t>(std::llround(duration / dt)) + 1;
}

RoadProfile generate_profile(const ProfileSpec& spec, double velocity, double duration,
                             double dt) {
  spec.validate();
  if (!(velocity >= 0.0)) throw std::domain_error("velocity must be non-negative");
  const std::size_t n_samples = sample_count(duration, dt);

  RoadProfile profile;
  profile.dt = dt;
  profile.velocity = velocity;
  profile.spec = spec;
  profile.h.assign(n_samples, 0.0);
  profile.hdot.assign(n_samples, 0.0);

  const auto m = static_cast<std::size_t>(spec.components);
  std::vector<double> amplitude(m), omega(m), phase(m);

  // Log-spaced bin edges; each component sits at the geometric centre of its bin.
  const double log_lo = std::log(spec.band_min);
  const double log_step = (std::log(spec.band_max) - log_lo) / static_cast<double>(m);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < m; ++j) {
    const double lo = std::exp(log_lo + log_step * static_cast<double>(j));
    const double hi = std::exp(log_lo + log_step * static_cast<double>(j + 1));
    const double n = std::sqrt(lo * hi);
    amplitude[j] = std::sqrt(2.0 * spec.psd(n) * (hi - lo));
    omega[j] = 2.0 * std::numbers::pi * n * velocity;
    phase[j] = uniform(rng);
  }
  if (spec.psd_reference == 0.0) return profile;

  // Rotating phasors: p_j(t_k) = exp(i (omega_j t_k + phi_j)).
  std::vector<double> re(m), im(m), rot_re(m), rot_im(m);
  for (std::size_t j = 0; j < m; ++j) {
    rot_re[j] = std::cos(omega[j] * dt);
    rot_im[j] = std::sin(omega[j] * dt);
  }
  for (std::size_t k = 0; k < n_samples; ++k) {
    if (k % kReanchorInterval == 0) {
      const double t = static_cast<double>(k) * dt;
      for (std::size_t j = 0; j < m; ++j) {
        const double arg = omega[j] * t + phase[j];
        re[j] = std::cos(arg);
        im[j] = std::sin(arg);
      }
    }
    double h = 0.0;
    double hdot = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      h += amplitude[j] * re[j];
      hdot -= amplitude[j] * omega[j] * im[j];
      const double r = re[j] * rot_re[j] - im[j] * rot_im[j];
      im[j] = re[j] * rot_im[j] + im[j] * rot_re[j];
      re[j] = r;
    }
    profile.h[k] = h;
    profile.hdot[k] = hdot;
  }
  return profile;
}

double TerrainPath::duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

void TerrainPath::validate() const {
  if (segments.empty()) throw std::domain_error("terrain path needs at least one segment");
  for (const auto& s : segments) {
    if (!(s.duration > 0.0)) throw std::domain_error("segment durations must be positive");
    if (!(s.terrain.equivalent_stiffness > 0.0)) {
      throw std::domain_error("segment stiffness must be positive");
    }
  }
}

ComposedPath compose_path(const TerrainPath& path, const ProfileSpec& spec, double velocity,
                          double dt) {
  path.validate();
  ComposedPath out;
  out.profile = generate_profile(spec, velocity, path.duration(), dt);
  const std::size_t n = out.profile.size();
  out.ks_truth.assign(n, path.segments.back().terrain.equivalent_stiffness);

  double elapsed = 0.0;
  std::size_t begin = 0;
  for (std::size_t s = 0; s < path.segments.size(); ++s) {
    elapsed += path.segments[s].duration;
    const std::size_t end = s + 1 == path.segments.size()
                                ? n
                                : std::min(n, static_cast<std::size_t>(std::llround(elapsed / dt)));
    std::fill(out.ks_truth.begin() + static_cast<std::ptrdiff_t>(begin),
              out.ks_truth.begin() + static_cast<std::ptrdiff_t>(std::max(begin, end)),
              path.segments[s].terrain.equivalent_stiffness);
    if (s > 0) out.transitions.push_back(begin);
    begin = std::max(begin, end);
  }
  return out;
}

void write_profile_csv(std::ostream& out, const RoadProfile& profile, int precision) {
  out << "t,h,hdot\n" << std::setprecision(precision);
  for (std::size_t k = 0; k < profile.size(); ++k) {
    out << profile.time(k) << ',' << profile.h[k] << ',' << profile.hdot[k] << '\n';
  }
}

void write_profile_csv(const std::filesystem::path& path, const RoadProfile& profile,
                       int precision) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_profile_csv(out, profile, precision);
}

RoadProfile read_profile_csv(std::istream& in, double velocity) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,h,hdot", 0) != 0) {
    throw std::runtime_error("profile CSV must start with header t,h,hdot");
  }
  RoadProfile profile;
  profile.velocity = velocity;
  profile.spec.iso_class = IsoClass::Custom;
  std::vector<double> t;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    double values[3];
    char sep = 0;
    if (!(row >> values[0] >> sep >> values[1] >> sep >> values[2])) {
      throw std::runtime_error("malformed profile CSV at line " + std::to_string(line_no));
    }
    t.push_back(values[0]);
    profile.h.push_back(values[1]);
    profile.hdot.push_back(values[2]);
  }
  if (t.size() < 2) throw std::runtime_error("profile CSV needs at least two samples");
  profile.dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  return profile;
}

RoadProfile read_profile_csv(const std::filesystem::path& path, double velocity) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_profile_csv(in, velocity);
}

}  // namespace terrasense
