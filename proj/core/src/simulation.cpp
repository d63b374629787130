#include "terrasense/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <mutex>
#include <thread>

namespace terrasense {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Measurement and process noise draw from a stream independent of the road phases.
std::mt19937_64 noise_stream(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x6e6f6973u};
  return std::mt19937_64(seq);
}

Eigen::VectorXd standard_normal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

std::string to_string(InitialGuessPolicy policy) {
  return policy == InitialGuessPolicy::HalfTireSoil ? "half_tire_soil" : "half_tire_combined";
}

InitialGuessPolicy initial_guess_policy_from_string(const std::string& name) {
  if (name == "half_tire_soil") return InitialGuessPolicy::HalfTireSoil;
  if (name == "half_tire_combined") return InitialGuessPolicy::HalfTireCombined;
  throw std::invalid_argument("unknown initial guess policy '" + name + "'");
}

Eigen::VectorXd default_initial_variances(const VehicleParams& params) {
  if (params.model_order == ModelOrder::TwoDof) {
    return Eigen::Vector<double, 5>(1e-4, 1e-2, 1e-4, 1e-2, 1e9);
  }
  const double ratio = params.series_stiffness() / VehicleParams::offroad_reference().tire_stiffness;
  return Eigen::Vector3d(1e-4, 1e-2, 1e9 * ratio * ratio);
}

void Scenario::validate() const {
  vehicle.validate();
  path.validate();
  profile.validate();
  noise.validate(vehicle.state_dim(), vehicle.measurement_dim());
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(duration() >= dt)) throw std::invalid_argument("duration must be at least dt");
  if (!(velocity >= 0.0)) throw std::invalid_argument("velocity must be non-negative");
  if (initial_variances.size() != 0 && initial_variances.size() != vehicle.state_dim()) {
    throw std::invalid_argument("initial covariance has the wrong dimension");
  }
  if (!(rmse_window > 0.0)) throw std::invalid_argument("rmse window must be positive");
  if (taylor_order < 1) throw std::invalid_argument("taylor order must be at least 1");
}

Eigen::VectorXd Scenario::initial_mean() const {
  const double kt = vehicle.series_stiffness();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(vehicle.state_dim());
  mean(mean.size() - 1) = initial_guess == InitialGuessPolicy::HalfTireSoil
                              ? combined_stiffness(0.5 * kt, kt)
                              : 0.5 * kt;
  return mean;
}

Eigen::VectorXd Scenario::initial_covariance_diagonal() const {
  return initial_variances.size() == 0 ? default_initial_variances(vehicle) : initial_variances;
}

Scenario Scenario::offroad(const TerrainEntry& terrain, IsoClass iso_class, double velocity,
                           double duration, std::uint64_t seed) {
  Scenario s;
  s.path.segments = {{terrain, duration}};
  s.profile = ProfileSpec::iso(iso_class, seed);
  s.velocity = velocity;
  s.seed = seed;
  return s;
}

Scenario Scenario::lunar(IsoClass iso_class, double velocity, double duration,
                         std::uint64_t seed) {
  Scenario s;
  s.vehicle = VehicleParams::lunar_roving_vehicle();
  s.noise = NoiseConfig::reference(ModelOrder::OneDofLRV);
  s.path.segments = {{TerrainCatalog::builtin().find("Lunar Regolith"), duration}};
  s.profile = ProfileSpec::iso(iso_class, seed);
  s.velocity = velocity;
  s.seed = seed;
  return s;
}

TruthTrajectory simulate_truth(const Scenario& scenario) {
  scenario.validate();
  ProfileSpec spec = scenario.profile;
  spec.seed = scenario.seed;

  TruthTrajectory truth;
  truth.path = compose_path(scenario.path, spec, scenario.velocity, scenario.dt);
  const std::size_t N = truth.size();
  const VehicleParams& vp = scenario.vehicle;
  const Eigen::Index n = vp.state_dim();
  const Eigen::Index p = vp.measurement_dim();
  const double kt = vp.series_stiffness();
  const VehicleFilterModel model(vp, scenario.noise, scenario.dt, scenario.taylor_order);
  const Eigen::MatrixXd r_factor = model.measurement_noise_factor();
  const auto& hdot = truth.path.profile.hdot;

  truth.ktot_truth.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    truth.ktot_truth[k] = combined_stiffness(truth.path.ks_truth[k], kt);
  }
  truth.states.resize(static_cast<Eigen::Index>(N), n);
  truth.measurements.resize(static_cast<Eigen::Index>(N), p);
  auto rng = noise_stream(scenario.seed);

  // The vehicle starts at rest on the profile: zero deflections and velocities.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(n - 1) = truth.ktot_truth[0];
  for (std::size_t k = 0; k < N; ++k) {
    if (k > 0) {
      const Eigen::VectorXd w = model.process_noise_factor(x) * standard_normal(n, rng);
      x = model.propagate(x, hdot[k - 1]) + w;
      x(n - 1) = truth.ktot_truth[k];
      if (!x.allFinite()) {
        throw std::runtime_error("truth trajectory became non-finite at sample " +
                                 std::to_string(k));
      }
    }
    const auto row = static_cast<Eigen::Index>(k);
    truth.states.row(row) = x.transpose();
    truth.measurements.row(row) =
        (model.observe(x, hdot[k]) + r_factor * standard_normal(p, rng)).transpose();
  }
  return truth;
}

double soil_stiffness_estimate(double ktot, double series_stiffness) {
  if (!std::isfinite(ktot) || !(ktot > 0.0)) return kNaN;
  if (ktot >= series_stiffness) return kInf;
  return soil_stiffness_from_combined(ktot, series_stiffness);
}

EstimationResult estimate_on(const Scenario& scenario, const TruthTrajectory& truth) {
  const VehicleParams& vp = scenario.vehicle;
  const Eigen::Index n = vp.state_dim();
  const double kt = vp.series_stiffness();
  const std::size_t N = truth.size();
  const auto& hdot = truth.path.profile.hdot;
  const VehicleFilterModel model(vp, scenario.noise, scenario.dt, scenario.taylor_order,
                                 scenario.ekf_measurement_jacobian);
  auto filter = make_estimator(scenario.filter, model, scenario.initial_mean(),
                               scenario.initial_covariance_diagonal());

  EstimationResult r;
  r.t.resize(N);
  r.ks_true = truth.path.ks_truth;
  r.ks_est.assign(N, kNaN);
  r.rel_error_pct.assign(N, kNaN);
  r.state_true = truth.states;
  r.state_est = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(N), n, kNaN);

  for (std::size_t k = 0; k < N; ++k) {
    r.t[k] = truth.path.profile.time(k);
    const Eigen::VectorXd z = truth.measurements.row(static_cast<Eigen::Index>(k)).transpose();
    try {
      if (k > 0) filter->step(hdot[k - 1], z, hdot[k]);
    } catch (const DivergenceError&) {
      r.diverged = true;
    }
    const Eigen::VectorXd mean = filter->mean();
    if (!r.diverged && (!mean.allFinite() || std::abs(mean(n - 1)) > 10.0 * kt)) {
      r.diverged = true;
    }
    if (r.diverged) {
      r.divergence_time_s = r.t[k];
      for (std::size_t j = k; j < N; ++j) r.t[j] = truth.path.profile.time(j);
      break;
    }
    const auto row = static_cast<Eigen::Index>(k);
    r.state_est.row(row) = mean.transpose();
    r.ks_est[k] = soil_stiffness_estimate(mean(n - 1), kt);
    r.rel_error_pct[k] = 100.0 * (r.ks_est[k] - r.ks_true[k]) / r.ks_true[k];
  }

  r.rmse_pct = r.diverged ? kInf : rmse_pct(r.rel_error_pct, r.t, scenario.rmse_window);
  if (!r.diverged) {
    r.adaptation_window_s =
        adaptation_window(r.rel_error_pct, r.t, scenario.adaptation_threshold_pct);
  }
  return r;
}

EstimationResult run_estimation(const Scenario& scenario) {
  return estimate_on(scenario, simulate_truth(scenario));
}

std::optional<double> adaptation_window(std::span<const double> rel_error_pct,
                                        std::span<const double> t, double threshold_pct) {
  if (rel_error_pct.empty() || t.empty()) throw std::domain_error("empty error series");
  if (rel_error_pct.size() != t.size()) throw std::invalid_argument("arrays are not aligned");
  std::size_t first = rel_error_pct.size();
  while (first > 0 && std::abs(rel_error_pct[first - 1]) < threshold_pct) --first;
  if (first == rel_error_pct.size()) return std::nullopt;
  return t[first];
}

double rmse_pct(std::span<const double> rel_error_pct, std::span<const double> t, double window) {
  if (rel_error_pct.empty() || rel_error_pct.size() != t.size()) {
    throw std::invalid_argument("error and time arrays must be non-empty and aligned");
  }
  // The window covers the outputs produced during (t0, t0 + window]; the first
  // sample is the prior and counts only when it is the sole sample.
  const double limit = t.front() + window + 1e-9;
  const std::size_t first = t.size() > 1 ? 1 : 0;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = first; k < t.size() && t[k] <= limit; ++k) {
    if (!std::isfinite(rel_error_pct[k])) return kInf;
    sum += rel_error_pct[k] * rel_error_pct[k];
    ++count;
  }
  return std::sqrt(sum / static_cast<double>(count));
}

RunSummary summarize(const EstimationResult& result, std::uint64_t seed) {
  return RunSummary{seed, result.rmse_pct, result.adaptation_window_s, result.diverged};
}

MonteCarloStats aggregate(std::vector<RunSummary> runs) {
  MonteCarloStats stats;
  std::vector<double> rmse;
  std::vector<double> windows;
  for (const auto& run : runs) {
    if (run.diverged) {
      ++stats.diverged_count;
      continue;
    }
    if (!std::isfinite(run.rmse_pct)) {
      ++stats.unbounded_count;
      continue;
    }
    rmse.push_back(run.rmse_pct);
    if (run.adaptation_window_s) windows.push_back(*run.adaptation_window_s);
  }
  if (!rmse.empty()) {
    stats.mean_rmse_pct = std::accumulate(rmse.begin(), rmse.end(), 0.0) / static_cast<double>(rmse.size());
    double ss = 0.0;
    for (double v : rmse) ss += (v - stats.mean_rmse_pct) * (v - stats.mean_rmse_pct);
    stats.std_rmse_pct = rmse.size() > 1 ? std::sqrt(ss / static_cast<double>(rmse.size() - 1)) : 0.0;
  } else {
    stats.mean_rmse_pct = kNaN;
    stats.std_rmse_pct = kNaN;
  }
  if (!windows.empty()) {
    stats.mean_adaptation_s =
        std::accumulate(windows.begin(), windows.end(), 0.0) / static_cast<double>(windows.size());
  }
  stats.per_run = std::move(runs);
  return stats;
}

MonteCarloStats monte_carlo(const Scenario& scenario, int n_runs, int threads) {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be at least 1");
  scenario.validate();
  std::vector<RunSummary> runs(static_cast<std::size_t>(n_runs));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (int i = next++; i < n_runs; i = next++) {
      try {
        Scenario trial = scenario;
        trial.seed = scenario.seed + static_cast<std::uint64_t>(i);
        runs[static_cast<std::size_t>(i)] = summarize(run_estimation(trial), trial.seed);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const int pool = std::clamp(threads, 1, n_runs);
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::jthread> workers;
    for (int i = 0; i < pool; ++i) workers.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(std::move(runs));
}

std::string to_string(SweepAxis axis) {
  return axis == SweepAxis::IsoClass ? "iso_class" : "velocity";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "iso_class") return SweepAxis::IsoClass;
  if (name == "velocity") return SweepAxis::Velocity;
  throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

std::vector<SweepRow> sensitivity_sweep(const Scenario& base, SweepAxis axis,
                                        const std::vector<std::string>& values, int n_runs,
                                        int threads) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (const auto& value : values) {
    Scenario s = base;
    if (axis == SweepAxis::IsoClass) {
      const IsoClass iso = iso_class_from_string(value);
      const ProfileSpec shape = s.profile;
      s.profile = ProfileSpec::iso(iso, shape.seed);
      s.profile.band_min = shape.band_min;
      s.profile.band_max = shape.band_max;
      s.profile.components = shape.components;
    } else {
      std::size_t used = 0;
      s.velocity = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("bad velocity '" + value + "'");
    }
    SweepRow row;
    row.value = value;
    row.stats = monte_carlo(s, n_runs, threads);
    row.mean_error_pct = row.stats.mean_rmse_pct;
    row.mean_adaptation_s = row.stats.mean_adaptation_s;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_truth_csv(std::ostream& out, const TruthTrajectory& truth, int precision) {
  const Eigen::Index n = truth.states.cols();
  const Eigen::Index p = truth.measurements.cols();
  out << "t,h,hdot";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
  for (Eigen::Index i = 1; i <= p; ++i) out << ",z" << i;
  out << '\n' << std::setprecision(precision);
  const auto& profile = truth.path.profile;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    out << profile.time(k) << ',' << profile.h[k] << ',' << profile.hdot[k];
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << truth.states(row, i);
    for (Eigen::Index i = 0; i < p; ++i) out << ',' << truth.measurements(row, i);
    out << '\n';
  }
}

void write_result_csv(std::ostream& out, const EstimationResult& result, int precision) {
  const Eigen::Index n = result.state_est.cols();
  out << "t,ks_true,ks_est,rel_error_pct";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i << "_est";
  out << '\n' << std::setprecision(precision);
  for (std::size_t k = 0; k < result.t.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    out << result.t[k] << ',' << result.ks_true[k] << ',' << result.ks_est[k] << ','
        << result.rel_error_pct[k];
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << result.state_est(row, i);
    out << '\n';
  }
}

}  // namespace terrasense
