#pragma once

#include "terrasense/estimator.hpp"
#include "terrasense/filter_model.hpp"
#include "terrasense/road_profile.hpp"
#include "terrasense/vehicle_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace terrasense {

/// How the filter's stiffness state is initialised when nothing is known.
enum class InitialGuessPolicy {
  HalfTireSoil,     ///< k_s0 = k_t / 2, so k_tot0 = k_t / 3
  HalfTireCombined  ///< k_tot0 = k_t / 2
};

std::string to_string(InitialGuessPolicy policy);
InitialGuessPolicy initial_guess_policy_from_string(const std::string& name);

/// Default P0 diagonal: motion states one order above Q, stiffness variance 1e9 (N/m)^2
/// for the two-DOF model and scaled by (k/k_t)^2 for the single-DOF model.
Eigen::VectorXd default_initial_variances(const VehicleParams& params);

struct Scenario {
  VehicleParams vehicle = VehicleParams::offroad_reference();
  TerrainPath path;
  ProfileSpec profile = ProfileSpec::iso(IsoClass::D);
  double velocity = 10.0;  // m/s
  double dt = 0.01;        // s
  NoiseConfig noise = NoiseConfig::reference(ModelOrder::TwoDof);
  std::uint64_t seed = 1;
  FilterKind filter = FilterKind::SCKF;
  InitialGuessPolicy initial_guess = InitialGuessPolicy::HalfTireSoil;
  /// Empty means default_initial_variances(vehicle).
  Eigen::VectorXd initial_variances;
  double rmse_window = 10.0;            // s
  double adaptation_threshold_pct = 5.0;
  int taylor_order = kDefaultTaylorOrder;
  MeasurementJacobian ekf_measurement_jacobian = MeasurementJacobian::Continuous;

  double duration() const { return path.duration(); }
  void validate() const;

  Eigen::VectorXd initial_mean() const;
  Eigen::VectorXd initial_covariance_diagonal() const;

  /// Single-terrain scenario on the two-DOF reference vehicle.
  static Scenario offroad(const TerrainEntry& terrain, IsoClass iso_class, double velocity,
                          double duration, std::uint64_t seed = 1);
  /// Lunar Roving Vehicle on regolith.
  static Scenario lunar(IsoClass iso_class, double velocity, double duration,
                        std::uint64_t seed = 1);
};

struct TruthTrajectory {
  ComposedPath path;
  Eigen::MatrixXd states;        ///< one row per sample
  Eigen::MatrixXd measurements;  ///< noisy accelerations, one row per sample
  std::vector<double> ktot_truth;

  std::size_t size() const { return path.ks_truth.size(); }
};

/// Integrates the discrete model at the true stiffness and adds seeded process
/// noise (covariance Qk, stiffness state excluded) and measurement noise (R).
TruthTrajectory simulate_truth(const Scenario& scenario);

struct EstimationResult {
  std::vector<double> t;
  std::vector<double> ks_true;
  std::vector<double> ks_est;
  Eigen::MatrixXd state_true;
  Eigen::MatrixXd state_est;
  std::vector<double> rel_error_pct;
  double rmse_pct = 0.0;
  std::optional<double> adaptation_window_s;
  bool diverged = false;
  std::optional<double> divergence_time_s;
};

/// Feeds a precomputed truth to the scenario's filter.
EstimationResult estimate_on(const Scenario& scenario, const TruthTrajectory& truth);
EstimationResult run_estimation(const Scenario& scenario);

/// Earliest t* with |e(t)| < threshold for every t >= t*; nullopt if the last
/// sample is not below the threshold.
std::optional<double> adaptation_window(std::span<const double> rel_error_pct,
                                        std::span<const double> t, double threshold_pct = 5.0);

/// RMS of the relative error over samples with t0 < t <= t0 + window (the whole
/// run when it is shorter). Non-finite errors give an infinite RMSE.
double rmse_pct(std::span<const double> rel_error_pct, std::span<const double> t, double window);

/// Soil stiffness implied by a combined-stiffness estimate. Values outside
/// (0, k_series) give +inf (at or beyond the rigid limit) or NaN (non-positive).
double soil_stiffness_estimate(double ktot, double series_stiffness);

struct RunSummary {
  std::uint64_t seed = 0;
  double rmse_pct = 0.0;
  std::optional<double> adaptation_window_s;
  bool diverged = false;
};

RunSummary summarize(const EstimationResult& result, std::uint64_t seed);

struct MonteCarloStats {
  double mean_rmse_pct = 0.0;
  double std_rmse_pct = 0.0;
  /// Mean adaptation window over runs where one exists.
  std::optional<double> mean_adaptation_s;
  int diverged_count = 0;
  /// Runs whose stiffness estimate left (0, k_series) inside the window, giving an
  /// unbounded RMSE. Excluded from the statistics like diverged runs.
  int unbounded_count = 0;
  std::vector<RunSummary> per_run;
};

/// Runs seeds seed .. seed + n_runs - 1 with fresh road and noise realisations.
/// Diverged runs are excluded from the statistics. Output does not depend on
/// `threads`.
MonteCarloStats monte_carlo(const Scenario& scenario, int n_runs, int threads = 1);

/// Aggregates per-run summaries (diverged and unbounded runs excluded; sample std with n-1).
MonteCarloStats aggregate(std::vector<RunSummary> runs);

enum class SweepAxis { IsoClass, Velocity };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepRow {
  std::string value;
  double mean_error_pct = 0.0;
  std::optional<double> mean_adaptation_s;
  MonteCarloStats stats;
};

/// One Monte Carlo batch per value ("B", "D", ... or a speed in m/s).
std::vector<SweepRow> sensitivity_sweep(const Scenario& base, SweepAxis axis,
                                        const std::vector<std::string>& values, int n_runs,
                                        int threads = 1);

/// t,h,hdot,x1..xn,z1..zp
void write_truth_csv(std::ostream& out, const TruthTrajectory& truth, int precision = 9);
/// t,ks_true,ks_est,rel_error_pct,x1_est..xn_est
void write_result_csv(std::ostream& out, const EstimationResult& result, int precision = 9);

}  // namespace terrasense
