#include "terrasense/simulation.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace ts = terrasense;

namespace {

const ts::TerrainEntry kGraneville{"Graneville loam", 651.1e3};
const ts::TerrainEntry kLete{"LETE sand", 2283.0e3};
const ts::TerrainEntry kUpland{"Upland sandy loam", 218.1e3};

// Process noise off and a measurement noise far below anything physical.
void silence(ts::Scenario& s) {
  const Eigen::Index n = s.vehicle.state_dim();
  const Eigen::Index p = s.vehicle.measurement_dim();
  s.noise.Q = Eigen::MatrixXd::Zero(n, n);
  s.noise.R = Eigen::MatrixXd::Identity(p, p) * 1e-20;
}

double rms(const Eigen::VectorXd& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

}  // namespace

TEST(SimulateTruth, FlatRoadWithoutNoiseStaysAtRest) {
  auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 5.0, 3);
  s.profile.psd_reference = 0.0;
  silence(s);
  const auto truth = ts::simulate_truth(s);
  EXPECT_TRUE(truth.states.leftCols(4).isZero(0.0));
  EXPECT_LT(truth.measurements.cwiseAbs().maxCoeff(), 1e-8);
  for (Eigen::Index k = 0; k < truth.states.rows(); ++k)
    EXPECT_DOUBLE_EQ(truth.states(k, 4), ts::combined_stiffness(651.1e3, 175e3));
}

TEST(SimulateTruth, MatchesFineStepReference) {
  auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 10.0, 5);
  silence(s);
  const auto truth = ts::simulate_truth(s);
  const auto& hdot = truth.path.profile.hdot;
  const int substeps = 100;
  const double h = s.dt / substeps;
  Eigen::VectorXd x = truth.states.row(0).transpose();
  Eigen::MatrixXd reference(truth.states.rows(), 5);
  reference.row(0) = x.transpose();
  for (Eigen::Index k = 1; k < truth.states.rows(); ++k) {
    // The discrete model holds the input over each step.
    for (int i = 0; i < substeps; ++i) x = ts::oracle::rk4_step(s.vehicle, x, hdot[static_cast<std::size_t>(k - 1)], h);
    reference.row(k) = x.transpose();
  }
  for (Eigen::Index c = 0; c < 4; ++c) {
    const double scale = rms(reference.col(c));
    const double worst = (truth.states.col(c) - reference.col(c)).cwiseAbs().maxCoeff();
    EXPECT_LT(worst, 0.01 * scale) << "state " << c + 1;
  }
}

TEST(SimulateTruth, SeedsAreReproducibleAndDistinct) {
  auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 3.0, 21);
  const auto a = ts::simulate_truth(s);
  const auto b = ts::simulate_truth(s);
  EXPECT_TRUE(a.measurements == b.measurements);
  EXPECT_TRUE(a.states == b.states);
  s.seed = 22;
  const auto c = ts::simulate_truth(s);
  EXPECT_FALSE(a.measurements == c.measurements);
}

TEST(SimulateTruth, StiffnessTimelineFollowsSegments) {
  ts::Scenario s = ts::Scenario::offroad(kLete, ts::IsoClass::D, 10.0, 1.0, 2);
  s.path.segments = {{kLete, 1.0}, {kUpland, 1.5}, {kGraneville, 0.5}};
  const auto truth = ts::simulate_truth(s);
  ASSERT_EQ(truth.size(), 301u);
  EXPECT_EQ(truth.path.transitions, (std::vector<std::size_t>{100, 250}));
  EXPECT_EQ(truth.path.ks_truth[99], 2283.0e3);
  EXPECT_EQ(truth.path.ks_truth[100], 218.1e3);
  EXPECT_EQ(truth.path.ks_truth[250], 651.1e3);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    EXPECT_DOUBLE_EQ(truth.states(static_cast<Eigen::Index>(k), 4),
                     ts::combined_stiffness(truth.path.ks_truth[k], 175e3));
  }
}

TEST(SimulateTruth, TruthDoesNotDependOnFilter) {
  auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 2.0, 31);
  s.filter = ts::FilterKind::SCKF;
  const auto a = ts::run_estimation(s);
  s.filter = ts::FilterKind::EKF;
  const auto b = ts::run_estimation(s);
  EXPECT_TRUE(a.state_true == b.state_true);
  EXPECT_EQ(a.ks_true, b.ks_true);
  EXPECT_FALSE(a.ks_est == b.ks_est);
}

TEST(AdaptationWindow, Definition) {
  const std::vector<double> t{0, 1, 2, 3, 4, 5, 6};
  const std::vector<double> e{10, 6, 4, 6, 3, 2, 1};
  EXPECT_EQ(ts::adaptation_window(e, t, 5.0), 4.0);
  const std::vector<double> low{1, -2, 3, 0, -4, 2, 1};
  EXPECT_EQ(ts::adaptation_window(low, t, 5.0), 0.0);
  const std::vector<double> high{10, 9, 8, 7, 6, 6, 5};
  EXPECT_FALSE(ts::adaptation_window(high, t, 5.0).has_value());
  const std::vector<double> empty;
  EXPECT_THROW(ts::adaptation_window(empty, empty), std::domain_error);
}

TEST(RmsePct, WindowExcludesPriorAndTail) {
  const std::vector<double> t{0, 1, 2, 3, 4};
  const std::vector<double> e{100, 3, -4, 0, 50};
  EXPECT_NEAR(ts::rmse_pct(e, t, 3.0), std::sqrt(25.0 / 3.0), 1e-12);
  const std::vector<double> bad{0, 1, std::numeric_limits<double>::quiet_NaN(), 1, 1};
  EXPECT_TRUE(std::isinf(ts::rmse_pct(bad, t, 3.0)));
  EXPECT_TRUE(std::isfinite(ts::rmse_pct(bad, t, 1.0)));
}

TEST(SoilStiffnessEstimate, Limits) {
  EXPECT_NEAR(ts::soil_stiffness_estimate(87.5e3, 175e3), 175e3, 1e-6);
  EXPECT_TRUE(std::isinf(ts::soil_stiffness_estimate(175e3, 175e3)));
  EXPECT_TRUE(std::isnan(ts::soil_stiffness_estimate(-1.0, 175e3)));
  EXPECT_TRUE(std::isnan(ts::soil_stiffness_estimate(std::numeric_limits<double>::quiet_NaN(), 175e3)));
}

TEST(Scenario, InitialGuessPolicies) {
  auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 10.0);
  EXPECT_NEAR(s.initial_mean()(4), 58333.333333, 1e-4);
  s.initial_guess = ts::InitialGuessPolicy::HalfTireCombined;
  EXPECT_DOUBLE_EQ(s.initial_mean()(4), 87.5e3);
  const Eigen::VectorXd p0 = s.initial_covariance_diagonal();
  EXPECT_EQ(p0, (Eigen::VectorXd(5) << 1e-4, 1e-2, 1e-4, 1e-2, 1e9).finished());
  for (auto p : {ts::InitialGuessPolicy::HalfTireSoil, ts::InitialGuessPolicy::HalfTireCombined})
    EXPECT_EQ(ts::initial_guess_policy_from_string(ts::to_string(p)), p);
}

TEST(Scenario, ValidationRejectsBadValues) {
  auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 10.0);
  s.dt = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.dt = 0.01;
  s.velocity = -1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.velocity = 10.0;
  s.initial_variances = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(RunEstimation, GranevilleConvergesQuickly) {
  const auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 10.0);
  const auto r = ts::run_estimation(s);
  ASSERT_FALSE(r.diverged);
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    if (r.t[k] > 1.5) EXPECT_LT(std::abs(r.rel_error_pct[k]), 5.0) << "t = " << r.t[k];
  }
  EXPECT_LT(r.rmse_pct, 5.0);
  EXPECT_EQ(r.t.size(), r.ks_est.size());
  EXPECT_EQ(r.t.size(), r.rel_error_pct.size());
  EXPECT_EQ(static_cast<std::size_t>(r.state_est.rows()), r.t.size());
}

TEST(RunEstimation, EkfFailsWhereSckfConvergesOnLeteSand) {
  auto s = ts::Scenario::offroad(kLete, ts::IsoClass::F, 10.0, 10.0, 64);
  const auto truth = ts::simulate_truth(s);
  s.filter = ts::FilterKind::EKF;
  const auto ekf = ts::estimate_on(s, truth);
  EXPECT_TRUE(ekf.diverged || ekf.rmse_pct > 20.0);
  s.filter = ts::FilterKind::SCKF;
  const auto sckf = ts::estimate_on(s, truth);
  EXPECT_FALSE(sckf.diverged);
  EXPECT_LT(sckf.rmse_pct, 5.0);
}

TEST(RunEstimation, LunarVehicleOnRegolith) {
  const auto s = ts::Scenario::lunar(ts::IsoClass::G, 2.0, 20.0);
  const auto r = ts::run_estimation(s);
  ASSERT_FALSE(r.diverged);
  const auto window = ts::adaptation_window(r.rel_error_pct, r.t, 5.0);
  ASSERT_TRUE(window.has_value());
  EXPECT_LE(*window, 4.0);
  EXPECT_LT(std::abs(r.rel_error_pct.back()), 1.5);
}

TEST(RunEstimation, TracksTruthWithExactStiffnessAndQuietSensors) {
  auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 10.0, 41);
  s.noise.Q(4, 4) = 0.0;
  s.noise.R = Eigen::Matrix2d::Identity() * 1e-12;
  const auto truth = ts::simulate_truth(s);
  const ts::VehicleFilterModel model(s.vehicle, s.noise, s.dt);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(5);
  mean(4) = truth.ktot_truth[0];
  auto filter = ts::make_estimator(ts::FilterKind::SCKF, model, mean, s.initial_covariance_diagonal());
  Eigen::MatrixXd est(truth.states.rows(), 5);
  est.row(0) = mean.transpose();
  const auto& hdot = truth.path.profile.hdot;
  for (std::size_t k = 1; k < truth.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    filter->step(hdot[k - 1], truth.measurements.row(row).transpose(), hdot[k]);
    est.row(row) = filter->mean().transpose();
  }
  for (Eigen::Index c = 0; c < 5; ++c) {
    const double rel = rms(est.col(c) - truth.states.col(c)) / rms(truth.states.col(c));
    EXPECT_LT(rel, 0.01) << "state " << c + 1;
  }
}

TEST(RunEstimation, BitIdenticalRepeats) {
  const auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::E, 5.0, 3.0, 77);
  const auto a = ts::run_estimation(s);
  const auto b = ts::run_estimation(s);
  EXPECT_EQ(a.ks_est, b.ks_est);
  EXPECT_EQ(a.rel_error_pct, b.rel_error_pct);
  EXPECT_EQ(a.rmse_pct, b.rmse_pct);
}

TEST(MonteCarlo, SingleRunEqualsEstimation) {
  const auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 4.0, 9);
  const auto stats = ts::monte_carlo(s, 1);
  const auto r = ts::run_estimation(s);
  ASSERT_EQ(stats.per_run.size(), 1u);
  EXPECT_EQ(stats.per_run[0].seed, 9u);
  EXPECT_EQ(stats.mean_rmse_pct, r.rmse_pct);
  EXPECT_EQ(stats.std_rmse_pct, 0.0);
  EXPECT_EQ(stats.mean_adaptation_s, r.adaptation_window_s);
}

TEST(MonteCarlo, StatisticsMatchIndependentRuns) {
  const auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 2.0, 40);
  const auto stats = ts::monte_carlo(s, 4);
  std::vector<double> rmse;
  for (std::uint64_t i = 0; i < 4; ++i) {
    auto one = s;
    one.seed = 40 + i;
    rmse.push_back(ts::run_estimation(one).rmse_pct);
  }
  double mean = 0.0;
  for (double v : rmse) mean += v / 4.0;
  double ss = 0.0;
  for (double v : rmse) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(stats.mean_rmse_pct, mean, 1e-12 * mean);
  EXPECT_NEAR(stats.std_rmse_pct, std::sqrt(ss / 3.0), 1e-9 * mean);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
  const auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 2.0, 100);
  const auto a = ts::monte_carlo(s, 6, 1);
  const auto b = ts::monte_carlo(s, 6, 3);
  ASSERT_EQ(a.per_run.size(), b.per_run.size());
  for (std::size_t i = 0; i < a.per_run.size(); ++i) {
    EXPECT_EQ(a.per_run[i].seed, 100u + i);
    EXPECT_EQ(a.per_run[i].seed, b.per_run[i].seed);
    EXPECT_EQ(a.per_run[i].rmse_pct, b.per_run[i].rmse_pct);
  }
  EXPECT_EQ(a.mean_rmse_pct, b.mean_rmse_pct);
  EXPECT_EQ(a.std_rmse_pct, b.std_rmse_pct);
}

TEST(MonteCarlo, RejectsZeroRuns) {
  const auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 1.0);
  EXPECT_THROW(ts::monte_carlo(s, 0), std::invalid_argument);
}

TEST(Aggregate, ExcludesDivergedAndUnboundedRuns) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto stats = ts::aggregate({{1, 2.0, 0.5, false},
                                    {2, inf, std::nullopt, true},
                                    {3, 4.0, 1.5, false},
                                    {4, inf, std::nullopt, false}});
  EXPECT_EQ(stats.diverged_count, 1);
  EXPECT_EQ(stats.unbounded_count, 1);
  EXPECT_DOUBLE_EQ(stats.mean_rmse_pct, 3.0);
  EXPECT_DOUBLE_EQ(stats.std_rmse_pct, std::sqrt(2.0));
  ASSERT_TRUE(stats.mean_adaptation_s.has_value());
  EXPECT_DOUBLE_EQ(*stats.mean_adaptation_s, 1.0);
  EXPECT_EQ(stats.per_run.size(), 4u);
}

TEST(SensitivitySweep, SingleValueIsOneBatch) {
  const auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 2.0, 5);
  const auto rows = ts::sensitivity_sweep(s, ts::SweepAxis::Velocity, {"10"}, 3);
  ASSERT_EQ(rows.size(), 1u);
  const auto direct = ts::monte_carlo(s, 3);
  EXPECT_EQ(rows[0].mean_error_pct, direct.mean_rmse_pct);
  EXPECT_EQ(rows[0].value, "10");
}

TEST(SensitivitySweep, IsoAxisChangesRoughness) {
  const auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 2.0, 5);
  const auto rows = ts::sensitivity_sweep(s, ts::SweepAxis::IsoClass, {"D", "F"}, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].mean_error_pct, ts::monte_carlo(s, 2).mean_rmse_pct);
  EXPECT_NE(rows[0].mean_error_pct, rows[1].mean_error_pct);
  EXPECT_THROW(ts::sensitivity_sweep(s, ts::SweepAxis::Velocity, {}, 1), std::invalid_argument);
  EXPECT_THROW(ts::sensitivity_sweep(s, ts::SweepAxis::Velocity, {"fast"}, 1), std::invalid_argument);
}

TEST(Csv, TruthAndResultHeaders) {
  const auto s = ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, 0.05);
  const auto truth = ts::simulate_truth(s);
  std::ostringstream a;
  ts::write_truth_csv(a, truth);
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "t,h,hdot,x1,x2,x3,x4,x5,z1,z2");
  std::ostringstream b;
  ts::write_result_csv(b, ts::estimate_on(s, truth));
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')),
            "t,ks_true,ks_est,rel_error_pct,x1_est,x2_est,x3_est,x4_est,x5_est");
  std::size_t lines = 0;
  for (char c : b.str()) lines += c == '\n';
  EXPECT_EQ(lines, truth.size() + 1);
}
