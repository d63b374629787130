#include "terrasense/ekf.hpp"
#include "terrasense/simulation.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <limits>

namespace ts = terrasense;

namespace {

const ts::VehicleParams kCar = ts::VehicleParams::offroad_reference();

ts::GaussianEstimate reference_initial_estimate() {
  const auto scenario = ts::Scenario::offroad({"Graneville loam", 651.1e3}, ts::IsoClass::D, 10, 10);
  return {scenario.initial_mean(), scenario.initial_covariance_diagonal().asDiagonal()};
}

ts::VehicleFilterModel vehicle_model(ts::MeasurementJacobian form = ts::MeasurementJacobian::Continuous) {
  return ts::VehicleFilterModel(kCar, ts::NoiseConfig::reference(ts::ModelOrder::TwoDof), 0.01,
                                ts::kDefaultTaylorOrder, form);
}

}  // namespace

TEST(Ekf, MatchesKalmanFilterOnLinearSystems) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int n = 1 + static_cast<int>(seed % 5);
    const int p = std::min(n, 1 + static_cast<int>(seed % std::max(1, n)));
    const auto r = ts::oracle::linear_equivalence(seed, n, p);
    EXPECT_LT(r.ekf_mean, 1e-8) << "seed " << seed;
    EXPECT_LT(r.ekf_cov, 1e-8) << "seed " << seed;
  }
}

TEST(Ekf, OneStepFromInitialGuess) {
  const auto model = vehicle_model();
  const auto est = ts::ekf_step(reference_initial_estimate(), Eigen::Vector2d(0.3, -1.2), 0.05, 0.02,
                                model);
  EXPECT_TRUE(est.mean.allFinite());
  EXPECT_TRUE(est.cov.allFinite());
  EXPECT_LE((est.cov - est.cov.transpose()).norm(), 1e-10 * est.cov.norm());
  const Eigen::MatrixXd sym = 0.5 * (est.cov + est.cov.transpose());
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff(),
            -1e-10 * sym.trace());
}

TEST(Ekf, TransitionJacobianIsDiscretizedProcessJacobian) {
  const auto model = vehicle_model();
  Eigen::VectorXd x(5);
  x << 0.0, 0.0, 0.01, 0.0, 137.93e3;
  const Eigen::MatrixXd J = ts::process_jacobian(kCar, x);
  EXPECT_NEAR(J(3, 4), -2.198e-4, 1e-7);
  EXPECT_TRUE(model.transition_jacobian(x).isApprox(ts::taylor_expm(J, 0.01), 1e-14));
  // The stiffness column carries the tire deflection sensitivity forward.
  EXPECT_LT(model.transition_jacobian(x)(3, 4), 0.0);
}

TEST(Ekf, PredictionUsesJacobianForCovariance) {
  const auto model = vehicle_model();
  const auto est = reference_initial_estimate();
  const auto pred = ts::ekf_predict(est, model, 0.1);
  const Eigen::MatrixXd F = model.transition_jacobian(est.mean);
  const Eigen::MatrixXd expected = F * est.cov * F.transpose() + model.process_covariance(est.mean);
  EXPECT_TRUE(pred.cov.isApprox(expected, 1e-14));
  EXPECT_TRUE(pred.mean.isApprox(model.propagate(est.mean, 0.1), 1e-14));
}

TEST(Ekf, MeasurementJacobianForms) {
  Eigen::VectorXd x(5);
  x << 0.01, 0.2, -0.004, 0.1, 90e3;
  const auto continuous = vehicle_model(ts::MeasurementJacobian::Continuous);
  EXPECT_EQ(continuous.observation_jacobian(x), ts::measurement_jacobian(kCar, x));
  const auto rows = vehicle_model(ts::MeasurementJacobian::DiscretizedRows);
  const Eigen::MatrixXd F = rows.transition_jacobian(x);
  const Eigen::MatrixXd H = rows.observation_jacobian(x);
  ASSERT_EQ(H.rows(), 2);
  EXPECT_EQ(H.row(0), F.row(1));
  EXPECT_EQ(H.row(1), F.row(3));
}

TEST(Ekf, MeasurementJacobianNames) {
  for (auto f : {ts::MeasurementJacobian::Continuous, ts::MeasurementJacobian::DiscretizedRows})
    EXPECT_EQ(ts::measurement_jacobian_from_string(ts::to_string(f)), f);
  EXPECT_THROW(ts::measurement_jacobian_from_string("numeric"), std::invalid_argument);
}

TEST(Ekf, NonFiniteCovarianceRaisesDivergence) {
  const auto model = vehicle_model();
  auto est = reference_initial_estimate();
  est.cov(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(ts::ekf_predict(est, model, 0.0), ts::DivergenceError);
}

TEST(Ekf, DimensionMismatchThrows) {
  const auto model = vehicle_model();
  EXPECT_THROW(ts::ekf_correct(reference_initial_estimate(), Eigen::VectorXd::Zero(1), model, 0.0),
               std::invalid_argument);
}

TEST(Ekf, SameStartAsSckf) {
  const auto scenario = ts::Scenario::offroad({"Graneville loam", 651.1e3}, ts::IsoClass::D, 10, 10);
  const auto model = vehicle_model();
  auto a = ts::make_estimator(ts::FilterKind::EKF, model, scenario.initial_mean(),
                              scenario.initial_covariance_diagonal());
  auto b = ts::make_estimator(ts::FilterKind::SCKF, model, scenario.initial_mean(),
                              scenario.initial_covariance_diagonal());
  EXPECT_EQ(a->mean(), b->mean());
  EXPECT_TRUE(a->covariance().isApprox(b->covariance(), 1e-15));
  EXPECT_NEAR(a->mean()(4), 175e3 / 3.0, 1e-9);
}
