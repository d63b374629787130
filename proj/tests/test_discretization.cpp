#include "terrasense/discretization.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <utility>

namespace ts = terrasense;

namespace {

ts::ContinuousMatrices reference_model(double ktot = 137.93e3) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
  x(4) = ktot;
  return ts::build_matrices(ts::VehicleParams::offroad_reference(), x);
}

double taylor_error(const Eigen::MatrixXd& A, double dt) {
  return ts::oracle::relative_error(ts::taylor_expm(A, dt), ts::oracle::expm(A * dt));
}

}  // namespace

TEST(TaylorExpm, ZeroStepIsIdentity) {
  const auto A = reference_model().A;
  EXPECT_EQ(ts::taylor_expm(A, 0.0), Eigen::MatrixXd::Identity(5, 5));
}

TEST(TaylorExpm, ScalarExponential) {
  Eigen::MatrixXd A(1, 1);
  A << -1.0;
  EXPECT_NEAR(ts::taylor_expm(A, 0.01, 4)(0, 0), 0.9900498337, 1e-10);
  EXPECT_NEAR(ts::taylor_expm(A, 0.01, 4)(0, 0), std::exp(-0.01), 1e-12);
}

TEST(TaylorExpm, NilpotentTerminates) {
  Eigen::MatrixXd A(2, 2);
  A << 0, 1, 0, 0;
  for (double dt : {0.01, 0.7, 13.0}) {
    Eigen::MatrixXd expected(2, 2);
    expected << 1, dt, 0, 1;
    EXPECT_EQ(ts::taylor_expm(A, dt), expected);
  }
}

TEST(TaylorExpm, ExactForNilpotentIndexFour) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
  A(0, 1) = 2.0;
  A(1, 2) = -1.5;
  A(2, 3) = 0.5;
  const double dt = 0.9;
  EXPECT_LT(ts::oracle::relative_error(ts::taylor_expm(A, dt), ts::oracle::expm(A * dt)), 1e-15);
}

TEST(TaylorExpm, RejectsOrderZero) {
  EXPECT_THROW(ts::taylor_expm(Eigen::MatrixXd::Identity(2, 2), 0.1, 0), std::invalid_argument);
}

TEST(TaylorExpm, ReferenceModelErrorIsTruncationRemainder) {
  const auto A = reference_model().A;
  for (double dt : {0.01, 0.005, 0.001}) {
    // exp(A dt) minus the series terms of degree 5 and above.
    const Eigen::MatrixXd M = A * dt;
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(5, 5);
    Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(5, 5);
    for (int j = 1; j <= 40; ++j) {
      term = term * M / static_cast<double>(j);
      if (j >= 5) tail += term;
    }
    const Eigen::MatrixXd expected = ts::oracle::expm(M) - tail;
    EXPECT_LT(ts::oracle::relative_error(ts::taylor_expm(A, dt), expected), 1e-13) << "dt " << dt;
  }
}

TEST(TaylorExpm, ReferenceModelAccuracy) {
  const auto A = reference_model().A;
  // Wheel-hop eigenvalues near -22.6 +- 54.2i put |lambda dt| at 0.59 for dt = 0.01.
  EXPECT_LT(taylor_error(A, 0.01), 1e-3);
  EXPECT_LT(taylor_error(A, 0.001), 1e-7);
  EXPECT_LT(taylor_error(A, 0.0001), 1e-12);
}

TEST(TaylorExpm, ErrorScalesWithFifthPower) {
  const auto A = reference_model().A;
  // Asymptotic regime, |lambda dt| well below one.
  for (double dt : {6.25e-4, 3.125e-4}) {
    const double ratio = taylor_error(A, dt) / taylor_error(A, dt / 2.0);
    EXPECT_GE(ratio, 20.0) << "dt " << dt;
    EXPECT_LE(ratio, 45.0) << "dt " << dt;
  }
  // A scalar decay is in that regime already at the simulation step.
  Eigen::MatrixXd a(1, 1);
  a << -3.0;
  const auto scalar_error = [&](double dt) {
    return std::abs(ts::taylor_expm(a, dt)(0, 0) - std::exp(-3.0 * dt));
  };
  EXPECT_NEAR(scalar_error(0.04) / scalar_error(0.02), 32.0, 1.5);
}

TEST(TaylorExpmIntegral, MatchesQuadrature) {
  const auto A = reference_model().A;
  const double dt = 0.01;
  // Composite Simpson on the series itself, 200 panels.
  const int panels = 200;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i <= panels; ++i) {
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * ts::taylor_expm(A, dt * i / panels);
  }
  acc *= dt / panels / 3.0;
  EXPECT_LT(ts::oracle::relative_error(ts::taylor_expm_integral(A, dt), acc), 1e-10);
}

TEST(Discretize, ZeroDynamicsLimit) {
  ts::ContinuousMatrices c;
  c.A = Eigen::MatrixXd::Zero(3, 3);
  c.B = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0);
  c.G = Eigen::MatrixXd::Random(3, 3);
  c.C = Eigen::MatrixXd::Ones(1, 3);
  c.D = Eigen::VectorXd::Zero(1);
  const Eigen::MatrixXd Q = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(1, 1) * 0.5;
  const double dt = 0.02;
  const auto d = ts::discretize(c, Q, R, dt);
  EXPECT_EQ(d.Ak, Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(d.Bk.isApprox(dt * c.B, 1e-15));
  EXPECT_TRUE(d.Gk.isApprox(dt * c.G, 1e-15));
  const Eigen::MatrixXd expected = std::pow(dt, 3) * c.G * Q * c.G.transpose();
  EXPECT_TRUE(d.Qk.isApprox(expected, 1e-13));
  EXPECT_EQ(d.Rk, R);
  EXPECT_EQ(d.Ck, c.C);
  EXPECT_DOUBLE_EQ(d.dt, dt);
}

TEST(Discretize, ProcessCovarianceDefinition) {
  const auto c = reference_model();
  const auto noise_q = Eigen::VectorXd::LinSpaced(5, 1e-5, 1e5).asDiagonal().toDenseMatrix();
  const auto d = ts::discretize(c, noise_q, Eigen::Matrix2d::Identity(), 0.01);
  const Eigen::MatrixXd expected = 0.01 * d.Gk * noise_q * d.Gk.transpose();
  EXPECT_TRUE(d.Qk.isApprox(expected, 1e-14));
  // Identity gain collapses the definition to dt Q.
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
  EXPECT_TRUE((0.01 * I * noise_q * I.transpose()).isApprox(0.01 * noise_q, 0.0));
}

TEST(Discretize, ReferenceModelAgainstExactZeroOrderHold) {
  const auto c = reference_model();
  // Augmented exponential [[A, B], [0, 0]] gives the exact hold input matrix.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(6, 6);
  M.topLeftCorner(5, 5) = c.A;
  M.topRightCorner(5, 1) = c.B;
  for (auto [dt, tol] : {std::pair{0.01, 1e-3}, std::pair{1e-4, 1e-11}}) {
    const Eigen::MatrixXd E = ts::oracle::expm(M * dt);
    const auto d =
        ts::discretize(c, Eigen::MatrixXd::Identity(5, 5), Eigen::Matrix2d::Identity(), dt);
    EXPECT_LT(ts::oracle::relative_error(d.Ak, E.topLeftCorner(5, 5)), tol) << "dt " << dt;
    EXPECT_LT(ts::oracle::relative_error(d.Bk, E.topRightCorner(5, 1)), tol) << "dt " << dt;
  }
}

TEST(Discretize, ProcessCovarianceSymmetricPsd) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> k(50e3, 175e3);
  const Eigen::MatrixXd Q = (Eigen::VectorXd(5) << 1e-5, 1e-3, 1e-5, 1e-3, 1e5).finished().asDiagonal();
  for (int i = 0; i < 100; ++i) {
    const auto d = ts::discretize(reference_model(k(rng)), Q, Eigen::Matrix2d::Identity() * 0.5, 0.01);
    EXPECT_EQ(d.Qk, d.Qk.transpose());
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(d.Qk).eigenvalues();
    EXPECT_GE(eig.minCoeff(), -1e-12 * d.Qk.trace());
  }
}

TEST(Discretize, RejectsNonPositiveStep) {
  EXPECT_THROW(ts::discretize(reference_model(), Eigen::MatrixXd::Identity(5, 5),
                              Eigen::Matrix2d::Identity(), 0.0),
               std::invalid_argument);
}
