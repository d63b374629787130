#pragma once

#include "terrasense/vehicle_model.hpp"

#include <Eigen/Dense>

namespace terrasense {

/// x_{k+1} = Ak x_k + Bk u_k + Gk w_k,  z_k = Ck x_k + Dk u_k + v_k.
struct DiscreteModel {
  Eigen::MatrixXd Ak;
  Eigen::VectorXd Bk;
  Eigen::MatrixXd Gk;
  Eigen::MatrixXd Ck;
  Eigen::VectorXd Dk;
  Eigen::MatrixXd Qk;
  Eigen::MatrixXd Rk;
  double dt = 0.0;
};

inline constexpr int kDefaultTaylorOrder = 4;

/// sum_{j=0..order} (A dt)^j / j!
Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& A, double dt, int order = kDefaultTaylorOrder);

/// Term-wise integral of the truncated series over [0, dt]:
/// sum_{j=0..order} A^j dt^{j+1} / (j+1)!
Eigen::MatrixXd taylor_expm_integral(const Eigen::MatrixXd& A, double dt,
                                     int order = kDefaultTaylorOrder);

/// Zero-order-hold discretization with Qk = dt Gk Q Gk^T and Rk = R.
DiscreteModel discretize(const ContinuousMatrices& cont, const Eigen::MatrixXd& Q,
                         const Eigen::MatrixXd& R, double dt, int order = kDefaultTaylorOrder);

}  // namespace terrasense
