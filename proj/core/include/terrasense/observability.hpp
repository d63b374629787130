#pragma once

#include "terrasense/vehicle_model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace terrasense {

/// State-space model whose matrices are affine in one scheduling state s = x(index):
///   x' = (A0 + s A1) x + B u,   y = (C0 + s C1) x + D u.
/// Both quarter-car variants have this form with s = k_tot.
struct BilinearSystem {
  Eigen::MatrixXd A0, A1, C0, C1;
  Eigen::VectorXd B, D;
  Eigen::Index scheduling_index = 0;

  static BilinearSystem from_vehicle(const VehicleParams& params);
  /// Constant matrices (A1 = C1 = 0).
  static BilinearSystem linear(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                               const Eigen::MatrixXd& C);

  /// Keep only the listed output rows (possibly none).
  BilinearSystem with_outputs(const std::vector<Eigen::Index>& rows) const;

  Eigen::Index state_dim() const { return A0.rows(); }
  Eigen::Index output_dim() const { return C0.rows(); }

  Eigen::VectorXd rhs(const Eigen::VectorXd& x, double u) const;
  Eigen::VectorXd output(const Eigen::VectorXd& x, double u) const;
};

/// L_f^(0..count-1)[h](x) for constant input u, one p-vector per order.
std::vector<Eigen::VectorXd> lie_derivatives(const BilinearSystem& sys, const Eigen::VectorXd& x,
                                             double u, int count);

struct ObservabilityReport {
  /// Rows d/dx L_f^(i)[h_q](x), i = 0..n-1, stacked per order.
  Eigen::MatrixXd matrix;
  /// Descending singular values of the row/column-equilibrated matrix.
  Eigen::VectorXd singular_values;
  Eigen::Index rank = 0;
  bool observable = false;
  /// Set when the stiffness state is non-positive.
  bool outside_physical_regime = false;
};

inline constexpr double kDefaultRankTolerance = 1e-8;

ObservabilityReport observability_report(const BilinearSystem& sys, const Eigen::VectorXd& x,
                                         double u, double tol = kDefaultRankTolerance);

/// Rank test of the quarter-car model at one state and input.
ObservabilityReport lie_observability(const VehicleParams& params, const Eigen::VectorXd& state,
                                      double input, double tol = kDefaultRankTolerance);

}  // namespace terrasense
