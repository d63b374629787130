#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace terrasense {

/// Which vertical ride model the parameters describe.
enum class ModelOrder {
  TwoDof,    ///< sprung + unsprung mass, tire in series with the soil
  OneDofLRV  ///< single condensed mass, joined suspension/tire stiffness
};

std::string to_string(ModelOrder order);
ModelOrder model_order_from_string(const std::string& name);

/// Quarter-car parameters, SI units throughout.
///
/// For `OneDofLRV` the joined suspension/tire stiffness lives in
/// `suspension_stiffness`; `unsprung_mass` and `tire_stiffness` are ignored.
struct VehicleParams {
  double sprung_mass = 0.0;           // kg
  double unsprung_mass = 0.0;         // kg
  double suspension_stiffness = 0.0;  // N/m
  double suspension_damping = 0.0;    // N s/m
  double tire_stiffness = 0.0;        // N/m
  ModelOrder model_order = ModelOrder::TwoDof;

  /// Off-road heavy vehicle: k = 25 kN/m, c = 2 kNs/m, m_s = 455 kg,
  /// m_ns = 45.5 kg, k_t = 175 kN/m.
  static VehicleParams offroad_reference();
  /// Lunar Roving Vehicle single-DOF model: k = 15 kN/m, c = 1.5 kNs/m, m_s = 75 kg.
  static VehicleParams lunar_roving_vehicle();

  /// Throws std::invalid_argument when a used quantity is not strictly positive.
  void validate() const;

  Eigen::Index state_dim() const { return model_order == ModelOrder::TwoDof ? 5 : 3; }
  Eigen::Index measurement_dim() const { return model_order == ModelOrder::TwoDof ? 2 : 1; }

  /// Stiffness of the vehicle element acting in series with the soil:
  /// the tire for TwoDof, the joined stiffness for OneDofLRV.
  double series_stiffness() const;
};

/// Continuous-time matrices of x' = A(x) x + B u + G w,  z = C(x) x + D u + v.
///
/// `D` is the input feed-through of the measurement; it is zero for TwoDof and
/// carries the damper term c/m_s for OneDofLRV.
struct ContinuousMatrices {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::MatrixXd G;
  Eigen::MatrixXd C;
  Eigen::VectorXd D;
};

/// Series combination k_s k_t / (k_s + k_t). An infinite k_s returns k_t.
double combined_stiffness(double soil_stiffness, double tire_stiffness);

/// Inverse of combined_stiffness: k_t k_tot / (k_t - k_tot). Requires 0 < k_tot < k_t.
double soil_stiffness_from_combined(double combined, double tire_stiffness);

ContinuousMatrices build_matrices(const VehicleParams& params, const Eigen::VectorXd& state);

/// d/dx [A(x) x]. Differs from A(x) only in the column of the stiffness state.
Eigen::MatrixXd process_jacobian(const VehicleParams& params, const Eigen::VectorXd& state);

/// Rows of process_jacobian that correspond to the measured accelerations.
Eigen::MatrixXd measurement_jacobian(const VehicleParams& params, const Eigen::VectorXd& state);

/// Noise-free accelerations C(x) x + D u.
Eigen::VectorXd measurement(const VehicleParams& params, const Eigen::VectorXd& state,
                            double input = 0.0);

/// Index of the acceleration rows of A(x) that C(x) reproduces.
std::vector<Eigen::Index> acceleration_rows(ModelOrder order);

}  // namespace terrasense
