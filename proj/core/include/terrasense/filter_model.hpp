#pragma once

#include "terrasense/discretization.hpp"
#include "terrasense/vehicle_model.hpp"

#include <Eigen/Dense>

#include <string>

namespace terrasense {

/// Diagonal process and measurement covariances of the continuous model.
struct NoiseConfig {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;

  /// Q = diag[1e-5 m^2, 1e-3 (m/s)^2, 1e-5 m^2, 1e-3 (m/s)^2, 1e5 (N/m)^2],
  /// R = diag[0.5, 0.5] (m/s^2)^2. The single-DOF variant keeps the entries of
  /// its remaining states.
  static NoiseConfig reference(ModelOrder order);

  void validate(Eigen::Index state_dim, Eigen::Index measurement_dim) const;
};

/// Discrete-time model as seen by a filter. Implementations are immutable and
/// may be shared between filter instances.
class FilterModel {
 public:
  virtual ~FilterModel() = default;

  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index measurement_dim() const = 0;

  /// Ak(x) x + Bk(x) u
  virtual Eigen::VectorXd propagate(const Eigen::VectorXd& x, double u) const = 0;
  /// Ck(x) x + Dk u
  virtual Eigen::VectorXd observe(const Eigen::VectorXd& x, double u) const = 0;
  /// Discretized Jacobian of the transition, used by the EKF covariance step.
  virtual Eigen::MatrixXd transition_jacobian(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd observation_jacobian(const Eigen::VectorXd& x) const = 0;
  /// L with Qk(x) = L L^T.
  virtual Eigen::MatrixXd process_noise_factor(const Eigen::VectorXd& x) const = 0;
  /// L with Rk = L L^T.
  virtual Eigen::MatrixXd measurement_noise_factor() const = 0;

  Eigen::MatrixXd process_covariance(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd measurement_covariance() const;
};

/// Which matrix the EKF linearizes the measurement with.
enum class MeasurementJacobian {
  Continuous,      ///< acceleration rows of the continuous process Jacobian
  DiscretizedRows  ///< acceleration rows of the discretized process Jacobian
};

std::string to_string(MeasurementJacobian form);
MeasurementJacobian measurement_jacobian_from_string(const std::string& name);

/// The quarter-car model, re-discretized at every state it is evaluated at.
class VehicleFilterModel final : public FilterModel {
 public:
  VehicleFilterModel(VehicleParams params, NoiseConfig noise, double dt,
                     int taylor_order = kDefaultTaylorOrder,
                     MeasurementJacobian jacobian = MeasurementJacobian::Continuous);

  Eigen::Index state_dim() const override { return params_.state_dim(); }
  Eigen::Index measurement_dim() const override { return params_.measurement_dim(); }

  Eigen::VectorXd propagate(const Eigen::VectorXd& x, double u) const override;
  Eigen::VectorXd observe(const Eigen::VectorXd& x, double u) const override;
  Eigen::MatrixXd transition_jacobian(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd observation_jacobian(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd process_noise_factor(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd measurement_noise_factor() const override;

  DiscreteModel discrete_at(const Eigen::VectorXd& x) const;

  const VehicleParams& params() const { return params_; }
  const NoiseConfig& noise() const { return noise_; }
  double dt() const { return dt_; }

 private:
  VehicleParams params_;
  NoiseConfig noise_;
  Eigen::VectorXd q_sqrt_;
  Eigen::MatrixXd r_sqrt_;
  double dt_;
  int order_;
  MeasurementJacobian jacobian_;
};

/// Time-invariant linear model discretized once. Used as a reference system.
class LinearFilterModel final : public FilterModel {
 public:
  LinearFilterModel(const ContinuousMatrices& cont, const Eigen::MatrixXd& Q,
                    const Eigen::MatrixXd& R, double dt, int taylor_order = kDefaultTaylorOrder);

  Eigen::Index state_dim() const override { return model_.Ak.rows(); }
  Eigen::Index measurement_dim() const override { return model_.Ck.rows(); }

  Eigen::VectorXd propagate(const Eigen::VectorXd& x, double u) const override;
  Eigen::VectorXd observe(const Eigen::VectorXd& x, double u) const override;
  Eigen::MatrixXd transition_jacobian(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd observation_jacobian(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd process_noise_factor(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd measurement_noise_factor() const override;

  const DiscreteModel& discrete() const { return model_; }

 private:
  DiscreteModel model_;
  Eigen::MatrixXd q_factor_;
  Eigen::MatrixXd r_factor_;
};

/// Symmetric PSD square root factor via eigen-decomposition (negative
/// eigenvalues from roundoff are clipped).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& covariance);

}  // namespace terrasense
