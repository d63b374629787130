#include "terrasense/filter_model.hpp"

#include <cmath>
#include <stdexcept>

namespace terrasense {

NoiseConfig NoiseConfig::reference(ModelOrder order) {
  NoiseConfig noise;
  if (order == ModelOrder::TwoDof) {
    noise.Q = Eigen::Vector<double, 5>(1e-5, 1e-3, 1e-5, 1e-3, 1e5).asDiagonal();
    noise.R = Eigen::Vector2d(0.5, 0.5).asDiagonal();
  } else {
    noise.Q = Eigen::Vector3d(1e-5, 1e-3, 1e5).asDiagonal();
    noise.R = Eigen::Matrix<double, 1, 1>::Constant(0.5);
  }
  return noise;
}

void NoiseConfig::validate(Eigen::Index state_dim, Eigen::Index measurement_dim) const {
  if (Q.rows() != state_dim || Q.cols() != state_dim) {
    throw std::invalid_argument("Q must be " + std::to_string(state_dim) + "x" +
                                std::to_string(state_dim));
  }
  if (R.rows() != measurement_dim || R.cols() != measurement_dim) {
    throw std::invalid_argument("R must be " + std::to_string(measurement_dim) + "x" +
                                std::to_string(measurement_dim));
  }
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    if (!(Q(i, i) >= 0.0)) throw std::invalid_argument("Q diagonal must be non-negative");
  }
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    if (!(R(i, i) > 0.0)) throw std::invalid_argument("R diagonal must be positive");
  }
}

Eigen::MatrixXd FilterModel::process_covariance(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd L = process_noise_factor(x);
  return L * L.transpose();
}

Eigen::MatrixXd FilterModel::measurement_covariance() const {
  const Eigen::MatrixXd L = measurement_noise_factor();
  return L * L.transpose();
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& covariance) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (covariance + covariance.transpose()));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

std::string to_string(MeasurementJacobian form) {
  return form == MeasurementJacobian::Continuous ? "continuous" : "discretized_rows";
}

MeasurementJacobian measurement_jacobian_from_string(const std::string& name) {
  if (name == "continuous") return MeasurementJacobian::Continuous;
  if (name == "discretized_rows") return MeasurementJacobian::DiscretizedRows;
  throw std::invalid_argument("unknown measurement Jacobian '" + name + "'");
}

VehicleFilterModel::VehicleFilterModel(VehicleParams params, NoiseConfig noise, double dt,
                                       int taylor_order, MeasurementJacobian jacobian)
    : params_(params), noise_(std::move(noise)), dt_(dt), order_(taylor_order),
      jacobian_(jacobian) {
  params_.validate();
  noise_.validate(params_.state_dim(), params_.measurement_dim());
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  q_sqrt_ = noise_.Q.diagonal().cwiseSqrt();
  r_sqrt_ = noise_.R.diagonal().cwiseSqrt().asDiagonal();
}

DiscreteModel VehicleFilterModel::discrete_at(const Eigen::VectorXd& x) const {
  return discretize(build_matrices(params_, x), noise_.Q, noise_.R, dt_, order_);
}

Eigen::VectorXd VehicleFilterModel::propagate(const Eigen::VectorXd& x, double u) const {
  const ContinuousMatrices m = build_matrices(params_, x);
  // Ak x + (integral) B u, summed term by term on vectors.
  Eigen::VectorXd state_term = x;
  Eigen::VectorXd input_term = m.B * (u * dt_);
  Eigen::VectorXd next = state_term + input_term;
  for (int j = 1; j <= order_; ++j) {
    state_term = m.A * state_term * (dt_ / j);
    input_term = m.A * input_term * (dt_ / (j + 1));
    next += state_term + input_term;
  }
  return next;
}

Eigen::VectorXd VehicleFilterModel::observe(const Eigen::VectorXd& x, double u) const {
  return measurement(params_, x, u);
}

Eigen::MatrixXd VehicleFilterModel::transition_jacobian(const Eigen::VectorXd& x) const {
  return taylor_expm(process_jacobian(params_, x), dt_, order_);
}

Eigen::MatrixXd VehicleFilterModel::observation_jacobian(const Eigen::VectorXd& x) const {
  if (jacobian_ == MeasurementJacobian::Continuous) return measurement_jacobian(params_, x);
  const Eigen::MatrixXd jac = transition_jacobian(x);
  const auto rows = acceleration_rows(params_.model_order);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), jac.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = jac.row(rows[i]);
  return out;
}

Eigen::MatrixXd VehicleFilterModel::process_noise_factor(const Eigen::VectorXd& x) const {
  const ContinuousMatrices m = build_matrices(params_, x);
  const Eigen::MatrixXd Gk = taylor_expm_integral(m.A, dt_, order_) * m.G;
  // Qk = dt Gk Q Gk^T with diagonal Q.
  return std::sqrt(dt_) * Gk * q_sqrt_.asDiagonal();
}

Eigen::MatrixXd VehicleFilterModel::measurement_noise_factor() const { return r_sqrt_; }

LinearFilterModel::LinearFilterModel(const ContinuousMatrices& cont, const Eigen::MatrixXd& Q,
                                     const Eigen::MatrixXd& R, double dt, int taylor_order)
    : model_(discretize(cont, Q, R, dt, taylor_order)) {
  if (model_.Dk.size() == 0) model_.Dk = Eigen::VectorXd::Zero(model_.Ck.rows());
  if (model_.Bk.size() == 0) model_.Bk = Eigen::VectorXd::Zero(model_.Ak.rows());
  q_factor_ = std::sqrt(dt) * model_.Gk * psd_factor(Q);
  r_factor_ = psd_factor(R);
}

Eigen::VectorXd LinearFilterModel::propagate(const Eigen::VectorXd& x, double u) const {
  return model_.Ak * x + model_.Bk * u;
}

Eigen::VectorXd LinearFilterModel::observe(const Eigen::VectorXd& x, double u) const {
  return model_.Ck * x + model_.Dk * u;
}

Eigen::MatrixXd LinearFilterModel::transition_jacobian(const Eigen::VectorXd&) const {
  return model_.Ak;
}

Eigen::MatrixXd LinearFilterModel::observation_jacobian(const Eigen::VectorXd&) const {
  return model_.Ck;
}

Eigen::MatrixXd LinearFilterModel::process_noise_factor(const Eigen::VectorXd&) const {
  return q_factor_;
}

Eigen::MatrixXd LinearFilterModel::measurement_noise_factor() const { return r_factor_; }

}  // namespace terrasense
