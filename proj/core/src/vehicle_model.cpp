#include "terrasense/vehicle_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace terrasense {

namespace {

void require_state(const VehicleParams& params, const Eigen::VectorXd& state) {
  if (state.size() != params.state_dim()) {
    throw std::invalid_argument("state dimension " + std::to_string(state.size()) +
                                " does not match model order " +
                                to_string(params.model_order));
  }
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

std::string to_string(ModelOrder order) {
  return order == ModelOrder::TwoDof ? "two_dof" : "one_dof_lrv";
}

ModelOrder model_order_from_string(const std::string& name) {
  if (name == "two_dof") return ModelOrder::TwoDof;
  if (name == "one_dof_lrv") return ModelOrder::OneDofLRV;
  throw std::invalid_argument("unknown model order '" + name + "'");
}

VehicleParams VehicleParams::offroad_reference() {
  return VehicleParams{455.0, 45.5, 25.0e3, 2.0e3, 175.0e3, ModelOrder::TwoDof};
}

VehicleParams VehicleParams::lunar_roving_vehicle() {
  return VehicleParams{75.0, 0.0, 15.0e3, 1.5e3, 0.0, ModelOrder::OneDofLRV};
}

void VehicleParams::validate() const {
  require_positive(sprung_mass, "sprung_mass");
  require_positive(suspension_stiffness, "suspension_stiffness");
  require_positive(suspension_damping, "suspension_damping");
  if (model_order == ModelOrder::TwoDof) {
    require_positive(unsprung_mass, "unsprung_mass");
    require_positive(tire_stiffness, "tire_stiffness");
  }
}

double VehicleParams::series_stiffness() const {
  return model_order == ModelOrder::TwoDof ? tire_stiffness : suspension_stiffness;
}

double combined_stiffness(double soil_stiffness, double tire_stiffness) {
  if (!(soil_stiffness > 0.0)) throw std::domain_error("soil stiffness must be positive");
  if (!(tire_stiffness > 0.0)) throw std::domain_error("tire stiffness must be positive");
  if (std::isinf(soil_stiffness)) return tire_stiffness;
  if (std::isinf(tire_stiffness)) return soil_stiffness;
  return soil_stiffness * tire_stiffness / (soil_stiffness + tire_stiffness);
}

double soil_stiffness_from_combined(double combined, double tire_stiffness) {
  if (!(tire_stiffness > 0.0)) throw std::domain_error("tire stiffness must be positive");
  if (!(combined > 0.0)) throw std::domain_error("combined stiffness must be positive");
  if (!(combined < tire_stiffness)) {
    throw std::domain_error("combined stiffness must be below the tire stiffness");
  }
  return tire_stiffness * combined / (tire_stiffness - combined);
}

ContinuousMatrices build_matrices(const VehicleParams& params, const Eigen::VectorXd& state) {
  require_state(params, state);
  const double ms = params.sprung_mass;
  const double k = params.suspension_stiffness;
  const double c = params.suspension_damping;
  ContinuousMatrices m;

  if (params.model_order == ModelOrder::TwoDof) {
    const double mns = params.unsprung_mass;
    const double ktot = state(4);
    m.A.setZero(5, 5);
    m.A.row(0) << 0.0, 1.0, 0.0, -1.0, 0.0;
    m.A.row(1) << -k / ms, -c / ms, 0.0, c / ms, 0.0;
    m.A.row(2) << 0.0, 0.0, 0.0, 1.0, 0.0;
    m.A.row(3) << k / mns, c / mns, -ktot / mns, -c / mns, 0.0;

    m.B.setZero(5);
    m.B(2) = -1.0;

    m.G.resize(5, 5);
    m.G << 0, 1, 0, 1, 0,
           1, 1, 0, 1, 0,
           0, 0, 0, 1, 0,
           1, 1, 1, 1, 0,
           0, 0, 0, 0, 1;

    m.C.resize(2, 5);
    m.C.row(0) = m.A.row(1);
    m.C.row(1) = m.A.row(3);
    m.D.setZero(2);
    return m;
  }

  // Single mass on the joined spring, damper across (y1 - h).
  const double ktot = state(2);
  m.A.setZero(3, 3);
  m.A.row(0) << 0.0, 1.0, 0.0;
  m.A.row(1) << -ktot / ms, -c / ms, 0.0;

  m.B.resize(3);
  m.B << -1.0, c / ms, 0.0;

  m.G.resize(3, 3);
  m.G << 0, 1, 0,
         1, 1, 0,
         0, 0, 1;

  m.C = m.A.row(1);
  m.D.resize(1);
  m.D(0) = c / ms;
  return m;
}

Eigen::MatrixXd process_jacobian(const VehicleParams& params, const Eigen::VectorXd& state) {
  Eigen::MatrixXd jac = build_matrices(params, state).A;
  if (params.model_order == ModelOrder::TwoDof) {
    jac(3, 4) = -state(2) / params.unsprung_mass;
  } else {
    jac(1, 2) = -state(0) / params.sprung_mass;
  }
  return jac;
}

std::vector<Eigen::Index> acceleration_rows(ModelOrder order) {
  if (order == ModelOrder::TwoDof) return {1, 3};
  return {1};
}

Eigen::MatrixXd measurement_jacobian(const VehicleParams& params, const Eigen::VectorXd& state) {
  const Eigen::MatrixXd jac = process_jacobian(params, state);
  const auto rows = acceleration_rows(params.model_order);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), jac.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = jac.row(rows[i]);
  return out;
}

Eigen::VectorXd measurement(const VehicleParams& params, const Eigen::VectorXd& state,
                            double input) {
  const ContinuousMatrices m = build_matrices(params, state);
  return m.C * state + m.D * input;
}

}  // namespace terrasense
