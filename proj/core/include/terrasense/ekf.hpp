#pragma once

#include "terrasense/filter_model.hpp"

#include <Eigen/Dense>

namespace terrasense {

struct GaussianEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// x = Ak x + Bk u,  P = A_x P A_x^T + Qk, Jacobian and Qk taken at the prior mean.
GaussianEstimate ekf_predict(const GaussianEstimate& est, const FilterModel& model, double input);

/// Gain from the measurement Jacobian at the predicted mean, update P = (I - W C_x) P.
GaussianEstimate ekf_correct(const GaussianEstimate& pred, const Eigen::VectorXd& z,
                             const FilterModel& model, double input);

/// One full cycle: predict with `input`, correct against `z` taken with `next_input`.
GaussianEstimate ekf_step(const GaussianEstimate& est, const Eigen::VectorXd& z, double input,
                          double next_input, const FilterModel& model);

}  // namespace terrasense
