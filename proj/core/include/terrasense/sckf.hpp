#pragma once

#include "terrasense/filter_model.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace terrasense {

/// Raised when a filter produces non-finite numbers or a singular innovation factor.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what, long step = -1)
      : std::runtime_error(what), step_(step) {}
  /// Filter step at which divergence was detected, -1 when unknown.
  long step() const { return step_; }

 private:
  long step_;
};

/// Mean and lower-triangular square-root covariance factor, P = S S^T.
struct FilterEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd sqrt_cov;

  Eigen::MatrixXd covariance() const { return sqrt_cov * sqrt_cov.transpose(); }
  /// S0 = sqrt(diag(P0)); requires a diagonal covariance with non-negative entries.
  static FilterEstimate from_diagonal(Eigen::VectorXd mean, const Eigen::VectorXd& variances);
};

/// 2n equal-weight points of the third-degree spherical-radial rule, one per column.
struct CubatureSet {
  Eigen::MatrixXd points;

  Eigen::Index size() const { return points.cols(); }
  Eigen::VectorXd mean() const;
  /// (1/2n) sum (X_i - m)(X_i - m)^T around the given mean.
  Eigen::MatrixXd covariance(const Eigen::VectorXd& about) const;
};

/// X_i = S xi_i + x, with xi = sqrt(n) [I, -I].
CubatureSet cubature_points(const FilterEstimate& est);

/// Lower-triangular S with S S^T = Z Z^T, taken from the R factor of qr(Z^T).
/// Diagonal entries are made non-negative by flipping column signs.
Eigen::MatrixXd triangularize(const Eigen::MatrixXd& Z);

/// Time update: propagate each cubature point through the model discretized at
/// that point, then S_{k+1|k} = tria([chi*, sqrt(Qk)]).
FilterEstimate sckf_predict(const FilterEstimate& est, const FilterModel& model, double input);

/// Measurement update with input feed-through `input` (the input at the
/// measurement time). The gain is formed by two triangular solves.
FilterEstimate sckf_correct(const FilterEstimate& pred, const Eigen::VectorXd& z,
                            const FilterModel& model, double input);

}  // namespace terrasense
