#pragma once

#include "terrasense/ekf.hpp"
#include "terrasense/sckf.hpp"

#include <memory>
#include <string>

namespace terrasense {

enum class FilterKind { SCKF, EKF };

std::string to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& name);

/// Recursive estimator driven one sample at a time. Instances are not
/// thread-safe; the model they reference must outlive them.
class Estimator {
 public:
  virtual ~Estimator() = default;

  /// Advance from t_k to t_{k+1}: predict with u_k, then correct with z_{k+1}
  /// and u_{k+1}. Throws DivergenceError tagged with the step index.
  void step(double input, const Eigen::VectorXd& z, double next_input);
  /// Measurement update only.
  void correct(const Eigen::VectorXd& z, double input);

  virtual Eigen::VectorXd mean() const = 0;
  virtual Eigen::MatrixXd covariance() const = 0;
  long steps() const { return steps_; }

 protected:
  virtual void advance(double input, const Eigen::VectorXd& z, double next_input) = 0;
  virtual void update(const Eigen::VectorXd& z, double input) = 0;

 private:
  long steps_ = 0;
};

class SquareRootCubatureFilter final : public Estimator {
 public:
  SquareRootCubatureFilter(const FilterModel& model, FilterEstimate initial)
      : model_(model), est_(std::move(initial)) {}

  Eigen::VectorXd mean() const override { return est_.mean; }
  Eigen::MatrixXd covariance() const override { return est_.covariance(); }
  const FilterEstimate& estimate() const { return est_; }

 private:
  void advance(double input, const Eigen::VectorXd& z, double next_input) override;
  void update(const Eigen::VectorXd& z, double input) override;

  const FilterModel& model_;
  FilterEstimate est_;
};

class ExtendedKalmanFilter final : public Estimator {
 public:
  ExtendedKalmanFilter(const FilterModel& model, GaussianEstimate initial)
      : model_(model), est_(std::move(initial)) {}

  Eigen::VectorXd mean() const override { return est_.mean; }
  Eigen::MatrixXd covariance() const override { return est_.cov; }

 private:
  void advance(double input, const Eigen::VectorXd& z, double next_input) override;
  void update(const Eigen::VectorXd& z, double input) override;

  const FilterModel& model_;
  GaussianEstimate est_;
};

/// Both filters start from the same mean and diagonal covariance.
std::unique_ptr<Estimator> make_estimator(FilterKind kind, const FilterModel& model,
                                          const Eigen::VectorXd& mean,
                                          const Eigen::VectorXd& variances);

}  // namespace terrasense
