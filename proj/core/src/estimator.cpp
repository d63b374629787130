#include "terrasense/estimator.hpp"

namespace terrasense {

std::string to_string(FilterKind kind) { return kind == FilterKind::SCKF ? "sckf" : "ekf"; }

FilterKind filter_kind_from_string(const std::string& name) {
  if (name == "sckf" || name == "SCKF") return FilterKind::SCKF;
  if (name == "ekf" || name == "EKF") return FilterKind::EKF;
  throw std::invalid_argument("unknown filter '" + name + "' (expected sckf or ekf)");
}

void Estimator::step(double input, const Eigen::VectorXd& z, double next_input) {
  try {
    advance(input, z, next_input);
  } catch (const DivergenceError& e) {
    throw DivergenceError(e.what(), steps_ + 1);
  }
  ++steps_;
}

void Estimator::correct(const Eigen::VectorXd& z, double input) {
  try {
    update(z, input);
  } catch (const DivergenceError& e) {
    throw DivergenceError(e.what(), steps_);
  }
}

void SquareRootCubatureFilter::update(const Eigen::VectorXd& z, double input) {
  est_ = sckf_correct(est_, z, model_, input);
}

void ExtendedKalmanFilter::update(const Eigen::VectorXd& z, double input) {
  est_ = ekf_correct(est_, z, model_, input);
}

void SquareRootCubatureFilter::advance(double input, const Eigen::VectorXd& z,
                                       double next_input) {
  est_ = sckf_correct(sckf_predict(est_, model_, input), z, model_, next_input);
}

void ExtendedKalmanFilter::advance(double input, const Eigen::VectorXd& z, double next_input) {
  est_ = ekf_step(est_, z, input, next_input, model_);
}

std::unique_ptr<Estimator> make_estimator(FilterKind kind, const FilterModel& model,
                                          const Eigen::VectorXd& mean,
                                          const Eigen::VectorXd& variances) {
  if (kind == FilterKind::SCKF) {
    return std::make_unique<SquareRootCubatureFilter>(model,
                                                      FilterEstimate::from_diagonal(mean, variances));
  }
  return std::make_unique<ExtendedKalmanFilter>(
      model, GaussianEstimate{mean, Eigen::MatrixXd(variances.asDiagonal())});
}

}  // namespace terrasense
