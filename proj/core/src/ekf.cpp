#include "terrasense/ekf.hpp"

#include "terrasense/sckf.hpp"

namespace terrasense {

GaussianEstimate ekf_predict(const GaussianEstimate& est, const FilterModel& model,
                             double input) {
  const Eigen::MatrixXd F = model.transition_jacobian(est.mean);
  GaussianEstimate pred;
  pred.mean = model.propagate(est.mean, input);
  pred.cov = F * est.cov * F.transpose() + model.process_covariance(est.mean);
  if (!pred.mean.allFinite() || !pred.cov.allFinite()) {
    throw DivergenceError("non-finite EKF prediction");
  }
  return pred;
}

GaussianEstimate ekf_correct(const GaussianEstimate& pred, const Eigen::VectorXd& z,
                             const FilterModel& model, double input) {
  if (z.size() != model.measurement_dim()) {
    throw std::invalid_argument("measurement dimension mismatch");
  }
  const Eigen::MatrixXd H = model.observation_jacobian(pred.mean);
  const Eigen::MatrixXd S = H * pred.cov * H.transpose() + model.measurement_covariance();
  const Eigen::MatrixXd PHt = pred.cov * H.transpose();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw DivergenceError("singular EKF innovation covariance");
  const Eigen::MatrixXd gain = ldlt.solve(PHt.transpose()).transpose();

  const Eigen::Index n = pred.mean.size();
  GaussianEstimate post;
  post.mean = pred.mean + gain * (z - model.observe(pred.mean, input));
  post.cov = (Eigen::MatrixXd::Identity(n, n) - gain * H) * pred.cov;
  if (!post.mean.allFinite() || !post.cov.allFinite()) {
    throw DivergenceError("non-finite EKF update");
  }
  return post;
}

GaussianEstimate ekf_step(const GaussianEstimate& est, const Eigen::VectorXd& z, double input,
                          double next_input, const FilterModel& model) {
  return ekf_correct(ekf_predict(est, model, input), z, model, next_input);
}

}  // namespace terrasense
