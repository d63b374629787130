#include "terrasense/sckf.hpp"

#include <cmath>

namespace terrasense {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw DivergenceError(std::string("non-finite ") + what);
}

// (1/sqrt(2n)) [X_1 - m, ..., X_2n - m]
Eigen::MatrixXd weighted_centered(const Eigen::MatrixXd& points, const Eigen::VectorXd& mean) {
  const double w = 1.0 / std::sqrt(static_cast<double>(points.cols()));
  return (points.colwise() - mean) * w;
}

}  // namespace

FilterEstimate FilterEstimate::from_diagonal(Eigen::VectorXd mean,
                                             const Eigen::VectorXd& variances) {
  if (mean.size() != variances.size()) {
    throw std::invalid_argument("mean and covariance dimensions differ");
  }
  if ((variances.array() < 0.0).any()) {
    throw std::invalid_argument("variances must be non-negative");
  }
  return FilterEstimate{std::move(mean), variances.cwiseSqrt().asDiagonal()};
}

Eigen::VectorXd CubatureSet::mean() const { return points.rowwise().mean(); }

Eigen::MatrixXd CubatureSet::covariance(const Eigen::VectorXd& about) const {
  const Eigen::MatrixXd centered = points.colwise() - about;
  return centered * centered.transpose() / static_cast<double>(points.cols());
}

CubatureSet cubature_points(const FilterEstimate& est) {
  const Eigen::Index n = est.mean.size();
  const Eigen::MatrixXd spread = est.sqrt_cov * std::sqrt(static_cast<double>(n));
  CubatureSet set;
  set.points.resize(n, 2 * n);
  set.points.leftCols(n) = spread.colwise() + est.mean;
  set.points.rightCols(n) = (-spread).colwise() + est.mean;
  return set;
}

Eigen::MatrixXd triangularize(const Eigen::MatrixXd& Z) {
  const Eigen::Index n = Z.rows();
  if (Z.cols() < n) throw std::invalid_argument("triangularize needs at least as many columns as rows");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z.transpose());
  Eigen::MatrixXd S =
      qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (S(j, j) < 0.0) S.col(j) = -S.col(j);
  }
  return S;
}

FilterEstimate sckf_predict(const FilterEstimate& est, const FilterModel& model, double input) {
  const Eigen::Index n = est.mean.size();
  const CubatureSet set = cubature_points(est);

  Eigen::MatrixXd propagated(n, set.size());
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    propagated.col(i) = model.propagate(set.points.col(i), input);
  }
  require_finite(propagated, "propagated cubature points");

  FilterEstimate pred;
  pred.mean = propagated.rowwise().mean();

  const Eigen::MatrixXd q_factor = model.process_noise_factor(est.mean);
  Eigen::MatrixXd compound(n, set.size() + q_factor.cols());
  compound << weighted_centered(propagated, pred.mean), q_factor;
  pred.sqrt_cov = triangularize(compound);
  require_finite(pred.sqrt_cov, "predicted square-root covariance");
  return pred;
}

FilterEstimate sckf_correct(const FilterEstimate& pred, const Eigen::VectorXd& z,
                            const FilterModel& model, double input) {
  const Eigen::Index n = pred.mean.size();
  const Eigen::Index p = model.measurement_dim();
  if (z.size() != p) throw std::invalid_argument("measurement dimension mismatch");

  const CubatureSet set = cubature_points(pred);
  Eigen::MatrixXd projected(p, set.size());
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    projected.col(i) = model.observe(set.points.col(i), input);
  }
  require_finite(projected, "measurement points");
  const Eigen::VectorXd z_pred = projected.rowwise().mean();

  const Eigen::MatrixXd z_centered = weighted_centered(projected, z_pred);
  const Eigen::MatrixXd r_factor = model.measurement_noise_factor();

  Eigen::MatrixXd innovation(p, set.size() + r_factor.cols());
  innovation << z_centered, r_factor;
  const Eigen::MatrixXd s_z = triangularize(innovation);

  const double scale = s_z.diagonal().cwiseAbs().maxCoeff();
  if (!(s_z.diagonal().minCoeff() > 1e-14 * scale) || !std::isfinite(scale)) {
    throw DivergenceError("singular innovation square-root factor");
  }

  const Eigen::MatrixXd x_centered = weighted_centered(set.points, pred.mean);
  const Eigen::MatrixXd cross = x_centered * z_centered.transpose();

  // W = (P_xz / S_z^T) / S_z, i.e. W S_z S_z^T = P_xz.
  const auto lower = s_z.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd y = lower.solve(cross.transpose());
  const Eigen::MatrixXd gain = lower.transpose().solve(y).transpose();

  FilterEstimate post;
  post.mean = pred.mean + gain * (z - z_pred);

  Eigen::MatrixXd compound(n, set.size() + r_factor.cols());
  compound << x_centered - gain * z_centered, gain * r_factor;
  post.sqrt_cov = triangularize(compound);
  require_finite(post.mean, "updated mean");
  require_finite(post.sqrt_cov, "updated square-root covariance");
  return post;
}

}  // namespace terrasense
