#include "terrasense/discretization.hpp"

#include <stdexcept>

namespace terrasense {

Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& A, double dt, int order) {
  if (order < 1) throw std::invalid_argument("Taylor order must be at least 1");
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int j = 1; j <= order; ++j) {
    term = term * A * (dt / j);
    sum += term;
  }
  return sum;
}

Eigen::MatrixXd taylor_expm_integral(const Eigen::MatrixXd& A, double dt, int order) {
  if (order < 1) throw std::invalid_argument("Taylor order must be at least 1");
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n) * dt;
  Eigen::MatrixXd sum = term;
  for (int j = 1; j <= order; ++j) {
    term = term * A * (dt / (j + 1));
    sum += term;
  }
  return sum;
}

DiscreteModel discretize(const ContinuousMatrices& cont, const Eigen::MatrixXd& Q,
                         const Eigen::MatrixXd& R, double dt, int order) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  DiscreteModel d;
  d.dt = dt;
  d.Ak = taylor_expm(cont.A, dt, order);
  const Eigen::MatrixXd integral = taylor_expm_integral(cont.A, dt, order);
  d.Bk = integral * cont.B;
  d.Gk = integral * cont.G;
  d.Ck = cont.C;
  d.Dk = cont.D;
  d.Qk = dt * d.Gk * Q * d.Gk.transpose();
  d.Qk = 0.5 * (d.Qk + d.Qk.transpose()).eval();
  d.Rk = R;
  return d;
}

}  // namespace terrasense
