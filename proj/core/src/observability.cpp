#include "terrasense/observability.hpp"

#include <cmath>
#include <stdexcept>

namespace terrasense {

BilinearSystem BilinearSystem::from_vehicle(const VehicleParams& params) {
  params.validate();
  const Eigen::Index n = params.state_dim();
  Eigen::VectorXd probe = Eigen::VectorXd::Zero(n);
  const ContinuousMatrices at_zero = build_matrices(params, probe);
  probe(n - 1) = 1.0;
  const ContinuousMatrices at_one = build_matrices(params, probe);

  BilinearSystem sys;
  sys.A0 = at_zero.A;
  sys.A1 = at_one.A - at_zero.A;
  sys.C0 = at_zero.C;
  sys.C1 = at_one.C - at_zero.C;
  sys.B = at_zero.B;
  sys.D = at_zero.D;
  sys.scheduling_index = n - 1;
  return sys;
}

BilinearSystem BilinearSystem::linear(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                      const Eigen::MatrixXd& C) {
  BilinearSystem sys;
  sys.A0 = A;
  sys.A1 = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  sys.C0 = C;
  sys.C1 = Eigen::MatrixXd::Zero(C.rows(), C.cols());
  sys.B = B;
  sys.D = Eigen::VectorXd::Zero(C.rows());
  return sys;
}

BilinearSystem BilinearSystem::with_outputs(const std::vector<Eigen::Index>& rows) const {
  BilinearSystem out = *this;
  const auto p = static_cast<Eigen::Index>(rows.size());
  out.C0.resize(p, state_dim());
  out.C1.resize(p, state_dim());
  out.D.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::Index r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= output_dim()) throw std::out_of_range("output row out of range");
    out.C0.row(i) = C0.row(r);
    out.C1.row(i) = C1.row(r);
    out.D(i) = D(r);
  }
  return out;
}

Eigen::VectorXd BilinearSystem::rhs(const Eigen::VectorXd& x, double u) const {
  return (A0 + x(scheduling_index) * A1) * x + B * u;
}

Eigen::VectorXd BilinearSystem::output(const Eigen::VectorXd& x, double u) const {
  return (C0 + x(scheduling_index) * C1) * x + D * u;
}

// For constant u, L_f^(i)[h](x) is the i-th time derivative of y along the
// trajectory through x. The trajectory's Taylor coefficients follow from the
// bilinear right-hand side via Cauchy products, so L^(i) = i! y_i.
std::vector<Eigen::VectorXd> lie_derivatives(const BilinearSystem& sys, const Eigen::VectorXd& x,
                                             double u, int count) {
  const Eigen::Index s = sys.scheduling_index;
  std::vector<Eigen::VectorXd> coeff{x};
  std::vector<Eigen::VectorXd> out;
  double factorial = 1.0;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd product = Eigen::VectorXd::Zero(x.size());  // (s * x)_k
    for (int j = 0; j <= k; ++j) product += coeff[static_cast<std::size_t>(j)](s) * coeff[static_cast<std::size_t>(k - j)];
    const Eigen::VectorXd& ck = coeff[static_cast<std::size_t>(k)];

    Eigen::VectorXd y = sys.C0 * ck + sys.C1 * product;
    if (k == 0) y += sys.D * u;
    if (k > 0) factorial *= k;
    out.push_back(factorial * y);

    Eigen::VectorXd next = sys.A0 * ck + sys.A1 * product;
    if (k == 0) next += sys.B * u;
    coeff.push_back(next / static_cast<double>(k + 1));
  }
  return out;
}

ObservabilityReport observability_report(const BilinearSystem& sys, const Eigen::VectorXd& x,
                                         double u, double tol) {
  if (!(tol >= 0.0 && tol < 1.0)) throw std::invalid_argument("tolerance must lie in [0, 1)");
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index p = sys.output_dim();
  if (x.size() != n) throw std::invalid_argument("state dimension mismatch");

  ObservabilityReport report;
  report.outside_physical_regime = (sys.A1.array() != 0.0).any() && !(x(sys.scheduling_index) > 0.0);
  report.matrix.setZero(n * p, n);

  for (Eigen::Index j = 0; j < n; ++j) {
    const double step = 1e-6 * std::max(1.0, std::abs(x(j)));
    Eigen::VectorXd plus = x, minus = x;
    plus(j) += step;
    minus(j) -= step;
    const auto up = lie_derivatives(sys, plus, u, static_cast<int>(n));
    const auto down = lie_derivatives(sys, minus, u, static_cast<int>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      report.matrix.block(i * p, j, p, 1) = (up[idx] - down[idx]) / (2.0 * step);
    }
  }

  if (p == 0) {
    report.singular_values = Eigen::VectorXd::Zero(0);
    return report;
  }

  // Row and column equilibration keeps the rank decision independent of the
  // physical units of each state and of the growth of higher Lie derivatives.
  Eigen::MatrixXd scaled = report.matrix;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double norm = scaled.col(j).norm();
    if (norm > 0.0) scaled.col(j) /= norm;
  }
  for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
    const double norm = scaled.row(i).norm();
    if (norm > 0.0) scaled.row(i) /= norm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  report.singular_values = svd.singularValues();
  const double largest = report.singular_values.size() > 0 ? report.singular_values(0) : 0.0;
  for (Eigen::Index i = 0; i < report.singular_values.size(); ++i) {
    if (largest > 0.0 && report.singular_values(i) > tol * largest) ++report.rank;
  }
  report.observable = report.rank == n;
  return report;
}

ObservabilityReport lie_observability(const VehicleParams& params, const Eigen::VectorXd& state,
                                      double input, double tol) {
  if (state.size() != params.state_dim()) throw std::invalid_argument("state dimension mismatch");
  return observability_report(BilinearSystem::from_vehicle(params), state, input, tol);
}

}  // namespace terrasense
