#include <cmath>

#include <Eigen/Dense>

#include "cogeffort/error.hpp"
#include "cogeffort/kernels.hpp"
#include "cogeffort/ml.hpp"

namespace cogeffort::ml {

// Two-class linear discriminant with pooled within-class covariance
// regularized by shrinkage * I. Decision: w.x + b > 0 -> class 1 with
//   w = S^-1 (mu1 - mu0),  b = -w.(mu0 + mu1)/2 + log(n1 / n0).
LdaModel fit_lda(const Matrix& x, std::span<const int> y, double shrinkage) {
  const auto d = static_cast<Eigen::Index>(x.cols());
  Eigen::VectorXd mu[2] = {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  double count[2] = {0.0, 0.0};
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const int c = y[r];
    mu[c] += Eigen::Map<const Eigen::VectorXd>(x.row(r).data(), d);
    count[c] += 1.0;
  }
  mu[0] /= count[0];
  mu[1] /= count[1];

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const Eigen::VectorXd dev = Eigen::Map<const Eigen::VectorXd>(x.row(r).data(), d) - mu[y[r]];
    cov.selfadjointView<Eigen::Lower>().rankUpdate(dev);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  const double dof = std::max(1.0, count[0] + count[1] - 2.0);
  cov /= dof;
  cov.diagonal().array() += shrinkage;

  const Eigen::VectorXd w = cov.ldlt().solve(mu[1] - mu[0]);
  LdaModel m;
  m.weights.assign(w.data(), w.data() + d);
  m.bias = -0.5 * w.dot(mu[0] + mu[1]) + std::log(count[1] / count[0]);
  if (!std::isfinite(m.bias)) throw DataError("LDA fit produced non-finite coefficients");
  return m;
}

int predict(const LdaModel& m, std::span<const double> x) {
  return kernels::dot(m.weights, x) + m.bias > 0.0 ? 1 : 0;
}

}  // namespace cogeffort::ml
