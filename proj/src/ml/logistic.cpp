#include <cmath>

#include <Eigen/Dense>

#include "cogeffort/error.hpp"
#include "cogeffort/kernels.hpp"
#include "cogeffort/ml.hpp"

namespace cogeffort::ml {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double predict_proba(const LogisticModel& m, std::span<const double> x) {
  return sigmoid(kernels::dot(m.weights, x) + m.intercept);
}

int predict(const LogisticModel& m, std::span<const double> x) { return predict_proba(m, x) > 0.5 ? 1 : 0; }

// Ridge-penalized maximum likelihood:
//   minimize  sum_i [log(1 + e^{z_i}) - y_i z_i] + lambda/2 ||w||^2,  z = Xw + b
// by damped Newton iterations until ||gradient||_2 <= tol. The intercept is
// not penalized.
LogisticModel fit_logistic(const Matrix& x, std::span<const int> y, double lambda, double tol, int max_iter) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  // Column 0 is the intercept.
  RowMajor a(n, d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) a(i, j + 1) = x.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) target(i) = y[static_cast<std::size_t>(i)];

  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, lambda);
  penalty(0) = 0.0;

  auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd z = a * beta;
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) f += softplus(z(i)) - target(i) * z(i);
    return f + 0.5 * (penalty.array() * beta.array().square()).sum();
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
  double f = objective(beta);
  LogisticModel m;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd z = a * beta;
    Eigen::VectorXd p(n), s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = sigmoid(z(i));
      s(i) = p(i) * (1.0 - p(i));
    }
    const Eigen::VectorXd grad = a.transpose() * (p - target) + penalty.cwiseProduct(beta);
    m.gradient_norm = grad.norm();
    m.iterations = it;
    if (m.gradient_norm <= tol) break;

    Eigen::MatrixXd hess = a.transpose() * s.asDiagonal() * a;
    hess.diagonal() += penalty;
    hess.diagonal().array() += 1e-10;  // keeps the unpenalized intercept solvable
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    double t = 1.0;
    const double slope = grad.dot(step);
    Eigen::VectorXd next = beta - step;
    double f_next = objective(next);
    while (f_next > f - 1e-4 * t * slope && t > 1e-10) {
      t *= 0.5;
      next = beta - t * step;
      f_next = objective(next);
    }
    if (!(f_next <= f)) break;
    beta = next;
    f = f_next;
    m.iterations = it + 1;
  }
  if (m.iterations >= max_iter || m.gradient_norm > tol) {
    // Report final gradient after the last accepted step.
    const Eigen::VectorXd z = a * beta;
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) p(i) = sigmoid(z(i));
    m.gradient_norm = (a.transpose() * (p - target) + penalty.cwiseProduct(beta)).norm();
  }
  m.intercept = beta(0);
  m.weights.assign(beta.data() + 1, beta.data() + 1 + d);
  return m;
}

}  // namespace cogeffort::ml
