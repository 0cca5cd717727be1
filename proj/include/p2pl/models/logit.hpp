#pragma once

#include "p2pl/core.hpp"

#include <vector>

namespace p2pl {

struct LogitParams {
  double ridge = 1e-4;
  int max_iterations = 100;
  double tolerance = 1e-8;  // on max |change in weight|
};

struct LogitModel {
  double intercept = 0.0;
  Vector coef;  // per standardized feature
  /// Penalized negative log-likelihood before the first and after each iteration.
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;

  double probability_row(const Eigen::Ref<const Eigen::RowVectorXd>& xs) const {
    const double eta = intercept + xs.dot(coef);
    return 1.0 / (1.0 + std::exp(-eta));
  }
};

namespace detail {
/// log(1 + e^x) without overflow.
inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace detail

/// Penalized negative log-likelihood. beta = (intercept, w); the intercept is
/// not penalized.
inline double logit_objective(const Vector& beta, const Matrix& X, const Vector& y, double ridge) {
  const Vector eta = (X * beta.tail(X.cols())).array() + beta(0);
  double nll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) nll += detail::softplus(eta(i)) - y(i) * eta(i);
  return nll + 0.5 * ridge * beta.tail(X.cols()).squaredNorm();
}

inline Vector logit_gradient(const Vector& beta, const Matrix& X, const Vector& y, double ridge) {
  const Vector eta = (X * beta.tail(X.cols())).array() + beta(0);
  Vector resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = detail::sigmoid(eta(i)) - y(i);
  Vector g(beta.size());
  g(0) = resid.sum();
  g.tail(X.cols()) = X.transpose() * resid + ridge * beta.tail(X.cols());
  return g;
}

/// Iteratively reweighted least squares (Newton) with step halving, so the
/// objective never increases between iterations.
inline LogitModel fit_logit(const Matrix& Xs, const Vector& y, const LogitParams& params) {
  const auto n = Xs.rows();
  const auto p = Xs.cols();
  Matrix A(n, p + 1);
  A.col(0).setOnes();
  A.rightCols(p) = Xs;

  Vector beta = Vector::Zero(p + 1);
  LogitModel m;
  double obj = logit_objective(beta, Xs, y, params.ridge);
  m.objective_trace.push_back(obj);

  for (int it = 0; it < params.max_iterations; ++it) {
    const Vector eta = A * beta;
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = detail::sigmoid(eta(i));
      w(i) = pi * (1.0 - pi);
    }
    Matrix H = A.transpose() * w.asDiagonal() * A;
    H.diagonal().tail(p).array() += params.ridge;
    H(0, 0) += 1e-12;
    const Vector g = logit_gradient(beta, Xs, y, params.ridge);
    const Vector step = H.ldlt().solve(g);
    if (!step.allFinite()) break;

    double scale = 1.0;
    Vector next = beta - step;
    double next_obj = logit_objective(next, Xs, y, params.ridge);
    while (next_obj > obj && scale > 1e-10) {
      scale *= 0.5;
      next = beta - scale * step;
      next_obj = logit_objective(next, Xs, y, params.ridge);
    }
    if (next_obj > obj) break;  // no descent possible at machine precision

    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    obj = next_obj;
    m.objective_trace.push_back(obj);
    m.iterations = it + 1;
    if (change < params.tolerance) {
      m.converged = true;
      break;
    }
  }
  m.intercept = beta(0);
  m.coef = beta.tail(p);
  return m;
}

}  // namespace p2pl
