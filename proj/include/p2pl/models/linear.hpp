#pragma once

#include "p2pl/core.hpp"

namespace p2pl {

struct LinearParams {
  /// Added to the Gram diagonal so rank-deficient designs stay solvable.
  double jitter = 1e-10;
};

/// Ordinary least squares on standardized (centered) features.
struct LinearModel {
  double intercept = 0.0;
  Vector coef;  // per standardized feature

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& xs) const { return intercept + xs.dot(coef); }
};

/// Xs must be column-centered on the training rows, so the intercept is mean(y).
inline LinearModel fit_linear(const Matrix& Xs, const Vector& y, const LinearParams& params) {
  LinearModel m;
  m.intercept = y.mean();
  Matrix gram = Xs.transpose() * Xs;
  gram.diagonal().array() += params.jitter;
  const Vector rhs = Xs.transpose() * (y.array() - m.intercept).matrix();
  m.coef = gram.ldlt().solve(rhs);
  if (!m.coef.allFinite()) throw DataError("linear regression: normal equations are singular");
  return m;
}

}  // namespace p2pl
