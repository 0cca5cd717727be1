#pragma once

#include "p2pl/core.hpp"

namespace p2pl {

/// Per-feature z-scoring learned on training data. Zero-variance features
/// get sd = 1 so they map to a constant 0.
struct Standardizer {
  Vector mean;
  Vector sd;

  static Standardizer fit(const Matrix& X) {
    Standardizer s;
    const auto n = static_cast<double>(X.rows());
    s.mean = X.colwise().mean().transpose();
    s.sd.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double var = (X.col(j).array() - s.mean(j)).square().sum() / n;
      const double sd = std::sqrt(var);
      s.sd(j) = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
    }
    return s;
  }

  static Standardizer identity(Eigen::Index p) { return {Vector::Zero(p), Vector::Ones(p)}; }

  Matrix apply(const Matrix& X) const {
    return (X.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
  }
};

}  // namespace p2pl
