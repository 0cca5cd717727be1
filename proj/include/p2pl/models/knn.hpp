#pragma once

#include "p2pl/core.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace p2pl {

struct KnnParams {
  int k = 5;
};

/// Stores the standardized training set. Prediction averages the k nearest
/// responses (Euclidean); equal distances go to the lower row index.
struct KnnModel {
  int k = 5;
  Matrix train;  // standardized rows
  Vector y;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& xs) const {
    const auto n = static_cast<std::size_t>(train.rows());
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = {(train.row(static_cast<Eigen::Index>(i)) - xs).squaredNorm(), i};
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
    double s = 0.0;
    for (std::size_t i = 0; i < kk; ++i) s += y(static_cast<Eigen::Index>(d[i].second));
    return s / static_cast<double>(kk);
  }
};

inline KnnModel fit_knn(const Matrix& Xs, const Vector& y, const KnnParams& params) {
  if (params.k < 1) throw std::invalid_argument("knn: k must be positive");
  return KnnModel{params.k, Xs, y};
}

}  // namespace p2pl
