#pragma once

#include "p2pl/core.hpp"

namespace p2pl {

/// Coefficient of determination, 1 - RSS/TSS. Not clamped: a model worse
/// than the mean scores below zero.
inline double r_squared(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size()) throw std::invalid_argument("r_squared: length mismatch");
  if (y.size() < 2) throw std::invalid_argument("r_squared: need at least two observations");
  const double mean = y.mean();
  const double tss = (y.array() - mean).square().sum();
  if (tss == 0.0) throw DataError("r_squared: response is constant (total sum of squares is zero)");
  const double rss = (y - yhat).squaredNorm();
  return 1.0 - rss / tss;
}

/// Share of positions where the labels agree.
inline double accuracy(const Vector& labels, const Vector& predicted) {
  if (labels.size() != predicted.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (labels.size() == 0) throw std::invalid_argument("accuracy: empty input");
  const auto correct = (labels.array() == predicted.array()).count();
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  double tpr() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
  double tnr() const { return tn + fp ? static_cast<double>(tn) / static_cast<double>(tn + fp) : 0.0; }
  double accuracy() const {
    return total() ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0;
  }
};

/// Counts for binary labels; 1 is the positive ("funded") class.
inline ConfusionMatrix confusion(const Vector& labels, const Vector& predicted) {
  if (labels.size() != predicted.size()) throw std::invalid_argument("confusion: length mismatch");
  ConfusionMatrix cm;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const bool actual = labels(i) == 1.0;
    const bool pred = predicted(i) == 1.0;
    if (actual && pred) ++cm.tp;
    else if (!actual && pred) ++cm.fp;
    else if (actual) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

}  // namespace p2pl
