#pragma once

#include "p2pl/core.hpp"
#include "p2pl/metrics.hpp"
#include "p2pl/models/forest.hpp"
#include "p2pl/models/knn.hpp"
#include "p2pl/models/linear.hpp"
#include "p2pl/models/logit.hpp"
#include "p2pl/models/standardize.hpp"
#include "p2pl/models/svm.hpp"

#include <string>
#include <variant>
#include <vector>

namespace p2pl {

enum class ModelKind { linear, logit, random_forest, svm, knn };
enum class Task { regression, classification };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::linear: return "linear";
    case ModelKind::logit: return "logit";
    case ModelKind::random_forest: return "rf";
    case ModelKind::svm: return "svm";
    case ModelKind::knn: return "knn";
  }
  return "?";
}

inline std::string_view to_string(Task t) { return t == Task::regression ? "regression" : "classification"; }

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "linear") return ModelKind::linear;
  if (s == "logit") return ModelKind::logit;
  if (s == "rf" || s == "random_forest") return ModelKind::random_forest;
  if (s == "svm") return ModelKind::svm;
  if (s == "knn") return ModelKind::knn;
  throw std::invalid_argument("unknown model kind '" + std::string(s) + "' (expected linear|logit|rf|svm|knn)");
}

inline Task parse_task(std::string_view s) {
  if (s == "regression") return Task::regression;
  if (s == "classification") return Task::classification;
  throw std::invalid_argument("unknown task '" + std::string(s) + "'");
}

/// Alternative index matches ModelKind.
using Hyperparameters = std::variant<LinearParams, LogitParams, ForestParams, SvmParams, KnnParams>;

struct ModelSpec {
  Task task = Task::regression;
  Hyperparameters params = LinearParams{};
  std::uint64_t seed = 0;

  ModelKind kind() const { return static_cast<ModelKind>(params.index()); }

  void validate() const {
    if (kind() == ModelKind::linear && task != Task::regression)
      throw std::invalid_argument("linear model supports regression only");
    if (kind() == ModelKind::logit && task != Task::classification)
      throw std::invalid_argument("logit model supports classification only");
  }

  static ModelSpec make(ModelKind kind, Task task, std::uint64_t seed = 0) {
    ModelSpec s;
    s.task = task;
    s.seed = seed;
    switch (kind) {
      case ModelKind::linear: s.params = LinearParams{}; break;
      case ModelKind::logit: s.params = LogitParams{}; break;
      case ModelKind::random_forest: s.params = ForestParams{}; break;
      case ModelKind::svm: s.params = SvmParams{}; break;
      case ModelKind::knn: s.params = KnnParams{}; break;
    }
    s.validate();
    return s;
  }
};

class TrainedModel {
 public:
  using Fitted = std::variant<LinearModel, LogitModel, ForestModel, SvmModel, KnnModel>;

  TrainedModel(ModelSpec spec, std::vector<std::string> feature_names, Standardizer standardizer, Fitted fitted,
               std::size_t n_train)
      : spec_(std::move(spec)), names_(std::move(feature_names)), std_(std::move(standardizer)),
        fitted_(std::move(fitted)), n_train_(n_train) {
    if (fitted_.index() != spec_.params.index()) throw std::invalid_argument("fitted parameters do not match spec");
  }

  const ModelSpec& spec() const { return spec_; }
  ModelKind kind() const { return spec_.kind(); }
  Task task() const { return spec_.task; }
  const std::vector<std::string>& feature_names() const { return names_; }
  const Standardizer& standardizer() const { return std_; }
  const Fitted& fitted() const { return fitted_; }
  std::size_t n_train() const { return n_train_; }

  bool uses_feature(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
  }

  /// Regression estimate, or probability of class 1 for classifiers.
  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    const Eigen::RowVectorXd xs = (x - std_.mean.transpose()).array() / std_.sd.transpose().array();
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, LinearModel>) return m.predict_row(xs);
          else if constexpr (std::is_same_v<M, LogitModel>) return m.probability_row(xs);
          else if constexpr (std::is_same_v<M, ForestModel>) return m.predict_row(xs);
          else if constexpr (std::is_same_v<M, SvmModel>) {
            const double f = m.decision_row(xs);
            return spec_.task == Task::classification ? detail::sigmoid(f) : f;
          } else return m.predict_row(xs);
        },
        fitted_);
  }

 private:
  ModelSpec spec_;
  std::vector<std::string> names_;
  Standardizer std_;
  Fitted fitted_;
  std::size_t n_train_ = 0;
};

inline bool is_binary_labels(const Vector& y) {
  return (y.array() == 0.0 || y.array() == 1.0).all();
}

/// Train on all features of `train`, in their order.
inline TrainedModel fit(const ModelSpec& spec, const Dataset& train) {
  spec.validate();
  train.check();
  if (train.rows() == 0) throw DataError("fit: empty training set");
  if (train.cols() == 0) throw DataError("fit: no features");
  const Vector& y = train.y;
  if (spec.task == Task::classification) {
    if (!is_binary_labels(y)) throw DataError("fit: classification labels must be 0 or 1");
    const double s = y.sum();
    if (s == 0.0 || s == static_cast<double>(y.size()))
      throw DataError("fit: classification needs both classes in the training set");
  }

  const bool scale = spec.kind() != ModelKind::random_forest;
  Standardizer st = scale ? Standardizer::fit(train.X) : Standardizer::identity(train.X.cols());
  const Matrix Xs = scale ? st.apply(train.X) : train.X;
  const bool cls = spec.task == Task::classification;

  TrainedModel::Fitted fitted = std::visit(
      [&](const auto& p) -> TrainedModel::Fitted {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearParams>) return fit_linear(Xs, y, p);
        else if constexpr (std::is_same_v<P, LogitParams>) return fit_logit(Xs, y, p);
        else if constexpr (std::is_same_v<P, ForestParams>) return fit_forest(Xs, y, cls, p, spec.seed);
        else if constexpr (std::is_same_v<P, SvmParams>) return cls ? fit_svc(Xs, y, p) : fit_svr(Xs, y, p);
        else return fit_knn(Xs, y, p);
      },
      spec.params);
  return TrainedModel(spec, train.feature_names, std::move(st), std::move(fitted), train.rows());
}

/// Predictions for a matrix whose columns are the fit-time features in order.
inline Vector predict(const TrainedModel& m, const Matrix& X) {
  if (static_cast<std::size_t>(X.cols()) != m.feature_names().size())
    throw DataError("predict: expected " + std::to_string(m.feature_names().size()) + " columns, got " +
                    std::to_string(X.cols()));
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = m.predict_row(X.row(i));
  return out;
}

/// Predictions for a dataset, selecting the model's features by name.
inline Vector predict(const TrainedModel& m, const Dataset& d) {
  if (d.feature_names == m.feature_names()) return predict(m, d.X);
  return predict(m, select_features(d, m.feature_names()).X);
}

/// Hard label for a class-1 probability: >= 0.5 is class 1, except that an
/// exact half vote of k-NN goes to class 0.
inline bool is_positive(const TrainedModel& m, double probability) {
  return m.kind() == ModelKind::knn ? probability > 0.5 : probability >= 0.5;
}

inline Vector predict_labels(const TrainedModel& m, const Dataset& d) {
  if (m.task() != Task::classification) throw std::invalid_argument("predict_labels: model is a regressor");
  const Vector p = predict(m, d);
  Vector out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) out(i) = is_positive(m, p(i)) ? 1.0 : 0.0;
  return out;
}

/// Test-set score: R^2 for regression, accuracy for classification.
inline double score(const TrainedModel& m, const Dataset& test) {
  if (m.task() == Task::classification) return accuracy(test.y, predict_labels(m, test));
  return r_squared(test.y, predict(m, test));
}

constexpr int kPermutationRepeats = 5;

/// Mean drop of the test score when one feature column is shuffled, over
/// kPermutationRepeats seeded shuffles, clamped at zero. Regression uses the
/// MSE increase relative to the response variance (the R^2 drop), which stays
/// defined when the validation response is constant.
inline Vector permutation_importance(const TrainedModel& m, const Dataset& validation) {
  const Dataset v = select_features(validation, m.feature_names());
  if (v.rows() == 0) throw DataError("permutation importance: empty validation set");
  const bool cls = m.task() == Task::classification;
  const double var = cls ? 1.0 : (v.y.array() - v.y.mean()).square().mean();
  const double norm = var > 0.0 ? var : 1.0;
  const auto metric = [&](const Matrix& X) {
    Dataset tmp = v;
    tmp.X = X;
    if (cls) return accuracy(v.y, predict_labels(m, tmp));
    return -(v.y - predict(m, X)).squaredNorm() / static_cast<double>(v.rows()) / norm;
  };
  const double base = metric(v.X);
  Vector imp = Vector::Zero(v.X.cols());
  for (Eigen::Index j = 0; j < v.X.cols(); ++j) {
    double drop = 0.0;
    for (int r = 0; r < kPermutationRepeats; ++r) {
      Rng rng(derive_seed(derive_seed(m.spec().seed, 0x5045524DULL), static_cast<std::uint64_t>(j * kPermutationRepeats + r)));
      std::vector<Eigen::Index> order(static_cast<std::size_t>(v.X.rows()));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      rng.shuffle(order);
      Matrix Xp = v.X;
      for (Eigen::Index i = 0; i < Xp.rows(); ++i) Xp(i, j) = v.X(order[static_cast<std::size_t>(i)], j);
      drop += base - metric(Xp);
    }
    imp(j) = std::max(0.0, drop / kPermutationRepeats);
  }
  return imp;
}

/// One non-negative score per model feature (larger = more important).
inline Vector feature_importance(const TrainedModel& m, const Dataset& validation) {
  return std::visit(
      [&](const auto& f) -> Vector {
        using M = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<M, LinearModel> || std::is_same_v<M, LogitModel>) return f.coef.cwiseAbs();
        else if constexpr (std::is_same_v<M, ForestModel>) return f.importance;
        else if constexpr (std::is_same_v<M, SvmModel>) {
          if (f.kernel.kind == SvmKernel::linear) return f.w.cwiseAbs();
          return permutation_importance(m, validation);
        } else return permutation_importance(m, validation);
      },
      m.fitted());
}

}  // namespace p2pl
