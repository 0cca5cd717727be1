#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace p2pl;
using p2pl::testing::gaussian_matrix;
using p2pl::testing::make_dataset;

namespace {

Dataset binary_blobs(std::uint64_t seed, Eigen::Index n, Eigen::Index p, double shift) {
  Rng rng(seed);
  Matrix X = gaussian_matrix(rng, n, p);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = i % 2 ? 1.0 : 0.0;
    X(i, 0) += y(i) == 1.0 ? shift : -shift;
  }
  return make_dataset(X, y);
}

/// Largest KKT violation with an explicitly built Q matrix.
double explicit_kkt_violation(const SmoProblem& prob, const Vector& alpha) {
  const auto l = static_cast<Eigen::Index>(prob.size());
  Matrix Q(l, l);
  for (Eigen::Index i = 0; i < l; ++i)
    for (Eigen::Index j = 0; j < l; ++j)
      Q(i, j) = prob.y(i) * prob.y(j) *
                prob.kernel(prob.X->row(static_cast<Eigen::Index>(prob.row_of[static_cast<std::size_t>(i)])),
                            prob.X->row(static_cast<Eigen::Index>(prob.row_of[static_cast<std::size_t>(j)])));
  const Vector G = Q * alpha + prob.p;
  double up = -1e300, low = 1e300;
  for (Eigen::Index t = 0; t < l; ++t) {
    const double v = -prob.y(t) * G(t);
    if ((prob.y(t) > 0 && alpha(t) < prob.C) || (prob.y(t) < 0 && alpha(t) > 0)) up = std::max(up, v);
    if ((prob.y(t) > 0 && alpha(t) > 0) || (prob.y(t) < 0 && alpha(t) < prob.C)) low = std::min(low, v);
  }
  return up - low;
}

}  // namespace

TEST(Logit, GradientMatchesCentralDifferences) {
  Rng rng(2024);
  for (int instance = 0; instance < 20; ++instance) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.index(20));
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.index(5));
    const Matrix X = gaussian_matrix(rng, n, p);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    Vector beta(p + 1);
    for (Eigen::Index j = 0; j <= p; ++j) beta(j) = rng.normal();
    const double ridge = rng.uniform(0.0, 1.0);
    const Vector g = logit_gradient(beta, X, y, ridge);
    Vector fd(p + 1);
    for (Eigen::Index j = 0; j <= p; ++j) {
      const double h = 1e-5 * std::max(1.0, std::fabs(beta(j)));
      Vector a = beta, b = beta;
      a(j) += h;
      b(j) -= h;
      fd(j) = (logit_objective(a, X, y, ridge) - logit_objective(b, X, y, ridge)) / (2 * h);
    }
    EXPECT_LT((g - fd).norm() / std::max(1e-12, fd.norm()), 1e-5) << "instance " << instance;
  }
}

TEST(Logit, ObjectiveNeverIncreases) {
  const Dataset d = binary_blobs(5, 200, 4, 0.7);
  const TrainedModel m = fit(ModelSpec::make(ModelKind::logit, Task::classification), d);
  const auto& f = std::get<LogitModel>(m.fitted());
  ASSERT_GE(f.objective_trace.size(), 2u);
  for (std::size_t i = 1; i < f.objective_trace.size(); ++i)
    EXPECT_LE(f.objective_trace[i], f.objective_trace[i - 1] + 1e-12);
  EXPECT_TRUE(f.converged);
  EXPECT_GT(score(m, d), 0.7);
}

TEST(Logit, SeparableDataStaysFinite) {
  Matrix X(6, 1);
  X << -3, -2, -1, 1, 2, 3;
  const Dataset d = make_dataset(X, (Vector(6) << 0, 0, 0, 1, 1, 1).finished());
  const TrainedModel m = fit(ModelSpec::make(ModelKind::logit, Task::classification), d);
  EXPECT_TRUE(std::isfinite(m.predict_row(X.row(0))));
  EXPECT_EQ(score(m, d), 1.0);
}

TEST(Smo, ClassifierHasNoKktViolationAboveTolerance) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (SvmKernel kernel : {SvmKernel::linear, SvmKernel::rbf}) {
      const Dataset d = binary_blobs(seed, 80, 3, 0.8);
      const Standardizer st = Standardizer::fit(d.X);
      const Matrix Xs = st.apply(d.X);
      SvmParams params;
      params.kernel = kernel;
      SmoProblem prob;
      prob.X = &Xs;
      prob.kernel = detail::make_kernel(params, Xs.cols());
      prob.C = params.C;
      prob.p = Vector::Constant(Xs.rows(), -1.0);
      prob.y.resize(Xs.rows());
      for (Eigen::Index i = 0; i < Xs.rows(); ++i) {
        prob.row_of.push_back(static_cast<std::size_t>(i));
        prob.y(i) = d.y(i) == 1.0 ? 1.0 : -1.0;
      }
      const SmoResult r = solve_smo(prob, params.tolerance, 100000, 1 << 20);
      EXPECT_TRUE(r.converged);
      EXPECT_LE(explicit_kkt_violation(prob, r.alpha), params.tolerance + 1e-12);
      EXPECT_NEAR(kkt_gap(prob, r.alpha), explicit_kkt_violation(prob, r.alpha), 1e-9);
      EXPECT_NEAR(prob.y.dot(r.alpha), 0.0, 1e-9);
      EXPECT_GE(r.alpha.minCoeff(), 0.0);
      EXPECT_LE(r.alpha.maxCoeff(), prob.C);
    }
  }
}

TEST(Smo, RegressionFitsLinearSignal) {
  Rng rng(8);
  const Matrix X = gaussian_matrix(rng, 150, 2);
  Vector y(150);
  for (Eigen::Index i = 0; i < 150; ++i) y(i) = 0.3 + 0.05 * X(i, 0) - 0.02 * X(i, 1) + 0.001 * rng.normal();
  const Dataset d = make_dataset(X, y);
  const TrainedModel m = fit(ModelSpec::make(ModelKind::svm, Task::regression), d);
  const auto& f = std::get<SvmModel>(m.fitted());
  EXPECT_TRUE(f.converged);
  EXPECT_LE(f.kkt_gap, 1e-3);
  EXPECT_GT(score(m, d), 0.95);
}

TEST(Knn, OneNeighbourMemorizesTrainingSet) {
  const Dataset d = binary_blobs(3, 60, 3, 0.1);
  ModelSpec spec = ModelSpec::make(ModelKind::knn, Task::classification);
  std::get<KnnParams>(spec.params).k = 1;
  EXPECT_EQ(score(fit(spec, d), d), 1.0);
  spec.task = Task::regression;
  Rng rng(4);
  const Dataset r = make_dataset(d.X, gaussian_matrix(rng, 60, 1).col(0));
  EXPECT_NEAR(score(fit(spec, r), r), 1.0, 1e-12);
}

TEST(Knn, HalfVoteGoesToClassZero) {
  Matrix X(2, 1);
  X << 0.0, 2.0;
  ModelSpec spec = ModelSpec::make(ModelKind::knn, Task::classification);
  std::get<KnnParams>(spec.params).k = 2;
  const TrainedModel m = fit(spec, make_dataset(X, (Vector(2) << 0, 1).finished()));
  Matrix probe(1, 1);
  probe << 1.0;
  EXPECT_DOUBLE_EQ(predict(m, probe)(0), 0.5);
  EXPECT_FALSE(is_positive(m, 0.5));
}

TEST(Linear, NoiselessPlantedDataFitsExactly) {
  Rng rng(12);
  const Matrix X = gaussian_matrix(rng, 100, 4);
  const Vector y = 1.0 + (X * (Vector(4) << 3, -2, 0.5, 0).finished()).array();
  const Dataset d = make_dataset(X, y);
  const TrainedModel m = fit(ModelSpec::make(ModelKind::linear, Task::regression), d);
  EXPECT_GE(score(m, d), 1.0 - 1e-9);
}

TEST(Forest, SingleFullTreeInterpolatesTrainingData) {
  Rng rng(13);
  const Matrix X = gaussian_matrix(rng, 120, 3);
  const Vector y = gaussian_matrix(rng, 120, 1).col(0);
  ModelSpec spec = ModelSpec::make(ModelKind::random_forest, Task::regression, 1);
  auto& fp = std::get<ForestParams>(spec.params);
  fp.trees = 1;
  fp.bootstrap = false;
  fp.max_features = 3;
  const Dataset d = make_dataset(X, y);
  EXPECT_NEAR(score(fit(spec, d), d), 1.0, 1e-12);
}

TEST(Forest, SeedDeterminesModel) {
  const Dataset d = binary_blobs(6, 150, 4, 0.6);
  ModelSpec spec = ModelSpec::make(ModelKind::random_forest, Task::classification, 5);
  std::get<ForestParams>(spec.params).trees = 15;
  const Vector a = predict(fit(spec, d), d);
  const Vector b = predict(fit(spec, d), d);
  EXPECT_EQ(a, b);
  spec.seed = 6;
  EXPECT_NE(predict(fit(spec, d), d), a);
  EXPECT_GE(a.minCoeff(), 0.0);
  EXPECT_LE(a.maxCoeff(), 1.0);
}

TEST(Forest, ImportanceSumsToOne) {
  const Dataset d = binary_blobs(7, 150, 4, 1.0);
  ModelSpec spec = ModelSpec::make(ModelKind::random_forest, Task::classification, 5);
  std::get<ForestParams>(spec.params).trees = 20;
  const TrainedModel m = fit(spec, d);
  const Vector imp = feature_importance(m, d);
  EXPECT_NEAR(imp.sum(), 1.0, 1e-12);
  EXPECT_EQ(imp.maxCoeff(), imp(0));
}

struct ImportanceCase {
  ModelKind kind;
  Task task;
};

class PlantedImportance : public ::testing::TestWithParam<ImportanceCase> {};

TEST_P(PlantedImportance, SignalFeatureRanksFirst) {
  Rng rng(21);
  const Matrix X = gaussian_matrix(rng, 200, 3);
  Vector y = 5.0 * X.col(0);
  if (GetParam().task == Task::classification)
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = y(i) > 0 ? 1.0 : 0.0;
  const Dataset d = make_dataset(X, y);
  ModelSpec spec = ModelSpec::make(GetParam().kind, GetParam().task, 3);
  if (auto* f = std::get_if<ForestParams>(&spec.params)) f->trees = 20;
  const Vector imp = feature_importance(fit(spec, d), d);
  EXPECT_GT(imp(0), imp(1));
  EXPECT_GT(imp(0), imp(2));
  EXPECT_GE(imp.minCoeff(), 0.0);
}

INSTANTIATE_TEST_SUITE_P(AllModels, PlantedImportance,
                         ::testing::Values(ImportanceCase{ModelKind::linear, Task::regression},
                                           ImportanceCase{ModelKind::logit, Task::classification},
                                           ImportanceCase{ModelKind::random_forest, Task::regression},
                                           ImportanceCase{ModelKind::svm, Task::classification},
                                           ImportanceCase{ModelKind::knn, Task::regression},
                                           ImportanceCase{ModelKind::knn, Task::classification}));

TEST(Importance, ConstantFeatureScoresZeroForLinear) {
  Rng rng(22);
  Matrix X = gaussian_matrix(rng, 50, 2);
  X.col(1).setConstant(4.0);
  const Dataset d = make_dataset(X, 2.0 * X.col(0));
  const Vector imp = feature_importance(fit(ModelSpec::make(ModelKind::linear, Task::regression), d), d);
  EXPECT_EQ(imp(1), 0.0);
}

TEST(Importance, UnusedFeatureHasNearZeroPermutationImportance) {
  Rng rng(23);
  const Matrix X = gaussian_matrix(rng, 300, 2);
  const Dataset train = make_dataset(X.col(0), 3.0 * X.col(0), {"a"});
  const TrainedModel m = fit(ModelSpec::make(ModelKind::knn, Task::regression, 1), train);
  // Validation set carries an extra column the model never sees.
  const Dataset valid = make_dataset(X, 3.0 * X.col(0), {"a", "b"});
  Dataset view = select_features(valid, {"a"});
  EXPECT_GT(permutation_importance(m, view)(0), 0.5);
  // a model over (a, b) where b carries nothing
  const TrainedModel both = fit(ModelSpec::make(ModelKind::knn, Task::regression, 1), valid);
  EXPECT_NEAR(permutation_importance(both, valid)(1), 0.0, 0.02 + 0.05);
}

TEST(Spec, TaskCompatibility) {
  EXPECT_THROW(ModelSpec::make(ModelKind::linear, Task::classification), std::invalid_argument);
  EXPECT_THROW(ModelSpec::make(ModelKind::logit, Task::regression), std::invalid_argument);
  EXPECT_EQ(parse_model_kind("rf"), ModelKind::random_forest);
  EXPECT_THROW(parse_model_kind("tree"), std::invalid_argument);
}

TEST(Fit, RejectsDegenerateInputs) {
  const auto spec = ModelSpec::make(ModelKind::logit, Task::classification);
  Matrix X(4, 1);
  X << 1, 2, 3, 4;
  EXPECT_THROW(fit(spec, make_dataset(X, Vector::Ones(4))), DataError);
  EXPECT_THROW(fit(spec, make_dataset(X, (Vector(4) << 0, 1, 2, 1).finished())), DataError);
  EXPECT_THROW(fit(spec, make_dataset(Matrix(0, 1), Vector(0))), DataError);
}

TEST(Predict, SelectsFeaturesByNameAndReportsMissing) {
  Rng rng(24);
  const Matrix X = gaussian_matrix(rng, 40, 3);
  const Dataset d = make_dataset(X, X.col(2) - X.col(0));
  const TrainedModel m = fit(ModelSpec::make(ModelKind::linear, Task::regression), select_features(d, {"x2", "x0"}));
  EXPECT_NEAR(score(m, d), 1.0, 1e-9);
  EXPECT_THROW(predict(m, Matrix(2, 3)), DataError);
  try {
    predict(m, select_features(d, {"x0", "x1"}));
    FAIL() << "expected MissingFeature";
  } catch (const MissingFeature& e) {
    EXPECT_EQ(e.feature(), "x2");
  }
}

class ModelRoundTrip : public ::testing::TestWithParam<ImportanceCase> {};

TEST_P(ModelRoundTrip, SaveLoadGivesIdenticalPredictions) {
  Rng rng(25);
  const Matrix X = gaussian_matrix(rng, 80, 3);
  Vector y = X.col(0) + 0.1 * X.col(1);
  if (GetParam().task == Task::classification)
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = y(i) > 0 ? 1.0 : 0.0;
  const Dataset d = make_dataset(X, y);
  ModelSpec spec = ModelSpec::make(GetParam().kind, GetParam().task, 9);
  if (auto* f = std::get_if<ForestParams>(&spec.params)) f->trees = 5;
  if (auto* s = std::get_if<SvmParams>(&spec.params)) s->kernel = SvmKernel::rbf;
  const TrainedModel m = fit(spec, d);
  const auto path = p2pl::testing::scratch_dir("roundtrip") + "/m.json";
  save_model(m, path);
  const TrainedModel back = load_model(path);
  EXPECT_EQ(predict(back, d), predict(m, d));
  EXPECT_EQ(back.feature_names(), m.feature_names());
  EXPECT_EQ(model_to_json(back).dump(), model_to_json(m).dump());
}

INSTANTIATE_TEST_SUITE_P(AllModels, ModelRoundTrip,
                         ::testing::Values(ImportanceCase{ModelKind::linear, Task::regression},
                                           ImportanceCase{ModelKind::logit, Task::classification},
                                           ImportanceCase{ModelKind::random_forest, Task::regression},
                                           ImportanceCase{ModelKind::random_forest, Task::classification},
                                           ImportanceCase{ModelKind::svm, Task::regression},
                                           ImportanceCase{ModelKind::svm, Task::classification},
                                           ImportanceCase{ModelKind::knn, Task::classification}));

TEST(ModelIo, RejectsForeignDocuments) {
  const auto dir = p2pl::testing::scratch_dir("model_io");
  write_file(dir + "/bad.json", "{\"format\": \"other\"}");
  EXPECT_THROW(load_model(dir + "/bad.json"), DataError);
  write_file(dir + "/junk.json", "not json");
  EXPECT_THROW(load_model(dir + "/junk.json"), DataError);
}
