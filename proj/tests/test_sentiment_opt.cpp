#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace p2pl;

namespace {

// One-nearest-neighbour classifier over the sentiment feature that calls a
// loan funded only when its score sits within 0.0075 of 0.68.
TrainedModel peaked_model() {
  Matrix X(3, 1);
  X << 0.665, 0.68, 0.695;
  ModelSpec spec = ModelSpec::make(ModelKind::knn, Task::classification);
  std::get<KnnParams>(spec.params).k = 1;
  return fit(spec, p2pl::testing::make_dataset(X, (Vector(3) << 0, 1, 0).finished(),
                                               {std::string(kSentimentFeature)}, "LoanStatus"));
}

Dataset loans(std::size_t n, std::size_t funded) {
  Rng rng(1);
  Matrix X(static_cast<Eigen::Index>(n), 2);
  Vector y = Vector::Zero(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    X(i, 0) = rng.uniform(-1, 1);
    X(i, 1) = rng.normal();
    if (static_cast<std::size_t>(i) < funded) y(i) = 1.0;
  }
  return p2pl::testing::make_dataset(X, y, {std::string(kSentimentFeature), "Other"}, "LoanStatus");
}

}  // namespace

TEST(SentimentGrid, HasTwoHundredOnePointsAtDefaultStep) {
  const auto g = sentiment_grid(0.01);
  ASSERT_EQ(g.size(), 201u);
  EXPECT_EQ(g.front(), -1.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(g[100], 0.0);
  EXPECT_EQ(g[168], 0.68);
  EXPECT_EQ(sentiment_grid(0.5), (std::vector<double>{-1, -0.5, 0, 0.5, 1}));
  EXPECT_THROW(sentiment_grid(0.03), std::invalid_argument);
  EXPECT_THROW(sentiment_grid(0.0), std::invalid_argument);
  EXPECT_THROW(sentiment_grid(1.5), std::invalid_argument);
}

TEST(Sweep, PlantedPeakIsFound) {
  const Dataset d = loans(40, 0);
  const SweepCurve c = sweep_sentiment(peaked_model(), d);
  ASSERT_EQ(c.grid.size(), 201u);
  EXPECT_EQ(c.n_loans, 40u);
  for (std::size_t i = 0; i < c.grid.size(); ++i) EXPECT_EQ(c.funded_counts[i], i == 168 ? 40u : 0u);
  const auto [g, count] = optimal_sentiment(c);
  EXPECT_DOUBLE_EQ(g, 0.68);
  EXPECT_EQ(count, 40u);
}

TEST(Sweep, InputIsNotModified) {
  const Dataset d = loans(10, 0);
  const Matrix before = d.X;
  sweep_sentiment(peaked_model(), d);
  EXPECT_EQ(d.X, before);
}

TEST(Sweep, ModelWithoutSentimentGivesFlatCurveAndZero) {
  const Dataset d = loans(60, 30);
  const Dataset other = select_features(d, {"Other"});
  const TrainedModel m = fit(ModelSpec::make(ModelKind::logit, Task::classification), other);
  const SweepCurve c = sweep_sentiment(m, d);
  for (auto v : c.funded_counts) EXPECT_EQ(v, c.funded_counts.front());
  EXPECT_EQ(optimal_sentiment(c).first, 0.0);
}

TEST(Sweep, TiesPreferSmallMagnitudeThenPositive) {
  SweepCurve c;
  c.grid = {-1, -0.3, 0.3, 0.5, 1};
  c.funded_counts = {2, 5, 5, 5, 1};
  EXPECT_EQ(optimal_sentiment(c).first, 0.3);
  c.funded_counts = {2, 5, 4, 5, 1};
  EXPECT_EQ(optimal_sentiment(c).first, -0.3);
  c.funded_counts = {2, 5, 4, 6, 6};
  EXPECT_EQ(optimal_sentiment(c).first, 0.5);
  c.funded_counts.pop_back();
  EXPECT_THROW(optimal_sentiment(c), std::invalid_argument);
}

TEST(Sweep, RejectsRegressionModels) {
  const Dataset d = loans(20, 0);
  const TrainedModel m = fit(ModelSpec::make(ModelKind::linear, Task::regression), d);
  EXPECT_THROW(sweep_sentiment(m, d), std::invalid_argument);
}

TEST(Uplift, FundedLoansStayFundedAndOthersMoveAtOptimum) {
  const Dataset d = loans(50, 10);
  const UpliftReport r = uplift_report(peaked_model(), d);
  EXPECT_EQ(r.n_loans, 50u);
  EXPECT_EQ(r.before, 10u);
  EXPECT_EQ(r.after, 50u);
  EXPECT_EQ(r.newly_funded, 40u);
  EXPECT_DOUBLE_EQ(r.g_star, 0.68);
  EXPECT_EQ(r.curve.n_loans, 40u);
  EXPECT_LT(r.t, 0.0);
  EXPECT_LT(r.p, 0.05);
  EXPECT_NE(r.to_csv().find("0.68"), std::string::npos);
}

TEST(Uplift, RejectsNonBinaryResponse) {
  Dataset d = loans(10, 0);
  d.y(0) = 0.5;
  EXPECT_THROW(uplift_report(peaked_model(), d), DataError);
}

TEST(Uplift, SyntheticCorpusPeaksNearPlantedOptimum) {
  const auto& w = p2pl::testing::small_world();
  ASSERT_TRUE(w.advisor.g_star.has_value());
  EXPECT_NEAR(*w.advisor.g_star, 0.68, 0.1);
}
